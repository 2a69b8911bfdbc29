#![allow(dead_code)]

use qnop::problems::random_spd_matrix;
use qnop::{DenseMatrix, DenseVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn vector(n: usize, rng: &mut ChaCha8Rng) -> DenseVector {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

pub fn matrix(n: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    let data: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
    DenseMatrix::from_row_slice(n, n, &data)
}

pub fn symmetric(n: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    matrix(n, rng).symmetric_part()
}

pub fn spd(n: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    random_spd_matrix(n, 0.1, 10.0, rng)
}

pub fn rel(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
    diff / scale
}

//! Shared fixtures for the criterion benches.

use qnop::problems::{quadratic_weighted_50, random_spd_quadratic};
use qnop::{DenseMatrix, InitialMatrix, SecantPair, SmoothProblem, SolverConfig, StoppingRule, UpdateRule};

/// A current approximation, its inverse and a curved pair of size `n`.
pub struct UpdateFixture {
    pub b: DenseMatrix,
    pub h: DenseMatrix,
    pub pair: SecantPair,
}

pub fn update_fixture(n: usize, seed: u64) -> UpdateFixture {
    let target = random_spd_quadratic(n, (0.1, 10.0), seed);
    let current = random_spd_quadratic(n, (0.1, 10.0), seed ^ 0x9e37);
    let a = target.hessian.expect("quadratic");
    let b = current.hessian.expect("quadratic");
    let h = qnop::linalg::inverse(&b).expect("spd");
    let s = target.x0;
    let y = a.matvec(&s);
    UpdateFixture { b, h, pair: SecantPair::raw(s, y) }
}

/// Steps `s_k` and `A s_k` for `count` seeded directions.
pub fn quadratic_steps(n: usize, count: usize, seed: u64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let a = random_spd_quadratic(n, (0.1, 10.0), seed).hessian.expect("quadratic");
    (0..count as u64)
        .map(|k| {
            let s = random_spd_quadratic(n, (1.0, 2.0), seed + 1 + k).x0;
            let y = a.matvec(&s);
            (s, y)
        })
        .collect()
}

/// The 50-dimensional benchmark quadratic with `B₀ = λI` and the iterate
/// stopping rule.
pub fn benchmark_run(rule: UpdateRule, lambda: f64) -> (SmoothProblem, SolverConfig) {
    let problem = quadratic_weighted_50();
    let stop = StoppingRule::IterateError { x_star: vec![0.0; problem.n], eps_rel: 1e-7 };
    let config = SolverConfig::new(rule, stop).with_b0(InitialMatrix::ScaledIdentity(lambda)).with_max_iters(100_000);
    (problem, config)
}

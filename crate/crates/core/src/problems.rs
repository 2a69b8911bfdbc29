//! Test problems: the weighted 50-dimensional quadratic, the 2D motivating
//! quadratic, two nonlinear systems, and seeded random SPD quadratics.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{norm2, DenseMatrix, DenseVector};

pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&[f64]) -> DenseVector + Send + Sync>;
pub type MatrixFn = Arc<dyn Fn(&[f64]) -> DenseMatrix + Send + Sync>;

/// A smooth objective with its gradient.
#[derive(Clone)]
pub struct SmoothProblem {
    pub name: String,
    pub n: usize,
    pub objective: ScalarFn,
    pub gradient: VectorFn,
    /// Constant Hessian, when the problem is quadratic.
    pub hessian: Option<DenseMatrix>,
    pub minimizer: Option<DenseVector>,
    pub x0: DenseVector,
}

impl SmoothProblem {
    pub fn value(&self, x: &[f64]) -> f64 {
        (self.objective)(x)
    }

    pub fn grad(&self, x: &[f64]) -> DenseVector {
        (self.gradient)(x)
    }

    /// `f = ½ xᵀAx` with minimizer 0.
    pub fn quadratic(name: impl Into<String>, a: DenseMatrix, x0: DenseVector) -> Self {
        let n = a.nrows();
        let a_f = a.clone();
        let a_g = a.clone();
        Self {
            name: name.into(),
            n,
            objective: Arc::new(move |x| 0.5 * crate::linalg::dot(x, &a_f.matvec(x))),
            gradient: Arc::new(move |x| a_g.matvec(x)),
            hessian: Some(a),
            minimizer: Some(vec![0.0; n]),
            x0,
        }
    }
}

impl fmt::Debug for SmoothProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothProblem").field("name", &self.name).field("n", &self.n).finish_non_exhaustive()
    }
}

/// A square nonlinear system `F(x) = 0`.
#[derive(Clone)]
pub struct NonlinearSystem {
    pub name: String,
    pub n: usize,
    pub residual: VectorFn,
    pub jacobian: Option<MatrixFn>,
    pub root: Option<DenseVector>,
    pub x0: DenseVector,
}

impl NonlinearSystem {
    pub fn eval(&self, x: &[f64]) -> DenseVector {
        (self.residual)(x)
    }

    pub fn jacobian_at(&self, x: &[f64]) -> Option<DenseMatrix> {
        self.jacobian.as_ref().map(|j| j(x))
    }
}

impl fmt::Debug for NonlinearSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NonlinearSystem").field("name", &self.name).field("n", &self.n).finish_non_exhaustive()
    }
}

/// `f(x) = ½ Σ i x_i²` on ℝ⁵⁰, started from the all-ones vector.
pub fn quadratic_weighted_50() -> SmoothProblem {
    let n = 50;
    let weights: Vec<f64> = (1..=n).map(|i| i as f64).collect();
    let wf = weights.clone();
    let wg = weights.clone();
    SmoothProblem {
        name: "quadratic50".into(),
        n,
        objective: Arc::new(move |x| 0.5 * x.iter().zip(&wf).map(|(v, w)| w * v * v).sum::<f64>()),
        gradient: Arc::new(move |x| x.iter().zip(&wg).map(|(v, w)| w * v).collect()),
        hessian: Some(DenseMatrix::from_diagonal(&weights)),
        minimizer: Some(vec![0.0; n]),
        x0: vec![1.0; n],
    }
}

/// The 2D example `f = ½(x² + y²)` with its start, initial matrix and
/// gradient tolerance.
#[derive(Debug, Clone)]
pub struct MotivatingExample {
    pub problem: SmoothProblem,
    pub b0: DenseMatrix,
    /// Stop once `‖∇f(x_k)‖ ≤ grad_tol · ‖∇f(x₀)‖`.
    pub grad_tol: f64,
    pub start_angle_degrees: f64,
}

pub fn motivating_quadratic_2d() -> MotivatingExample {
    let theta = 89.0_f64.to_radians();
    let x0 = vec![theta.cos(), theta.sin()];
    MotivatingExample {
        problem: SmoothProblem {
            name: "motivating2d".into(),
            n: 2,
            objective: Arc::new(|x| 0.5 * (x[0] * x[0] + x[1] * x[1])),
            gradient: Arc::new(|x| x.to_vec()),
            hessian: Some(DenseMatrix::identity(2)),
            minimizer: Some(vec![0.0, 0.0]),
            x0,
        },
        b0: DenseMatrix::from_diagonal(&[1.0, 1e6]),
        grad_tol: 1e-6,
        start_angle_degrees: 89.0,
    }
}

/// `F(x) = (x₁² + x₂² − 1, x₁ − cos x₂)`.
pub fn circle_cosine_system() -> NonlinearSystem {
    NonlinearSystem {
        name: "circle-cosine".into(),
        n: 2,
        residual: Arc::new(|x| vec![x[0] * x[0] + x[1] * x[1] - 1.0, x[0] - x[1].cos()]),
        jacobian: Some(Arc::new(|x| DenseMatrix::from_rows(&[vec![2.0 * x[0], 2.0 * x[1]], vec![1.0, x[1].sin()]]))),
        root: Some(vec![1.0, 0.0]),
        x0: vec![0.5, 0.5],
    }
}

/// Ten-dimensional Rosenbrock system in 2×2 blocks:
/// `f_i = 10(x_{i+1} − x_i²)`, `f_{i+1} = 1 − x_i` for even `i`.
pub fn modified_rosenbrock_10() -> NonlinearSystem {
    let n = 10;
    NonlinearSystem {
        name: "rosenbrock10".into(),
        n,
        residual: Arc::new(move |x| {
            let mut f = vec![0.0; n];
            for i in (0..n).step_by(2) {
                f[i] = 10.0 * (x[i + 1] - x[i] * x[i]);
                f[i + 1] = 1.0 - x[i];
            }
            f
        }),
        jacobian: Some(Arc::new(move |x| {
            let mut j = DenseMatrix::zeros(n, n);
            for i in (0..n).step_by(2) {
                j[(i, i)] = -20.0 * x[i];
                j[(i, i + 1)] = 10.0;
                j[(i + 1, i)] = -1.0;
            }
            j
        })),
        root: Some(vec![1.0; n]),
        x0: vec![0.5; n],
    }
}

/// Random orthogonal matrix from the QR factorization of a Gaussian matrix,
/// with signs fixed so the distribution is Haar.
pub fn random_orthogonal(n: usize, rng: &mut impl Rng) -> DenseMatrix {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    DenseMatrix::from_nalgebra(&q)
}

/// `QΛQᵀ` with `Λ` log-uniform in `[lo, hi]`.
pub fn random_spd_matrix(n: usize, lo: f64, hi: f64, rng: &mut impl Rng) -> DenseMatrix {
    assert!(n >= 1 && lo > 0.0 && hi >= lo, "invalid spectrum [{lo}, {hi}]");
    if lo == hi {
        return DenseMatrix::scaled_identity(n, lo);
    }
    let q = random_orthogonal(n, rng);
    let (llo, lhi) = (lo.ln(), hi.ln());
    let lambdas: Vec<f64> = (0..n).map(|_| rng.random_range(llo..=lhi).exp()).collect();
    let mut a = DenseMatrix::zeros(n, n);
    for k in 0..n {
        for i in 0..n {
            let qik = q[(i, k)] * lambdas[k];
            for j in 0..n {
                a[(i, j)] += qik * q[(j, k)];
            }
        }
    }
    a.symmetric_part()
}

/// `f = ½ xᵀAx` with a seeded random SPD `A` whose spectrum lies in
/// `spectrum`, started from a seeded random point on the unit sphere.
pub fn random_spd_quadratic(n: usize, spectrum: (f64, f64), seed: u64) -> SmoothProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = random_spd_matrix(n, spectrum.0, spectrum.1, &mut rng);
    let mut x0: DenseVector = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let nx = norm2(&x0);
    x0.iter_mut().for_each(|v| *v /= nx);
    SmoothProblem::quadratic(format!("random-spd-{n}-{seed}"), a, x0)
}

fn fd_step(x: &[f64]) -> f64 {
    1e-6 * (1.0 + norm2(x))
}

/// Relative discrepancy between the gradient and central differences of
/// the objective at `x`.
pub fn gradient_check(problem: &SmoothProblem, x: &[f64]) -> f64 {
    let h = fd_step(x);
    let g = problem.grad(x);
    let mut fd = vec![0.0; x.len()];
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        let xi = xp[i];
        xp[i] = xi + h;
        let fp = problem.value(&xp);
        xp[i] = xi - h;
        let fm = problem.value(&xp);
        xp[i] = xi;
        fd[i] = (fp - fm) / (2.0 * h);
    }
    let diff = norm2(&crate::linalg::sub(&g, &fd));
    diff / norm2(&g).max(norm2(&fd)).max(1.0)
}

/// Relative discrepancy between the analytic Jacobian and central
/// differences of the residual at `x`; `None` without an analytic Jacobian.
pub fn jacobian_check(system: &NonlinearSystem, x: &[f64]) -> Option<f64> {
    let j = system.jacobian_at(x)?;
    let h = fd_step(x);
    let n = x.len();
    let mut fd = DenseMatrix::zeros(n, n);
    let mut xp = x.to_vec();
    for k in 0..n {
        let xk = xp[k];
        xp[k] = xk + h;
        let fp = system.eval(&xp);
        xp[k] = xk - h;
        let fm = system.eval(&xp);
        xp[k] = xk;
        for i in 0..n {
            fd[(i, k)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    Some(j.sub(&fd).frobenius_norm() / j.frobenius_norm().max(1.0))
}

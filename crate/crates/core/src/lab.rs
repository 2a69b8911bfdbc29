//! Fixed-Hessian laboratory: the approximation process `B_{k+1} = U(B_k, s_k, A s_k)`
//! with a known `A`, plus numerical oracles for the error-reduction,
//! image-operator and projection inequalities.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::linalg::{
    dot, inverse, norm2, project_onto_span, singular_values, symmetric_eigen, symmetric_function, DenseMatrix,
    DenseVector, InnerProductWeight, LinalgError,
};
use crate::problems::{random_orthogonal, random_spd_matrix};
use crate::updates::{gpsb_inverse_update, gpsb_update, SecantPair, UpdateForm, UpdateRule};

/// Relative slack for inequality oracles.
pub const INEQUALITY_SLACK: f64 = 1e-9;
/// Relative tolerance for identities that hold with equality.
pub const EQUALITY_TOL: f64 = 1e-8;
/// `‖B_k − A‖_F ≤ TERMINATION_TOL · ‖A‖_F` halts a process.
pub const TERMINATION_TOL: f64 = 1e-10;
/// Kernel-dimension tolerance, relative to `‖A‖_F`.
pub const LAB_KERNEL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("lab processes run on direct-form rules")]
    InverseForm,
    #[error("dimension mismatch")]
    Dimension,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

// ---------------------------------------------------------------------------
// Random generators
// ---------------------------------------------------------------------------

pub fn gaussian_vector(n: usize, rng: &mut impl Rng) -> DenseVector {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> DenseMatrix {
    let data: Vec<f64> = (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect();
    DenseMatrix::from_row_slice(rows, cols, &data)
}

pub fn random_symmetric(n: usize, rng: &mut impl Rng) -> DenseMatrix {
    gaussian_matrix(n, n, rng).symmetric_part()
}

/// Lab SPD generator: spectrum log-uniform in `[10⁻², 10²]`.
pub fn lab_spd(n: usize, rng: &mut impl Rng) -> DenseMatrix {
    random_spd_matrix(n, 1e-2, 1e2, rng)
}

/// `Q diag(d) Qᵀ` restricted to the first `d.len()` columns of `q`.
fn low_rank(q: &DenseMatrix, d: &[f64]) -> DenseMatrix {
    let n = q.nrows();
    let mut out = DenseMatrix::zeros(n, n);
    for (k, &dk) in d.iter().enumerate() {
        for i in 0..n {
            let v = q[(i, k)] * dk;
            for j in 0..n {
                out[(i, j)] += v * q[(j, k)];
            }
        }
    }
    out.symmetric_part()
}

/// A symmetric perturbation `E = V D Vᵀ` of rank `r` together with an exact
/// orthonormal basis of `ker E` (the remaining columns of the rotation).
#[derive(Debug, Clone)]
pub struct KernelConstruction {
    pub e: DenseMatrix,
    pub kernel: DenseMatrix,
}

pub fn symmetric_with_kernel(n: usize, r: usize, rng: &mut impl Rng) -> KernelConstruction {
    let q = random_orthogonal(n, rng);
    let d: Vec<f64> = (0..r)
        .map(|_| {
            let mag = rng.random_range(0.1..10.0);
            if rng.random_bool(0.5) {
                mag
            } else {
                -mag
            }
        })
        .collect();
    let kernel = DenseMatrix::from_columns(n, &(r..n).map(|j| q.column(j)).collect::<Vec<_>>());
    KernelConstruction { e: low_rank(&q, &d), kernel }
}

/// Nonsymmetric `E = U D Vᵀ` of rank `r` with `ker E = span(V)^⊥`.
pub fn general_with_kernel(n: usize, r: usize, rng: &mut impl Rng) -> KernelConstruction {
    let qv = random_orthogonal(n, rng);
    let qu = random_orthogonal(n, rng);
    let mut e = DenseMatrix::zeros(n, n);
    for k in 0..r {
        let dk = rng.random_range(0.1..10.0);
        for i in 0..n {
            for j in 0..n {
                e[(i, j)] += qu[(i, k)] * dk * qv[(j, k)];
            }
        }
    }
    let kernel = DenseMatrix::from_columns(n, &(r..n).map(|j| qv.column(j)).collect::<Vec<_>>());
    KernelConstruction { e, kernel }
}

fn sqrt_and_inverse_sqrt(a: &DenseMatrix) -> (DenseMatrix, DenseMatrix) {
    (symmetric_function(a, f64::sqrt), symmetric_function(a, |l| 1.0 / l.sqrt()))
}

/// Number of singular values of `e` at or below `abs_tol`.
pub fn kernel_dimension(e: &DenseMatrix, abs_tol: f64) -> usize {
    singular_values(e).iter().filter(|&&s| s <= abs_tol).count()
}

/// Orthonormal kernel basis with an absolute singular-value threshold.
pub fn kernel_basis_abs(e: &DenseMatrix, abs_tol: f64) -> DenseMatrix {
    let smax = singular_values(e).iter().fold(0.0_f64, |m, &s| m.max(s));
    if smax <= abs_tol {
        return DenseMatrix::identity(e.ncols());
    }
    crate::linalg::kernel_basis(e, abs_tol / smax)
}

// ---------------------------------------------------------------------------
// Approximation process
// ---------------------------------------------------------------------------

/// Where the correction directions `s_k` come from.
#[derive(Debug, Clone, PartialEq)]
pub enum DirectionSource {
    /// Seeded Gaussian directions.
    Random { seed: u64 },
    /// `s̃_k = W⁻¹(B_k − A)ᵀ s_k` applied to seeded Gaussian `s_k`, with
    /// `W = A` (Broyden), `M⁻²` (generalized PSB) or `I` (BGM).
    ImageOperator { seed: u64 },
    /// Directions made `W`-orthogonal to all previous ones by modified
    /// Gram–Schmidt; `seed = None` uses the standard basis.
    Orthogonalized { seed: Option<u64> },
    /// Explicit directions used as given.
    List(Vec<DenseVector>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProcessConfig {
    pub a: DenseMatrix,
    pub b0: DenseMatrix,
    pub rule: UpdateRule,
    pub direction_source: DirectionSource,
    pub max_steps: usize,
    /// `M` for the weighted error `‖M(B_k − A)M‖_F`.
    pub m: Option<DenseMatrix>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProcessStep {
    pub b: DenseMatrix,
    pub error: f64,
    pub weighted_error: Option<f64>,
    pub kernel_dim: usize,
    /// Direction used to leave this state.
    pub direction: Option<DenseVector>,
    /// `‖(B_k − A)s_k‖² / ‖s_k‖²`.
    pub reduction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProcessStatus {
    Terminated { updates: usize },
    MaxSteps,
    Breakdown(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProcessTrace {
    pub a: DenseMatrix,
    pub steps: Vec<ProcessStep>,
    pub status: ProcessStatus,
}

impl ProcessTrace {
    pub fn updates(&self) -> usize {
        self.steps.len().saturating_sub(1)
    }

    pub fn final_error(&self) -> f64 {
        self.steps.last().map_or(f64::NAN, |s| s.error)
    }

    pub fn kernel_dims(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.kernel_dim).collect()
    }
}

/// Inner product in which the rule's kernel complement is taken.
pub fn family_weight(rule: &UpdateRule, a: &DenseMatrix) -> InnerProductWeight {
    match rule {
        UpdateRule::Broyden { .. } => InnerProductWeight::Matrix(a.clone()),
        UpdateRule::GeneralizedPsb { minv2, .. } => minv2.clone(),
        UpdateRule::Bgm { .. } => InnerProductWeight::Identity,
    }
}

fn weight_solve(w: &InnerProductWeight, v: &[f64]) -> Result<DenseVector, LinalgError> {
    match w {
        InnerProductWeight::Identity => Ok(v.to_vec()),
        InnerProductWeight::Matrix(m) => crate::linalg::solve_symmetric(m, v),
    }
}

/// Runs the process until `‖B_k − A‖_F ≤ TERMINATION_TOL · ‖A‖_F` or
/// `max_steps` updates.
pub fn run_process(config: &ProcessConfig) -> Result<ProcessTrace, LabError> {
    let n = config.a.nrows();
    if config.b0.nrows() != n || !config.a.is_square() || !config.b0.is_square() {
        return Err(LabError::Dimension);
    }
    if config.rule.form() == UpdateForm::Inverse {
        return Err(LabError::InverseForm);
    }
    let a = &config.a;
    let a_norm = a.frobenius_norm();
    let w = family_weight(&config.rule, a);
    let mut rng = match &config.direction_source {
        DirectionSource::Random { seed } | DirectionSource::ImageOperator { seed } => ChaCha8Rng::seed_from_u64(*seed),
        DirectionSource::Orthogonalized { seed } => ChaCha8Rng::seed_from_u64(seed.unwrap_or(0)),
        DirectionSource::List(_) => ChaCha8Rng::seed_from_u64(0),
    };
    let mut previous: Vec<DenseVector> = Vec::new();
    let mut b = config.b0.clone();
    let mut steps = Vec::new();
    let snapshot = |b: &DenseMatrix| {
        let e = b.sub(a);
        ProcessStep {
            b: b.clone(),
            error: e.frobenius_norm(),
            weighted_error: config.m.as_ref().map(|m| m.matmul(&e).matmul(m).frobenius_norm()),
            kernel_dim: kernel_dimension(&e, LAB_KERNEL_TOL * a_norm),
            direction: None,
            reduction: None,
        }
    };
    let status = loop {
        let k = steps.len();
        let mut step = snapshot(&b);
        if step.error <= TERMINATION_TOL * a_norm {
            steps.push(step);
            break ProcessStatus::Terminated { updates: k };
        }
        if k >= config.max_steps {
            steps.push(step);
            break ProcessStatus::MaxSteps;
        }
        let e = b.sub(a);
        let s: DenseVector = match &config.direction_source {
            DirectionSource::Random { .. } => gaussian_vector(n, &mut rng),
            DirectionSource::ImageOperator { .. } => {
                let base = gaussian_vector(n, &mut rng);
                weight_solve(&w, &e.tr_matvec(&base))?
            }
            DirectionSource::Orthogonalized { seed } => {
                let mut v = match seed {
                    Some(_) => gaussian_vector(n, &mut rng),
                    None => crate::linalg::unit_vector(n, k % n),
                };
                for p in &previous {
                    let c = w.inner(&v, p) / w.inner(p, p);
                    for i in 0..n {
                        v[i] -= c * p[i];
                    }
                }
                v
            }
            DirectionSource::List(list) => match list.get(k) {
                Some(v) => v.clone(),
                None => {
                    steps.push(step);
                    break ProcessStatus::MaxSteps;
                }
            },
        };
        if norm2(&s) == 0.0 {
            steps.push(step);
            break ProcessStatus::Breakdown(format!("zero direction at step {k}"));
        }
        let es = e.matvec(&s);
        step.reduction = Some(dot(&es, &es) / dot(&s, &s));
        let pair = SecantPair::raw(s.clone(), a.matvec(&s));
        match config.rule.apply(&b, &pair) {
            Ok(next) => b = next,
            Err(err) => {
                step.direction = Some(s);
                steps.push(step);
                break ProcessStatus::Breakdown(err.to_string());
            }
        }
        previous.push(s.clone());
        step.direction = Some(s);
        steps.push(step);
    };
    Ok(ProcessTrace { a: config.a.clone(), steps, status })
}

/// Kernel-growth findings for a process trace.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelGrowthReport {
    pub dims: Vec<usize>,
    /// Steps where the kernel dimension dropped.
    pub decreases: usize,
    /// Steps with a direction at least 1° away from the kernel (in `W`)
    /// after which the dimension did not grow.
    pub stalls: usize,
    pub final_dim: usize,
}

impl KernelGrowthReport {
    pub fn monotone(&self) -> bool {
        self.decreases == 0
    }
}

/// Kernel dimensions of `B_k − A` at `tol · ‖A‖_F`, checked for
/// monotonicity and strict growth.
pub fn check_kernel_growth(trace: &ProcessTrace, tol: f64, w: &InnerProductWeight) -> KernelGrowthReport {
    let abs_tol = tol * trace.a.frobenius_norm();
    let dims: Vec<usize> = trace.steps.iter().map(|s| kernel_dimension(&s.b.sub(&trace.a), abs_tol)).collect();
    let mut decreases = 0;
    let mut stalls = 0;
    for k in 1..dims.len() {
        if dims[k] < dims[k - 1] {
            decreases += 1;
        }
        if let Some(s) = &trace.steps[k - 1].direction {
            let basis = kernel_basis_abs(&trace.steps[k - 1].b.sub(&trace.a), abs_tol);
            let far = match crate::linalg::angle_to_subspace(s, &basis, w) {
                Ok(angle) => angle >= 1.0,
                Err(_) => false,
            };
            if far && dims[k] <= dims[k - 1] && dims[k - 1] < trace.a.nrows() {
                stalls += 1;
            }
        }
    }
    let final_dim = dims.last().copied().unwrap_or(0);
    KernelGrowthReport { dims, decreases, stalls, final_dim }
}

// ---------------------------------------------------------------------------
// Oracles
// ---------------------------------------------------------------------------

/// Whether an oracle's hypotheses were met.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleStatus {
    Checked,
    HypothesisNotMet,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReductionOutcome {
    /// Post-update squared error.
    pub lhs: f64,
    /// Bound (PSB) or exact value (BGM).
    pub rhs: f64,
    pub holds: bool,
    /// Relative shortfall (PSB) or relative deviation (BGM).
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReductionFamily {
    /// Generalized PSB with weight `M` (symmetric, nonsingular).
    Gpsb { m: DenseMatrix },
    Bgm,
}

/// Squared post-update error against the predicted reduction for one
/// update with `y = As`.
pub fn oracle_error_reduction(
    family: &ReductionFamily,
    a: &DenseMatrix,
    b: &DenseMatrix,
    s: &[f64],
) -> Result<ReductionOutcome, LabError> {
    let y = a.matvec(s);
    let pair = SecantPair::raw(s.to_vec(), y);
    let e = b.sub(a);
    match family {
        ReductionFamily::Gpsb { m } => {
            let m_inv = inverse(m)?;
            let minv2 = InnerProductWeight::Matrix(m_inv.matmul(&m_inv).symmetric_part());
            let b_plus = gpsb_update(b, &pair, &minv2).map_err(|_| LabError::Dimension)?;
            let before = m.matmul(&e).matmul(m).frobenius_norm().powi(2);
            let lhs = m.matmul(&b_plus.sub(a)).matmul(m).frobenius_norm().powi(2);
            let mes = m.matvec(&e.matvec(s));
            let mis = m_inv.matvec(s);
            let rhs = before - dot(&mes, &mes) / dot(&mis, &mis);
            let residual = (lhs - rhs).max(0.0) / before.max(f64::MIN_POSITIVE);
            Ok(ReductionOutcome { lhs, rhs, holds: residual <= INEQUALITY_SLACK, residual })
        }
        ReductionFamily::Bgm => {
            let b_plus = crate::updates::bgm_update(b, &pair).map_err(|_| LabError::Dimension)?;
            let before = e.frobenius_norm().powi(2);
            let lhs = b_plus.sub(a).frobenius_norm().powi(2);
            let es = e.matvec(s);
            let rhs = before - dot(&es, &es) / dot(s, s);
            let residual = (lhs - rhs).abs() / before.max(f64::MIN_POSITIVE);
            Ok(ReductionOutcome { lhs, rhs, holds: residual <= 1e-10, residual })
        }
    }
}

/// Image operators paired with their error-reduction functionals.
#[derive(Debug, Clone, PartialEq)]
pub enum ImageOperatorKind {
    /// `W = M²(B − A)`, functional `‖M(B−A)v‖²/‖M⁻¹v‖²`.
    Gpsb { m: DenseMatrix },
    /// `W = A⁻¹(B − A)` with the DFP functional (`M = A^{-1/2}`).
    DfpHessian,
    /// `W = B⁻¹(B − A)`; needs `B ⪰ A` or `B ⪯ A`.
    DfpCurrent,
    /// `W = A(H − A⁻¹)` with the BFGS functional (`M = A^{1/2}`); `b` is `H`.
    BfgsHessian,
    /// `W = H⁻¹(H − A⁻¹)`; needs `H ⪰ A⁻¹` or `H ⪯ A⁻¹`; `b` is `H`.
    BfgsCurrent,
    /// `W = (B − A)ᵀ`, functional `‖(B−A)v‖²/‖v‖²`.
    Bgm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainOutcome {
    pub base: f64,
    pub improved: f64,
    pub holds: bool,
    pub equality: bool,
    pub status: OracleStatus,
}

/// `E`, `M·E`, `M⁻²` and `W` for an image-operator check.
struct Functional {
    me: DenseMatrix,
    minv2: DenseMatrix,
}

impl Functional {
    fn eval(&self, v: &[f64]) -> f64 {
        let mev = self.me.matvec(v);
        dot(&mev, &mev) / dot(v, &self.minv2.matvec(v))
    }
}

fn semidefinite_one_sign(e: &DenseMatrix) -> bool {
    let (vals, _) = symmetric_eigen(e);
    let scale = vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let tol = 1e-12 * scale;
    vals.iter().all(|&v| v >= -tol) || vals.iter().all(|&v| v <= tol)
}

/// Evaluates the reduction functional at `s` and at `Ws`.
pub fn oracle_image_operator_gain(
    kind: &ImageOperatorKind,
    a: &DenseMatrix,
    b: &DenseMatrix,
    s: &[f64],
) -> Result<GainOutcome, LabError> {
    let n = a.nrows();
    let (functional, w) = match kind {
        ImageOperatorKind::Gpsb { m } => {
            let e = b.sub(a);
            let m_inv = inverse(m)?;
            let f = Functional { me: m.matmul(&e), minv2: m_inv.matmul(&m_inv) };
            (f, m.matmul(m).matmul(&e))
        }
        ImageOperatorKind::DfpHessian | ImageOperatorKind::DfpCurrent => {
            let e = b.sub(a);
            let (_, a_isqrt) = sqrt_and_inverse_sqrt(a);
            let f = Functional { me: a_isqrt.matmul(&e), minv2: a.clone() };
            let w = if *kind == ImageOperatorKind::DfpHessian {
                inverse(a)?.matmul(&e)
            } else {
                if !(crate::linalg::is_positive_definite(b) && semidefinite_one_sign(&e)) {
                    return Ok(not_met());
                }
                inverse(b)?.matmul(&e)
            };
            (f, w)
        }
        ImageOperatorKind::BfgsHessian | ImageOperatorKind::BfgsCurrent => {
            let a_inv = inverse(a)?.symmetric_part();
            let e = b.sub(&a_inv);
            let (a_sqrt, _) = sqrt_and_inverse_sqrt(a);
            let f = Functional { me: a_sqrt.matmul(&e), minv2: a_inv };
            let w = if *kind == ImageOperatorKind::BfgsHessian {
                a.matmul(&e)
            } else {
                if !(crate::linalg::is_positive_definite(b) && semidefinite_one_sign(&e)) {
                    return Ok(not_met());
                }
                inverse(b)?.matmul(&e)
            };
            (f, w)
        }
        ImageOperatorKind::Bgm => {
            let e = b.sub(a);
            let w = e.transpose();
            (Functional { me: e, minv2: DenseMatrix::identity(n) }, w)
        }
    };
    let ws = w.matvec(s);
    if norm2(&ws) <= 1e-14 * w.frobenius_norm() * norm2(s) {
        return Ok(GainOutcome { base: 0.0, improved: 0.0, holds: true, equality: false, status: OracleStatus::Degenerate });
    }
    let base = functional.eval(s);
    let improved = functional.eval(&ws);
    let holds = improved >= base - INEQUALITY_SLACK * base.abs();
    let equality = (improved - base).abs() <= EQUALITY_TOL * base.abs().max(improved.abs());
    Ok(GainOutcome { base, improved, holds, equality, status: OracleStatus::Checked })
}

/// `(‖Eᵀs‖²/‖s‖², ‖EEᵀs‖²/‖Eᵀs‖²)`: the comparison that Cauchy–Schwarz
/// gives for `W = Eᵀ`. For symmetric `E` it coincides with the BGM gain.
pub fn transpose_gain(e: &DenseMatrix, s: &[f64]) -> (f64, f64) {
    let ets = e.tr_matvec(s);
    let eets = e.matvec(&ets);
    (dot(&ets, &ets) / dot(s, s), dot(&eets, &eets) / dot(&ets, &ets))
}

fn not_met() -> GainOutcome {
    GainOutcome { base: 0.0, improved: 0.0, holds: true, equality: false, status: OracleStatus::HypothesisNotMet }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProjectionFamily {
    /// Projection in `⟨·,·⟩_{M⁻²}`, functional `‖M(B−A)v‖²/‖M⁻¹v‖²`.
    Gpsb { m: DenseMatrix },
    /// Projection in `⟨·,·⟩_A` with `M = A^{-1/2}`.
    Dfp,
    /// Projection of `y` in `⟨·,·⟩_{A⁻¹}` with `M = A^{1/2}`; `b` is `H`
    /// and `s` is the vector `y`.
    Bfgs,
    /// Euclidean projection, functional `‖(B−A)v‖²/‖v‖²`.
    Bgm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionOutcome {
    pub base: f64,
    pub improved: f64,
    pub holds: bool,
    /// `|base − sin²γ · improved|`, relative.
    pub angle_identity_residual: f64,
    /// Sine of the angle between the vector and the whole kernel.
    pub sin_theta: f64,
    /// Sine of the angle between the vector and the projection subspace.
    pub sin_gamma: f64,
    pub status: OracleStatus,
}

/// Projects `s` onto the `W`-orthogonal complement of `subspace` (or of
/// the whole numerical kernel when `None`) and compares the functional
/// before and after.
pub fn oracle_projection_gain(
    family: &ProjectionFamily,
    a: &DenseMatrix,
    b: &DenseMatrix,
    subspace: Option<&DenseMatrix>,
    s: &[f64],
) -> Result<ProjectionOutcome, LabError> {
    let (e, functional, weight) = match family {
        ProjectionFamily::Gpsb { m } => {
            let e = b.sub(a);
            let m_inv = inverse(m)?;
            let minv2 = m_inv.matmul(&m_inv).symmetric_part();
            (e.clone(), Functional { me: m.matmul(&e), minv2: minv2.clone() }, InnerProductWeight::Matrix(minv2))
        }
        ProjectionFamily::Dfp => {
            let e = b.sub(a);
            let (_, a_isqrt) = sqrt_and_inverse_sqrt(a);
            (e.clone(), Functional { me: a_isqrt.matmul(&e), minv2: a.clone() }, InnerProductWeight::Matrix(a.clone()))
        }
        ProjectionFamily::Bfgs => {
            let a_inv = inverse(a)?.symmetric_part();
            let e = b.sub(&a_inv);
            let (a_sqrt, _) = sqrt_and_inverse_sqrt(a);
            (e.clone(), Functional { me: a_sqrt.matmul(&e), minv2: a_inv.clone() }, InnerProductWeight::Matrix(a_inv))
        }
        ProjectionFamily::Bgm => {
            let e = b.sub(a);
            let n = e.nrows();
            (e.clone(), Functional { me: e, minv2: DenseMatrix::identity(n) }, InnerProductWeight::Identity)
        }
    };
    let e_norm = e.frobenius_norm();
    let full_kernel = crate::linalg::kernel_basis(&e, crate::linalg::DEFAULT_KERNEL_TOL);
    let basis = match subspace {
        Some(basis) => {
            for col in basis.columns() {
                if norm2(&e.matvec(&col)) > 1e-8 * e_norm * norm2(&col) {
                    return Ok(ProjectionOutcome {
                        base: 0.0,
                        improved: 0.0,
                        holds: true,
                        angle_identity_residual: 0.0,
                        sin_theta: 0.0,
                        sin_gamma: 0.0,
                        status: OracleStatus::HypothesisNotMet,
                    });
                }
            }
            basis.clone()
        }
        None => full_kernel.clone(),
    };
    let s_norm = weight.norm(s);
    let residual_of = |basis: &DenseMatrix| -> Result<DenseVector, LinalgError> {
        let p = project_onto_span(s, basis, &weight)?;
        Ok(s.iter().zip(&p).map(|(a, b)| a - b).collect())
    };
    let s_tilde = residual_of(&basis)?;
    let st_norm = weight.norm(&s_tilde);
    if st_norm <= 1e-12 * s_norm {
        return Ok(ProjectionOutcome {
            base: 0.0,
            improved: 0.0,
            holds: true,
            angle_identity_residual: 0.0,
            sin_theta: 0.0,
            sin_gamma: 0.0,
            status: OracleStatus::Degenerate,
        });
    }
    let sin_gamma = st_norm / s_norm;
    let sin_theta = weight.norm(&residual_of(&full_kernel)?) / s_norm;
    let base = functional.eval(s);
    let improved = functional.eval(&s_tilde);
    let predicted = sin_gamma * sin_gamma * improved;
    let angle_identity_residual = (base - predicted).abs() / base.abs().max(predicted.abs()).max(f64::MIN_POSITIVE);
    let holds = improved >= base - INEQUALITY_SLACK * base.abs() && sin_theta <= sin_gamma + 1e-10;
    Ok(ProjectionOutcome {
        base,
        improved,
        holds,
        angle_identity_residual,
        sin_theta,
        sin_gamma,
        status: OracleStatus::Checked,
    })
}

// ---------------------------------------------------------------------------
// Reports and suites
// ---------------------------------------------------------------------------

/// One line of oracle output.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub name: String,
    pub trials: usize,
    pub violations: usize,
    /// Trials whose hypotheses were not met or that were degenerate.
    pub skipped: usize,
    pub max_residual: f64,
    /// Measured but never counted as a failure.
    pub informational: bool,
}

impl OracleReport {
    fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), trials: 0, violations: 0, skipped: 0, max_residual: 0.0, informational: false }
    }

    fn record(&mut self, ok: bool, residual: f64) {
        self.trials += 1;
        if !ok {
            self.violations += 1;
        }
        if residual.is_finite() {
            self.max_residual = self.max_residual.max(residual);
        } else {
            self.max_residual = f64::INFINITY;
        }
    }

    fn skip(&mut self) {
        self.skipped += 1;
    }

    pub fn clean(&self) -> bool {
        self.informational || self.violations == 0
    }
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: trials={} violations={} skipped={} max_residual={:.3e}{}",
            self.name,
            self.trials,
            self.violations,
            self.skipped,
            self.max_residual,
            if self.informational { " (informational)" } else { "" }
        )
    }
}

fn dim_for(trial: usize, lo: usize, hi: usize) -> usize {
    lo + trial % (hi - lo + 1)
}

fn shortfall(base: f64, improved: f64) -> f64 {
    (base - improved).max(0.0) / base.abs().max(f64::MIN_POSITIVE)
}

/// Error-reduction oracles: generalized PSB bound and BGM identity.
pub fn error_reduction_suite(trials: usize, seed: u64) -> Vec<OracleReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut psb = OracleReport::new("error-reduction gpsb");
    let mut bgm = OracleReport::new("error-reduction bgm (identity)");
    for t in 0..trials {
        let n = dim_for(t, 2, 8);
        let a = random_symmetric(n, &mut rng);
        let b = random_symmetric(n, &mut rng);
        let m = if t % 2 == 0 { DenseMatrix::identity(n) } else { random_spd_matrix(n, 0.1, 10.0, &mut rng) };
        let s = gaussian_vector(n, &mut rng);
        match oracle_error_reduction(&ReductionFamily::Gpsb { m }, &a, &b, &s) {
            Ok(o) => psb.record(o.holds, o.residual),
            Err(_) => psb.skip(),
        }
        let a = gaussian_matrix(n, n, &mut rng);
        let b = gaussian_matrix(n, n, &mut rng);
        let s = gaussian_vector(n, &mut rng);
        match oracle_error_reduction(&ReductionFamily::Bgm, &a, &b, &s) {
            Ok(o) => bgm.record(o.holds, o.residual),
            Err(_) => bgm.skip(),
        }
    }
    vec![psb, bgm]
}

/// SPD `B` with `B − A` semidefinite of one sign.
fn ordered_pair(a: &DenseMatrix, rng: &mut impl Rng) -> DenseMatrix {
    let n = a.nrows();
    let q = random_orthogonal(n, rng);
    let r = rng.random_range(1..=n);
    let (vals, _) = symmetric_eigen(a);
    let lmin = vals.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    if rng.random_bool(0.5) {
        let d: Vec<f64> = (0..r).map(|_| rng.random_range(0.01..10.0)).collect();
        a.add(&low_rank(&q, &d))
    } else {
        let d: Vec<f64> = (0..r).map(|_| -rng.random_range(0.01..0.9) * lmin).collect();
        a.add(&low_rank(&q, &d))
    }
}

/// Image-operator gain oracles for every family.
pub fn image_gain_suite(trials: usize, seed: u64) -> Vec<OracleReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gpsb = OracleReport::new("image-gain gpsb M^2(B-A)");
    let mut dfp_a = OracleReport::new("image-gain dfp A^-1(B-A)");
    let mut dfp_b = OracleReport::new("image-gain dfp B^-1(B-A) ordered");
    let mut dfp_free = OracleReport::new("image-gain dfp B^-1(B-A) unordered");
    dfp_free.informational = true;
    let mut bfgs_a = OracleReport::new("image-gain bfgs A(H-A^-1)");
    let mut bfgs_h = OracleReport::new("image-gain bfgs H^-1(H-A^-1) ordered");
    let mut bgm = OracleReport::new("image-gain bgm (B-A)^T");
    let mut bgm_cs = OracleReport::new("image-gain bgm (B-A)^T against ||(B-A)^T s||");
    let check = |report: &mut OracleReport, out: Result<GainOutcome, LabError>| match out {
        Ok(o) if o.status == OracleStatus::Checked => report.record(o.holds, shortfall(o.base, o.improved)),
        _ => report.skip(),
    };
    for t in 0..trials {
        let n = dim_for(t, 2, 8);
        let a = lab_spd(n, &mut rng);
        let s = gaussian_vector(n, &mut rng);
        let b_sym = random_symmetric(n, &mut rng);
        let m = random_spd_matrix(n, 0.1, 10.0, &mut rng);
        check(&mut gpsb, oracle_image_operator_gain(&ImageOperatorKind::Gpsb { m }, &a, &b_sym, &s));
        check(&mut dfp_a, oracle_image_operator_gain(&ImageOperatorKind::DfpHessian, &a, &b_sym, &s));
        let b_ord = ordered_pair(&a, &mut rng);
        check(&mut dfp_b, oracle_image_operator_gain(&ImageOperatorKind::DfpCurrent, &a, &b_ord, &s));
        let b_free = lab_spd(n, &mut rng);
        let e = b_free.sub(&a);
        if semidefinite_one_sign(&e) {
            dfp_free.skip();
        } else {
            let w = inverse(&b_free).map(|bi| bi.matmul(&e));
            match w {
                Ok(w) => {
                    let (_, a_isqrt) = sqrt_and_inverse_sqrt(&a);
                    let f = Functional { me: a_isqrt.matmul(&e), minv2: a.clone() };
                    let base = f.eval(&s);
                    let improved = f.eval(&w.matvec(&s));
                    dfp_free.record(improved >= base - INEQUALITY_SLACK * base.abs(), shortfall(base, improved));
                }
                Err(_) => dfp_free.skip(),
            }
        }
        let h_sym = random_symmetric(n, &mut rng);
        let y = gaussian_vector(n, &mut rng);
        check(&mut bfgs_a, oracle_image_operator_gain(&ImageOperatorKind::BfgsHessian, &a, &h_sym, &y));
        let a_inv = inverse(&a).map(|m| m.symmetric_part()).unwrap_or_else(|_| DenseMatrix::identity(n));
        let h_ord = ordered_pair(&a_inv, &mut rng);
        check(&mut bfgs_h, oracle_image_operator_gain(&ImageOperatorKind::BfgsCurrent, &a, &h_ord, &y));
        let a_gen = gaussian_matrix(n, n, &mut rng);
        let b_gen = gaussian_matrix(n, n, &mut rng);
        check(&mut bgm, oracle_image_operator_gain(&ImageOperatorKind::Bgm, &a_gen, &b_gen, &s));
        let (base, improved) = transpose_gain(&b_gen.sub(&a_gen), &s);
        bgm_cs.record(improved >= base - INEQUALITY_SLACK * base.abs(), shortfall(base, improved));
    }
    vec![gpsb, dfp_a, dfp_b, dfp_free, bfgs_a, bfgs_h, bgm, bgm_cs]
}

/// Projection-gain oracles, both onto the full kernel complement and onto
/// the complement of a proper subspace of the kernel, with the angle
/// identities.
pub fn projection_gain_suite(trials: usize, seed: u64) -> Vec<OracleReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names = ["gpsb", "dfp", "bfgs", "bgm"];
    let mut full: Vec<OracleReport> = names.iter().map(|f| OracleReport::new(format!("projection-gain {f} kernel"))).collect();
    let mut sub: Vec<OracleReport> = names.iter().map(|f| OracleReport::new(format!("projection-gain {f} subspace"))).collect();
    let mut identity = OracleReport::new("angle identity");
    for t in 0..trials {
        let n = dim_for(t, 3, 8);
        let r = rng.random_range(1..n - 1);
        let a = lab_spd(n, &mut rng);
        let m = random_spd_matrix(n, 0.1, 10.0, &mut rng);
        let s = gaussian_vector(n, &mut rng);
        for (i, name) in names.iter().enumerate() {
            let kc = if *name == "bgm" { general_with_kernel(n, r, &mut rng) } else { symmetric_with_kernel(n, r, &mut rng) };
            let (family, b) = match *name {
                "gpsb" => (ProjectionFamily::Gpsb { m: m.clone() }, a.add(&kc.e)),
                "dfp" => (ProjectionFamily::Dfp, a.add(&kc.e)),
                "bfgs" => {
                    let a_inv = inverse(&a).map(|x| x.symmetric_part()).unwrap_or_else(|_| DenseMatrix::identity(n));
                    (ProjectionFamily::Bfgs, a_inv.add(&kc.e))
                }
                _ => (ProjectionFamily::Bgm, a.add(&kc.e)),
            };
            let k = kc.kernel.ncols();
            let take = rng.random_range(1..k.max(2)).min(k);
            let subspace = DenseMatrix::from_columns(n, &(0..take).map(|j| kc.kernel.column(j)).collect::<Vec<_>>());
            for (report, basis) in [(&mut full[i], &kc.kernel), (&mut sub[i], &subspace)] {
                match oracle_projection_gain(&family, &a, &b, Some(basis), &s) {
                    Ok(o) if o.status == OracleStatus::Checked => {
                        report.record(o.holds, shortfall(o.base, o.improved));
                        identity.record(o.angle_identity_residual <= EQUALITY_TOL, o.angle_identity_residual);
                    }
                    _ => report.skip(),
                }
            }
        }
    }
    let mut out = full;
    out.extend(sub);
    out.push(identity);
    out
}

/// Lemma identifiers for [`oracle_lemmas`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Lemma {
    /// `‖PCP‖_F² ≤ ‖C‖_F² − ‖Cs‖²/‖s‖²` with `P = I − ssᵀ/sᵀs`.
    ProjectedFrobenius,
    /// `l(Bu) ≥ l(u)` with `l(u) = uᵀB²u/uᵀu`.
    RayleighGrowth,
    /// `‖(L⁻¹−I)(I−L)u‖²/‖(I−L)u‖² ≥ ‖(L⁻¹−I)u‖²/‖u‖²` for `L ⪰ I` or `L ⪯ I`.
    OrderedInverse,
    /// The generalized PSB update is the least change in `‖·‖_{M,F}`.
    LeastChangeDirect,
    /// The dual update is the least change for `H`.
    LeastChangeInverse,
}

impl Lemma {
    pub const ALL: [Lemma; 5] = [
        Lemma::ProjectedFrobenius,
        Lemma::RayleighGrowth,
        Lemma::OrderedInverse,
        Lemma::LeastChangeDirect,
        Lemma::LeastChangeInverse,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Lemma::ProjectedFrobenius => "lemma projected-frobenius",
            Lemma::RayleighGrowth => "lemma rayleigh-growth l(Bu)>=l(u)",
            Lemma::OrderedInverse => "lemma ordered (L^-1-I)(I-L)",
            Lemma::LeastChangeDirect => "least-change gpsb direct",
            Lemma::LeastChangeInverse => "least-change gpsb inverse",
        }
    }
}

/// Number of random feasible competitors per least-change trial.
pub const LEAST_CHANGE_COMPETITORS: usize = 100;

/// `l(u) = uᵀB²u / uᵀu`.
pub fn rayleigh_l(b: &DenseMatrix, u: &[f64]) -> f64 {
    let bu = b.matvec(u);
    dot(&bu, &bu) / dot(u, u)
}

/// Projected-Frobenius quantities `(‖D‖_F², ‖C‖_F² − ‖Cs‖²/‖s‖²)`.
pub fn projected_frobenius(c: &DenseMatrix, s: &[f64]) -> (f64, f64) {
    let n = s.len();
    let ss = dot(s, s);
    let mut p = DenseMatrix::identity(n);
    p.rank_one_update(-1.0 / ss, s, s);
    let d = p.matmul(c).matmul(&p);
    let cs = c.matvec(s);
    (d.frobenius_norm().powi(2), c.frobenius_norm().powi(2) - dot(&cs, &cs) / ss)
}

/// `(lhs, rhs)` of the ordered-inverse lemma.
pub fn ordered_inverse_sides(l: &DenseMatrix, u: &[f64]) -> Result<(f64, f64), LinalgError> {
    let n = u.len();
    let k = inverse(l)?.sub(&DenseMatrix::identity(n));
    let iu: DenseVector = u.iter().zip(l.matvec(u)).map(|(a, b)| a - b).collect();
    let kiu = k.matvec(&iu);
    let ku = k.matvec(u);
    Ok((dot(&kiu, &kiu) / dot(&iu, &iu), dot(&ku, &ku) / dot(u, u)))
}

fn least_change_trial(n: usize, dual: bool, rng: &mut impl Rng) -> (bool, f64) {
    let b = random_symmetric(n, rng);
    let m = random_spd_matrix(n, 0.1, 10.0, rng);
    let m_inv = match inverse(&m) {
        Ok(x) => x,
        Err(_) => return (true, 0.0),
    };
    let minv2 = InnerProductWeight::Matrix(m_inv.matmul(&m_inv).symmetric_part());
    let s = gaussian_vector(n, rng);
    let y = gaussian_vector(n, rng);
    let pair = SecantPair::raw(s.clone(), y.clone());
    let (plus, anchor) = if dual {
        (gpsb_inverse_update(&b, &pair, &minv2), y)
    } else {
        (gpsb_update(&b, &pair, &minv2), s)
    };
    let Ok(plus) = plus else { return (false, f64::INFINITY) };
    let dist = |c: &DenseMatrix| m.matmul(&c.sub(&b)).matmul(&m).frobenius_norm();
    let best = dist(&plus);
    let mut p = DenseMatrix::identity(n);
    p.rank_one_update(-1.0 / dot(&anchor, &anchor), &anchor, &anchor);
    let mut ok = true;
    let mut worst = 0.0_f64;
    for _ in 0..LEAST_CHANGE_COMPETITORS {
        let scale = 10f64.powf(rng.random_range(-3.0..1.0));
        let r = random_symmetric(n, rng).scale(scale);
        let c = plus.add(&p.matmul(&r).matmul(&p));
        let d = dist(&c);
        let short = (best - d).max(0.0) / best.max(f64::MIN_POSITIVE);
        worst = worst.max(short);
        if best > d + INEQUALITY_SLACK * best.max(d) {
            ok = false;
        }
    }
    (ok, worst)
}

/// Checks one lemma over `trials` seeded instances (dimensions 2–8).
pub fn oracle_lemmas(which: Lemma, trials: usize, seed: u64) -> OracleReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = OracleReport::new(which.name());
    for t in 0..trials {
        let n = dim_for(t, 2, 8);
        match which {
            Lemma::ProjectedFrobenius => {
                let c = random_symmetric(n, &mut rng);
                let s = gaussian_vector(n, &mut rng);
                let (lhs, rhs) = projected_frobenius(&c, &s);
                let scale = c.frobenius_norm().powi(2);
                let res = (lhs - rhs).max(0.0) / scale.max(f64::MIN_POSITIVE);
                report.record(res <= INEQUALITY_SLACK, res);
            }
            Lemma::RayleighGrowth => {
                let b = random_symmetric(n, &mut rng);
                let u = gaussian_vector(n, &mut rng);
                let lu = rayleigh_l(&b, &u);
                let lbu = rayleigh_l(&b, &b.matvec(&u));
                report.record(lbu >= lu - INEQUALITY_SLACK * lu, shortfall(lu, lbu));
            }
            Lemma::OrderedInverse => {
                let q = random_orthogonal(n, &mut rng);
                let above = rng.random_bool(0.5);
                let d: Vec<f64> =
                    (0..n).map(|_| if above { rng.random_range(1.0..10.0) } else { rng.random_range(0.1..1.0) }).collect();
                let l = low_rank(&q, &d);
                let u = gaussian_vector(n, &mut rng);
                match ordered_inverse_sides(&l, &u) {
                    Ok((lhs, rhs)) => report.record(lhs >= rhs - INEQUALITY_SLACK * rhs, shortfall(rhs, lhs)),
                    Err(_) => report.skip(),
                }
            }
            Lemma::LeastChangeDirect | Lemma::LeastChangeInverse => {
                let (ok, res) = least_change_trial(n, which == Lemma::LeastChangeInverse, &mut rng);
                report.record(ok, res);
            }
        }
    }
    report
}

pub fn lemma_suite(trials: usize, seed: u64) -> Vec<OracleReport> {
    Lemma::ALL.iter().enumerate().map(|(i, l)| oracle_lemmas(*l, trials, seed.wrapping_add(i as u64))).collect()
}

/// Rules exercised by the termination suite.
pub fn termination_rules() -> Vec<(&'static str, UpdateRule)> {
    vec![
        ("bfgs", UpdateRule::bfgs()),
        ("dfp", UpdateRule::dfp()),
        ("psb", UpdateRule::psb()),
        ("bgm", UpdateRule::bgm()),
    ]
}

/// Finite termination with image-operator and orthogonalized directions:
/// `‖B_n − A‖_F ≤ 1e-8 ‖A‖_F` within `n` updates.
pub fn termination_suite(instances: usize, seed: u64) -> Vec<OracleReport> {
    let mut out = Vec::new();
    for (name, rule) in termination_rules() {
        for source in ["image", "orthogonalized"] {
            let mut report = OracleReport::new(format!("termination {name} {source}"));
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for t in 0..instances {
                let n = dim_for(t, 2, 10);
                let a = lab_spd(n, &mut rng);
                let b0 = if name == "bgm" {
                    DenseMatrix::identity(n).add(&gaussian_matrix(n, n, &mut rng).scale(0.3))
                } else {
                    DenseMatrix::identity(n)
                };
                let dir_seed = rng.random::<u64>();
                let direction_source = if source == "image" {
                    DirectionSource::ImageOperator { seed: dir_seed }
                } else {
                    DirectionSource::Orthogonalized { seed: Some(dir_seed) }
                };
                let config = ProcessConfig { a: a.clone(), b0, rule: rule.clone(), direction_source, max_steps: n, m: None };
                match run_process(&config) {
                    Ok(trace) => {
                        let rel = trace.final_error() / a.frobenius_norm();
                        report.record(rel <= 1e-8 && trace.updates() <= n, rel);
                    }
                    Err(_) => report.record(false, f64::INFINITY),
                }
            }
            out.push(report);
        }
    }
    out
}

/// Span inclusion for orthogonalized directions: after `k < n` updates,
/// `‖(B_k − A)s_j‖ ≤ 1e-8 ‖B_k − A‖_F ‖s_j‖` for every `j < k`.
pub fn span_inclusion_suite(instances: usize, seed: u64) -> OracleReport {
    let mut report = OracleReport::new("span inclusion orthogonalized");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for t in 0..instances {
        let n = dim_for(t, 2, 10);
        let a = lab_spd(n, &mut rng);
        for (name, rule) in termination_rules() {
            let b0 = if name == "bgm" {
                DenseMatrix::identity(n).add(&gaussian_matrix(n, n, &mut rng).scale(0.3))
            } else {
                DenseMatrix::identity(n)
            };
            let config = ProcessConfig {
                a: a.clone(),
                b0,
                rule,
                direction_source: DirectionSource::Orthogonalized { seed: Some(rng.random()) },
                max_steps: n,
                m: None,
            };
            let Ok(trace) = run_process(&config) else {
                report.record(false, f64::INFINITY);
                continue;
            };
            let mut worst = 0.0_f64;
            for k in 1..trace.steps.len().min(n) {
                let e = trace.steps[k].b.sub(&a);
                let en = e.frobenius_norm();
                if en <= TERMINATION_TOL * a.frobenius_norm() {
                    continue;
                }
                for j in 0..k {
                    let sj = trace.steps[j].direction.as_ref().expect("direction recorded");
                    worst = worst.max(norm2(&e.matvec(sj)) / (en * norm2(sj)));
                }
            }
            report.record(worst <= 1e-8, worst);
        }
    }
    report
}

/// Kernel monotonicity along image-operator and random traces, over a ×10
/// tolerance sweep.
pub fn kernel_monotonicity_suite(instances: usize, seed: u64) -> OracleReport {
    let mut report = OracleReport::new("kernel monotonicity");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for t in 0..instances {
        let n = dim_for(t, 2, 8);
        let a = lab_spd(n, &mut rng);
        for (_, rule) in termination_rules().into_iter().filter(|(name, _)| *name != "bgm") {
            for source in [DirectionSource::ImageOperator { seed: rng.random() }, DirectionSource::Random { seed: rng.random() }] {
                let config =
                    ProcessConfig { a: a.clone(), b0: DenseMatrix::identity(n), rule: rule.clone(), direction_source: source, max_steps: n, m: None };
                let Ok(trace) = run_process(&config) else {
                    report.record(false, f64::INFINITY);
                    continue;
                };
                let w = family_weight(&rule, &a);
                let ok = [1e-7, 1e-8, 1e-9].iter().all(|&tol| check_kernel_growth(&trace, tol, &w).monotone());
                report.record(ok, 0.0);
            }
        }
    }
    report
}

/// `Im(W⁻¹Eᵀ)` is the `W`-orthogonal complement of `ker E`.
pub fn image_space_suite(trials: usize, seed: u64) -> OracleReport {
    let mut report = OracleReport::new("image-space characterization");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for t in 0..trials {
        let n = dim_for(t, 2, 8);
        let r = rng.random_range(1..=n);
        let e = general_with_kernel(n, r, &mut rng).e;
        let w = lab_spd(n, &mut rng);
        let Ok(w_inv) = inverse(&w) else {
            report.skip();
            continue;
        };
        let img = w_inv.matmul(&e.transpose());
        let kernel = crate::linalg::kernel_basis(&e, crate::linalg::DEFAULT_KERNEL_TOL);
        let weight = InnerProductWeight::Matrix(w.clone());
        let mut worst = 0.0_f64;
        for ic in img.columns() {
            for kc in kernel.columns() {
                let denom = weight.norm(&ic) * weight.norm(&kc);
                if denom > 0.0 {
                    worst = worst.max(weight.inner(&ic, &kc).abs() / denom);
                }
            }
        }
        let rank = n - kernel_dimension(&img, crate::linalg::DEFAULT_KERNEL_TOL * singular_values(&img).iter().fold(0.0_f64, |m, &v| m.max(v)));
        report.record(worst <= 1e-9 && rank + kernel.ncols() == n, worst);
    }
    report
}

/// Every lab suite with the default sizes: 100 termination instances and
/// `trials` trials for each inequality.
pub fn run_all(trials: usize, seed: u64) -> Vec<OracleReport> {
    let mut out = termination_suite(100, seed);
    out.push(span_inclusion_suite(100, seed.wrapping_add(1)));
    out.push(kernel_monotonicity_suite(100, seed.wrapping_add(2)));
    out.push(image_space_suite(trials, seed.wrapping_add(3)));
    out.extend(error_reduction_suite(trials, seed.wrapping_add(4)));
    out.extend(image_gain_suite(trials, seed.wrapping_add(5)));
    out.extend(projection_gain_suite(trials, seed.wrapping_add(6)));
    out.extend(lemma_suite(trials, seed.wrapping_add(7)));
    out
}

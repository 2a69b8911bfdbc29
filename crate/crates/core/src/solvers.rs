//! Iteration drivers: dense quasi-Newton minimization (with image-operator,
//! Gram–Schmidt and projection modes), L-BFGS, and nonlinear-system solvers.

use thiserror::Error;

use crate::linalg::{
    angle_to_subspace, dot, inverse, kernel_basis, norm2, solve_general, solve_symmetric, DenseMatrix, DenseVector,
    InnerProductWeight, LinalgError, DEFAULT_KERNEL_TOL,
};
use crate::operators::{
    accept_image_pair, image_direction_broyden, image_direction_gpsb, secondary_secant, FallbackReason, OperatorMode,
    PairTransformer, Transformed,
};
use crate::problems::{NonlinearSystem, SmoothProblem};
use crate::updates::{LbfgsMemory, SecantPair, UpdateError, UpdateForm, UpdateRule};

/// Maximum number of step reductions in a backtracking search.
pub const MAX_BACKTRACKS: usize = 60;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Initial matrix `B₀`.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialMatrix {
    ScaledIdentity(f64),
    Explicit(DenseMatrix),
}

impl InitialMatrix {
    pub fn matrix(&self, n: usize) -> DenseMatrix {
        match self {
            InitialMatrix::ScaledIdentity(l) => DenseMatrix::scaled_identity(n, *l),
            InitialMatrix::Explicit(m) => m.clone(),
        }
    }

    pub fn inverse(&self, n: usize) -> Result<DenseMatrix, LinalgError> {
        match self {
            InitialMatrix::ScaledIdentity(l) => Ok(DenseMatrix::scaled_identity(n, 1.0 / l)),
            InitialMatrix::Explicit(m) => inverse(m),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    Unit,
    /// Armijo backtracking `α ∈ {1, shrink, shrink², …}`.
    Backtracking { c1: f64, shrink: f64 },
}

impl StepRule {
    pub fn armijo() -> Self {
        StepRule::Backtracking { c1: 1e-4, shrink: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StoppingRule {
    /// `‖g_k‖ ≤ eps`, or `‖g_k‖ ≤ eps · ‖g₀‖` when `relative`.
    GradNorm { eps: f64, relative: bool },
    /// `‖x_k − x⋆‖ ≤ eps_rel · ‖x₀ − x⋆‖`.
    IterateError { x_star: DenseVector, eps_rel: f64 },
    /// `‖F(x_k)‖ ≤ eps`.
    ResidualNorm { eps: f64 },
}

impl StoppingRule {
    fn validate(&self) -> Result<(), SolverError> {
        let eps = match self {
            StoppingRule::GradNorm { eps, .. } | StoppingRule::ResidualNorm { eps } => *eps,
            StoppingRule::IterateError { eps_rel, .. } => *eps_rel,
        };
        if eps > 0.0 {
            Ok(())
        } else {
            Err(SolverError::InvalidConfig(format!("stopping tolerance {eps} must be positive")))
        }
    }
}

struct StopTest {
    rule: StoppingRule,
    scale: f64,
}

impl StopTest {
    fn new(rule: &StoppingRule, x0: &[f64], g0: &[f64]) -> Self {
        let scale = match rule {
            StoppingRule::GradNorm { relative: true, .. } => norm2(g0),
            StoppingRule::IterateError { x_star, .. } => norm2(&crate::linalg::sub(x0, x_star)),
            _ => 1.0,
        };
        Self { rule: rule.clone(), scale }
    }

    fn met(&self, x: &[f64], g: &[f64]) -> bool {
        match &self.rule {
            StoppingRule::GradNorm { eps, .. } | StoppingRule::ResidualNorm { eps } => norm2(g) <= eps * self.scale,
            StoppingRule::IterateError { x_star, eps_rel } => {
                norm2(&crate::linalg::sub(x, x_star)) <= eps_rel * self.scale
            }
        }
    }
}

/// Solver settings shared by all drivers.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub rule: UpdateRule,
    pub mode: OperatorMode,
    /// L-BFGS memory `N`.
    pub memory: usize,
    pub step_rule: StepRule,
    pub stop: StoppingRule,
    pub max_iters: usize,
    pub b0: InitialMatrix,
    /// Overrides the problem's starting point.
    pub x0: Option<DenseVector>,
    /// Reference matrix `A` for the `‖B_k − A‖_F` column of the trace.
    pub reference: Option<DenseMatrix>,
    /// Record the angle of `s_k` to `ker(B_k − A)` (requires `reference`).
    pub record_angles: bool,
    pub kernel_tol: f64,
    /// Keep iterates, steps and pairs in the trace.
    pub keep_vectors: bool,
}

impl SolverConfig {
    pub fn new(rule: UpdateRule, stop: StoppingRule) -> Self {
        Self {
            rule,
            mode: OperatorMode::None,
            memory: 10,
            step_rule: StepRule::Unit,
            stop,
            max_iters: 100_000,
            b0: InitialMatrix::ScaledIdentity(1.0),
            x0: None,
            reference: None,
            record_angles: false,
            kernel_tol: DEFAULT_KERNEL_TOL,
            keep_vectors: false,
        }
    }

    pub fn with_mode(mut self, mode: OperatorMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_b0(mut self, b0: InitialMatrix) -> Self {
        self.b0 = b0;
        self
    }

    pub fn with_memory(mut self, n: usize) -> Self {
        self.memory = n;
        self
    }

    pub fn with_step_rule(mut self, rule: StepRule) -> Self {
        self.step_rule = rule;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_x0(mut self, x0: DenseVector) -> Self {
        self.x0 = Some(x0);
        self
    }

    pub fn with_reference(mut self, a: DenseMatrix) -> Self {
        self.reference = Some(a);
        self
    }

    pub fn with_angles(mut self) -> Self {
        self.record_angles = true;
        self
    }

    pub fn with_vectors(mut self) -> Self {
        self.keep_vectors = true;
        self
    }

    fn validate(&self, n: usize) -> Result<(), SolverError> {
        if self.max_iters == 0 {
            return Err(SolverError::InvalidConfig("max_iters must be positive".into()));
        }
        match &self.b0 {
            InitialMatrix::ScaledIdentity(l) if !(*l > 0.0) => {
                return Err(SolverError::InvalidConfig(format!("λ = {l} must be positive")));
            }
            InitialMatrix::Explicit(m) if m.nrows() != n || !m.is_square() => {
                return Err(SolverError::InvalidConfig("B₀ has the wrong shape".into()));
            }
            _ => {}
        }
        if let Some(a) = &self.reference {
            if a.nrows() != n || !a.is_square() {
                return Err(SolverError::InvalidConfig("reference matrix has the wrong shape".into()));
            }
        }
        if self.record_angles && self.reference.is_none() {
            return Err(SolverError::InvalidConfig("angles need a reference matrix".into()));
        }
        if let Some(x0) = &self.x0 {
            if x0.len() != n {
                return Err(SolverError::InvalidConfig("x₀ has the wrong length".into()));
            }
        }
        self.stop.validate()?;
        self.mode.validate(n).map_err(SolverError::InvalidConfig)
    }
}

/// Something that happened during one iteration.
#[derive(Debug, Clone, PartialEq)]
pub enum TraceEvent {
    /// The transformed pair was replaced by the raw pair.
    Fallback(FallbackReason),
    /// The update formula rejected the pair; the matrix was kept.
    UpdateSkipped(UpdateError),
    /// L-BFGS did not store the pair (curvature).
    PairRejected,
    /// Backtracking hit its limit.
    LineSearchExhausted,
    /// `−B⁻¹g` was not a descent direction; the step used `−g`.
    NonDescent,
}

/// One record per iterate `x_k`; the step fields describe the move to
/// `x_{k+1}` and are empty on the final record.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub x: Option<DenseVector>,
    pub grad_norm: f64,
    pub step: Option<DenseVector>,
    pub alpha: Option<f64>,
    pub pair: Option<SecantPair>,
    pub matrix_error: Option<f64>,
    pub angle: Option<f64>,
    pub events: Vec<TraceEvent>,
}

impl IterationRecord {
    fn new(k: usize, x: &[f64], grad_norm: f64, keep: bool) -> Self {
        Self {
            k,
            x: keep.then(|| x.to_vec()),
            grad_norm,
            step: None,
            alpha: None,
            pair: None,
            matrix_error: None,
            angle: None,
            events: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolverStatus {
    Converged,
    MaxIters,
    Breakdown(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
    pub status: SolverStatus,
    pub x_final: DenseVector,
    /// The maintained matrix at exit (`B` or `H`, per the rule's form).
    pub final_matrix: Option<DenseMatrix>,
}

impl IterationTrace {
    /// Number of steps taken.
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn converged(&self) -> bool {
        self.status == SolverStatus::Converged
    }

    pub fn fallback_count(&self) -> usize {
        self.records
            .iter()
            .flat_map(|r| &r.events)
            .filter(|e| matches!(e, TraceEvent::Fallback(_)))
            .count()
    }

    pub fn angles(&self) -> Vec<f64> {
        self.records.iter().filter_map(|r| r.angle).collect()
    }

    pub fn mean_angle(&self) -> Option<f64> {
        let a = self.angles();
        (!a.is_empty()).then(|| a.iter().sum::<f64>() / a.len() as f64)
    }
}

/// Result of a line search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearch {
    pub alpha: f64,
    pub exhausted: bool,
}

/// Step length along `p` from `x` (where `f(x) = fx` and `∇f(x) = g`).
pub fn line_search<F>(f: F, x: &[f64], fx: f64, g: &[f64], p: &[f64], rule: StepRule) -> LineSearch
where
    F: Fn(&[f64]) -> f64,
{
    match rule {
        StepRule::Unit => LineSearch { alpha: 1.0, exhausted: false },
        StepRule::Backtracking { c1, shrink } => backtrack(&f, x, fx, dot(g, p), p, c1, shrink),
    }
}

fn backtrack<F>(f: &F, x: &[f64], fx: f64, slope: f64, p: &[f64], c1: f64, shrink: f64) -> LineSearch
where
    F: Fn(&[f64]) -> f64,
{
    let mut alpha = 1.0;
    let mut trial = vec![0.0; x.len()];
    for _ in 0..=MAX_BACKTRACKS {
        for i in 0..x.len() {
            trial[i] = x[i] + alpha * p[i];
        }
        if f(&trial) <= fx + c1 * alpha * slope {
            return LineSearch { alpha, exhausted: false };
        }
        alpha *= shrink;
    }
    LineSearch { alpha: alpha / shrink, exhausted: true }
}

fn step_to(x: &[f64], p: &[f64], alpha: f64) -> DenseVector {
    if alpha == 1.0 {
        x.iter().zip(p).map(|(a, b)| a + b).collect()
    } else {
        x.iter().zip(p).map(|(a, b)| a + alpha * b).collect()
    }
}

fn diff(a: &[f64], b: &[f64]) -> DenseVector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `M²` from the rule's `M⁻²` weight.
fn image_weight(rule: &UpdateRule) -> Result<InnerProductWeight, SolverError> {
    match rule {
        UpdateRule::GeneralizedPsb { minv2: InnerProductWeight::Matrix(w), .. } => {
            Ok(InnerProductWeight::Matrix(inverse(w)?.symmetric_part()))
        }
        _ => Ok(InnerProductWeight::Identity),
    }
}

/// The maintained matrix and how to solve with it.
struct DenseModel {
    form: UpdateForm,
    symmetric: bool,
    m: DenseMatrix,
}

impl DenseModel {
    /// `B⁻¹ r` (direct form) or `H r` (inverse form).
    fn apply_inverse(&self, r: &[f64]) -> Result<DenseVector, LinalgError> {
        match self.form {
            UpdateForm::Inverse => Ok(self.m.matvec(r)),
            UpdateForm::Direct if self.symmetric => solve_symmetric(&self.m, r),
            UpdateForm::Direct => solve_general(&self.m, r),
        }
    }

    fn direct(&self) -> Result<DenseMatrix, LinalgError> {
        match self.form {
            UpdateForm::Direct => Ok(self.m.clone()),
            UpdateForm::Inverse => inverse(&self.m),
        }
    }
}

fn annotate_reference(rec: &mut IterationRecord, model: &DenseModel, config: &SolverConfig) {
    if let Some(a) = &config.reference {
        if let Ok(b) = model.direct() {
            rec.matrix_error = Some(b.sub(a).frobenius_norm());
        }
    }
}

fn kernel_angle(model: &DenseModel, a: &DenseMatrix, s: &[f64], tol: f64) -> Option<f64> {
    let e = model.direct().ok()?.sub(a);
    let basis = kernel_basis(&e, tol);
    angle_to_subspace(s, &basis, &InnerProductWeight::Identity).ok()
}

/// Dense quasi-Newton minimization: textbook method, image-operator mode,
/// Gram–Schmidt mode or normal-equations projection mode per `config.mode`.
pub fn minimize(problem: &SmoothProblem, config: &SolverConfig) -> Result<IterationTrace, SolverError> {
    let n = problem.n;
    config.validate(n)?;
    let mut model = DenseModel {
        form: config.rule.form(),
        symmetric: config.rule.is_symmetric(),
        m: match config.rule.form() {
            UpdateForm::Direct => config.b0.matrix(n),
            UpdateForm::Inverse => config.b0.inverse(n)?,
        },
    };
    let m2 = image_weight(&config.rule)?;
    let mut transformer = PairTransformer::new(&config.mode);
    let mut x = config.x0.clone().unwrap_or_else(|| problem.x0.clone());
    let mut g = problem.grad(&x);
    let mut fx = if matches!(config.step_rule, StepRule::Backtracking { .. }) { problem.value(&x) } else { f64::NAN };
    let stop = StopTest::new(&config.stop, &x, &g);
    let mut records = Vec::new();
    let status = loop {
        let k = records.len();
        let mut rec = IterationRecord::new(k, &x, norm2(&g), config.keep_vectors);
        annotate_reference(&mut rec, &model, config);
        if stop.met(&x, &g) {
            records.push(rec);
            break SolverStatus::Converged;
        }
        if k >= config.max_iters {
            records.push(rec);
            break SolverStatus::MaxIters;
        }
        let mut p: DenseVector = match model.apply_inverse(&g) {
            Ok(d) => d.into_iter().map(|v| -v).collect(),
            Err(e) => {
                records.push(rec);
                break SolverStatus::Breakdown(format!("direction solve failed: {e}"));
            }
        };
        let steepest = matches!(config.step_rule, StepRule::Backtracking { .. }) && !(dot(&g, &p) < 0.0);
        if steepest {
            p = g.iter().map(|v| -v).collect();
            rec.events.push(TraceEvent::NonDescent);
        }
        let ls = line_search(|z| problem.value(z), &x, fx, &g, &p, config.step_rule);
        if ls.exhausted {
            rec.events.push(TraceEvent::LineSearchExhausted);
        }
        let xn = step_to(&x, &p, ls.alpha);
        let gn = problem.grad(&xn);
        let s = diff(&xn, &x);
        let y = diff(&gn, &g);
        if config.record_angles {
            if let Some(a) = &config.reference {
                rec.angle = kernel_angle(&model, a, &s, config.kernel_tol);
            }
        }
        let transformed = match &config.mode {
            OperatorMode::Image(_) if steepest => accept_image_pair(&s, &y, Vec::new(), Vec::new()),
            OperatorMode::Image(t_rule) => {
                let u = match &config.rule {
                    UpdateRule::GeneralizedPsb { form: UpdateForm::Direct, .. } => {
                        Ok(image_direction_gpsb(&m2, ls.alpha, &g, &gn))
                    }
                    _ => image_direction_broyden(|r| model.apply_inverse(r), &s, &y),
                };
                match u {
                    Ok(u) if norm2(&u) > 0.0 => {
                        let t = t_rule.resolve(&s, &u);
                        let v = secondary_secant(|z| problem.grad(z), &xn, &gn, &u, t);
                        accept_image_pair(&s, &y, u, v)
                    }
                    Ok(u) => accept_image_pair(&s, &y, u, Vec::new()),
                    Err(e) => {
                        records.push(rec);
                        break SolverStatus::Breakdown(format!("image solve failed: {e}"));
                    }
                }
            }
            _ => transformer.transform(&s, &y),
        };
        let Transformed { pair, fallback } = transformed;
        if let Some(reason) = fallback {
            rec.events.push(TraceEvent::Fallback(reason));
        }
        match config.rule.apply(&model.m, &pair) {
            Ok(m) => model.m = m,
            Err(e) => rec.events.push(TraceEvent::UpdateSkipped(e)),
        }
        if !model.m.is_finite() {
            records.push(rec);
            break SolverStatus::Breakdown("non-finite matrix after update".into());
        }
        rec.alpha = Some(ls.alpha);
        if config.keep_vectors {
            rec.step = Some(s);
            rec.pair = Some(pair);
        }
        records.push(rec);
        x = xn;
        g = gn;
        if matches!(config.step_rule, StepRule::Backtracking { .. }) {
            fx = problem.value(&x);
        }
    };
    Ok(IterationTrace { records, status, x_final: x, final_matrix: Some(model.m) })
}

/// Limited-memory BFGS with the same operator modes; `B₀ = λI` seeds the
/// two-loop recursion with `H₀ = I/λ`.
pub fn minimize_lbfgs(problem: &SmoothProblem, config: &SolverConfig) -> Result<IterationTrace, SolverError> {
    let n = problem.n;
    config.validate(n)?;
    if config.memory == 0 {
        return Err(SolverError::InvalidConfig("L-BFGS memory must be at least 1".into()));
    }
    if let Some(d) = config.mode.window() {
        if d + 1 > config.memory {
            return Err(SolverError::InvalidConfig(format!("window d = {d} exceeds N − 1 = {}", config.memory - 1)));
        }
    }
    let h0 = match config.b0 {
        InitialMatrix::ScaledIdentity(l) => 1.0 / l,
        InitialMatrix::Explicit(_) => {
            return Err(SolverError::InvalidConfig("L-BFGS needs B₀ = λI".into()));
        }
    };
    let mut memory = LbfgsMemory::new(config.memory);
    let mut transformer = PairTransformer::new(&config.mode);
    let mut x = config.x0.clone().unwrap_or_else(|| problem.x0.clone());
    let mut g = problem.grad(&x);
    let mut fx = if matches!(config.step_rule, StepRule::Backtracking { .. }) { problem.value(&x) } else { f64::NAN };
    let stop = StopTest::new(&config.stop, &x, &g);
    let mut records = Vec::new();
    let status = loop {
        let k = records.len();
        let mut rec = IterationRecord::new(k, &x, norm2(&g), config.keep_vectors);
        if stop.met(&x, &g) {
            records.push(rec);
            break SolverStatus::Converged;
        }
        if k >= config.max_iters {
            records.push(rec);
            break SolverStatus::MaxIters;
        }
        let p: DenseVector = memory.apply(&g, h0).into_iter().map(|v| -v).collect();
        let ls = line_search(|z| problem.value(z), &x, fx, &g, &p, config.step_rule);
        if ls.exhausted {
            rec.events.push(TraceEvent::LineSearchExhausted);
        }
        let xn = step_to(&x, &p, ls.alpha);
        let gn = problem.grad(&xn);
        let s = diff(&xn, &x);
        let y = diff(&gn, &g);
        let Transformed { pair, fallback } = match &config.mode {
            OperatorMode::Image(t_rule) => {
                let hy = memory.apply(&y, h0);
                let u = diff(&s, &hy);
                if norm2(&u) > 0.0 {
                    let t = t_rule.resolve(&s, &u);
                    let v = secondary_secant(|z| problem.grad(z), &xn, &gn, &u, t);
                    accept_image_pair(&s, &y, u, v)
                } else {
                    accept_image_pair(&s, &y, u, Vec::new())
                }
            }
            _ => transformer.transform(&s, &y),
        };
        if let Some(reason) = fallback {
            rec.events.push(TraceEvent::Fallback(reason));
        }
        if memory.push(pair.clone()).is_err() {
            rec.events.push(TraceEvent::PairRejected);
        }
        rec.alpha = Some(ls.alpha);
        if config.keep_vectors {
            rec.step = Some(s);
            rec.pair = Some(pair);
        }
        records.push(rec);
        x = xn;
        g = gn;
        if matches!(config.step_rule, StepRule::Backtracking { .. }) {
            fx = problem.value(&x);
        }
    };
    Ok(IterationTrace { records, status, x_final: x, final_matrix: None })
}

/// How a nonlinear system is solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SystemMethod {
    /// Newton's method with the analytic Jacobian.
    Newton,
    /// Secant method driven by `config.rule` and `config.mode`.
    QuasiNewton,
}

/// Solves `F(x) = 0`. Backtracking, when requested, enforces
/// `‖F(x + αp)‖² ≤ (1 − 2c₁α) ‖F(x)‖²`.
pub fn solve_system(
    system: &NonlinearSystem,
    method: SystemMethod,
    config: &SolverConfig,
) -> Result<IterationTrace, SolverError> {
    let n = system.n;
    config.validate(n)?;
    if method == SystemMethod::Newton && system.jacobian.is_none() {
        return Err(SolverError::InvalidConfig("Newton's method needs an analytic Jacobian".into()));
    }
    let mut model = DenseModel {
        form: config.rule.form(),
        symmetric: config.rule.is_symmetric(),
        m: match config.rule.form() {
            UpdateForm::Direct => config.b0.matrix(n),
            UpdateForm::Inverse => config.b0.inverse(n)?,
        },
    };
    let mut transformer = PairTransformer::new(&config.mode);
    let mut x = config.x0.clone().unwrap_or_else(|| system.x0.clone());
    let mut fx = system.eval(&x);
    let stop = StopTest::new(&config.stop, &x, &fx);
    let merit = |z: &[f64]| {
        let f = system.eval(z);
        0.5 * dot(&f, &f)
    };
    let mut records = Vec::new();
    let status = loop {
        let k = records.len();
        let mut rec = IterationRecord::new(k, &x, norm2(&fx), config.keep_vectors);
        if stop.met(&x, &fx) {
            records.push(rec);
            break SolverStatus::Converged;
        }
        if k >= config.max_iters {
            records.push(rec);
            break SolverStatus::MaxIters;
        }
        let dir = match method {
            SystemMethod::Newton => {
                let j = system.jacobian_at(&x).expect("checked above");
                solve_general(&j, &fx)
            }
            SystemMethod::QuasiNewton => model.apply_inverse(&fx),
        };
        let p: DenseVector = match dir {
            Ok(d) => d.into_iter().map(|v| -v).collect(),
            Err(e) => {
                records.push(rec);
                break SolverStatus::Breakdown(format!("singular system matrix: {e}"));
            }
        };
        // With gᵀp = −‖F‖² the Armijo test on ½‖F‖² is the stated decrease.
        let phi = 0.5 * dot(&fx, &fx);
        let slope = -2.0 * phi;
        let ls = match config.step_rule {
            StepRule::Unit => LineSearch { alpha: 1.0, exhausted: false },
            StepRule::Backtracking { c1, shrink } => backtrack(&merit, &x, phi, slope, &p, c1, shrink),
        };
        if ls.exhausted {
            rec.events.push(TraceEvent::LineSearchExhausted);
        }
        let xn = step_to(&x, &p, ls.alpha);
        let fnext = system.eval(&xn);
        if method == SystemMethod::QuasiNewton {
            let s = diff(&xn, &x);
            let y = diff(&fnext, &fx);
            let Transformed { pair, fallback } = transformer.transform(&s, &y);
            if let Some(reason) = fallback {
                rec.events.push(TraceEvent::Fallback(reason));
            }
            match config.rule.apply(&model.m, &pair) {
                Ok(m) => model.m = m,
                Err(e) => rec.events.push(TraceEvent::UpdateSkipped(e)),
            }
            if config.keep_vectors {
                rec.step = Some(s);
                rec.pair = Some(pair);
            }
        } else if config.keep_vectors {
            rec.step = Some(diff(&xn, &x));
        }
        rec.alpha = Some(ls.alpha);
        records.push(rec);
        if xn.iter().chain(&fnext).any(|v| !v.is_finite()) {
            x = xn;
            break SolverStatus::Breakdown("non-finite iterate".into());
        }
        x = xn;
        fx = fnext;
    };
    let final_matrix = (method == SystemMethod::QuasiNewton).then_some(model.m);
    Ok(IterationTrace { records, status, x_final: x, final_matrix })
}

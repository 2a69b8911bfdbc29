//! Transformations of secant information: image-operator directions and
//! projection of `(s, y)` pairs against recent history.

use std::collections::VecDeque;

use crate::linalg::{dot, norm2, solve_general, DenseMatrix, DenseVector, InnerProductWeight, LinalgError};
use crate::updates::{PairKind, SecantPair, CURVATURE_TOL};

/// Default relative threshold below which a projected step is discarded.
pub const DEFAULT_DISCARD_TOL: f64 = 1e-8;

/// Default relative regularization for the normal equations.
pub const DEFAULT_REGULARIZATION: f64 = 1e-10;

/// How the secondary-secant step length `t` is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepLength {
    Fixed(f64),
    /// `t = ‖s‖ / ‖u‖`, so the probe step has the size of the last step.
    StepMatched,
}

impl StepLength {
    pub fn resolve(&self, s: &[f64], u: &[f64]) -> f64 {
        match *self {
            StepLength::Fixed(t) => t,
            StepLength::StepMatched => {
                let nu = norm2(u);
                if nu == 0.0 {
                    1.0
                } else {
                    norm2(s) / nu
                }
            }
        }
    }
}

impl Default for StepLength {
    fn default() -> Self {
        StepLength::Fixed(1.0)
    }
}

/// Inner product used to orthogonalize steps.
#[derive(Debug, Clone, PartialEq)]
pub enum CoefficientFamily {
    /// `⟨a, ỹ_j⟩`, i.e. the Hessian inner product realized through `y`.
    Broyden,
    /// `⟨a, b⟩_{M⁻²}`.
    Gpsb(InnerProductWeight),
    /// Euclidean.
    Bgm,
}

impl CoefficientFamily {
    pub fn requires_curvature(&self) -> bool {
        matches!(self, CoefficientFamily::Broyden)
    }

    /// `⟨s, s_j⟩_W` given the stored pair `(s_j, y_j)`.
    fn coupling(&self, s: &[f64], sj: &[f64], yj: &[f64]) -> f64 {
        match self {
            CoefficientFamily::Broyden => dot(s, yj),
            CoefficientFamily::Gpsb(w) => w.inner(s, sj),
            CoefficientFamily::Bgm => dot(s, sj),
        }
    }
}

/// Regularizer `λ` added to the normal-equations matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regularization {
    /// A fixed `λ ≥ 0`.
    Fixed(f64),
    /// `λ = c · trace(G) / d` for the `d×d` system matrix `G`.
    TraceScaled(f64),
}

impl Regularization {
    pub fn lambda(&self, g: &DenseMatrix) -> f64 {
        match *self {
            Regularization::Fixed(l) => l,
            Regularization::TraceScaled(c) => {
                let d = g.nrows();
                if d == 0 {
                    0.0
                } else {
                    c * g.trace() / d as f64
                }
            }
        }
    }
}

impl Default for Regularization {
    fn default() -> Self {
        Regularization::TraceScaled(DEFAULT_REGULARIZATION)
    }
}

/// Choice of secant-pair transformation.
#[derive(Debug, Clone, PartialEq)]
pub enum OperatorMode {
    None,
    Image(StepLength),
    GramSchmidt { d: usize, family: CoefficientFamily, classical: bool },
    NormalEqProjection { d: usize, regularization: Regularization, family: CoefficientFamily, discard_tol: f64 },
}

impl OperatorMode {
    pub fn image() -> Self {
        OperatorMode::Image(StepLength::default())
    }

    pub fn gram_schmidt(d: usize, family: CoefficientFamily) -> Self {
        OperatorMode::GramSchmidt { d, family, classical: false }
    }

    pub fn projection(d: usize, family: CoefficientFamily) -> Self {
        OperatorMode::NormalEqProjection {
            d,
            regularization: Regularization::default(),
            family,
            discard_tol: DEFAULT_DISCARD_TOL,
        }
    }

    pub fn window(&self) -> Option<usize> {
        match self {
            OperatorMode::GramSchmidt { d, .. } | OperatorMode::NormalEqProjection { d, .. } => Some(*d),
            _ => None,
        }
    }

    /// Checks `1 ≤ d ≤ n − 1`, `λ ≥ 0` and `discard_tol ∈ (0, 1)`.
    pub fn validate(&self, n: usize) -> Result<(), String> {
        if let Some(d) = self.window() {
            if d == 0 || d + 1 > n {
                return Err(format!("window d = {d} must satisfy 1 ≤ d ≤ n − 1 = {}", n.saturating_sub(1)));
            }
        }
        match self {
            OperatorMode::NormalEqProjection { regularization, discard_tol, .. } => {
                let bad_reg = match *regularization {
                    Regularization::Fixed(l) | Regularization::TraceScaled(l) => !(l >= 0.0),
                };
                if bad_reg {
                    return Err("regularization must be nonnegative".into());
                }
                if !(*discard_tol > 0.0 && *discard_tol < 1.0) {
                    return Err(format!("discard tolerance {discard_tol} outside (0, 1)"));
                }
                Ok(())
            }
            OperatorMode::Image(StepLength::Fixed(t)) if !(*t > 0.0) => Err(format!("step length t = {t} must be positive")),
            _ => Ok(()),
        }
    }
}

/// Why a transformed pair was replaced by the raw pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FallbackReason {
    /// `uᵀv` (or `s̃ᵀỹ`) failed the curvature test.
    Curvature,
    /// The image direction vanished.
    ZeroImage,
    /// `‖s̃‖ < discard_tol · ‖s‖`.
    SmallProjection,
    /// The projection system could not be solved.
    SingularSystem,
}

/// Result of a pair transformation.
#[derive(Debug, Clone, PartialEq)]
pub struct Transformed {
    pub pair: SecantPair,
    pub fallback: Option<FallbackReason>,
}

impl Transformed {
    fn accepted(pair: SecantPair) -> Self {
        Self { pair, fallback: None }
    }

    fn fallback(s: &[f64], y: &[f64], reason: FallbackReason) -> Self {
        Self { pair: SecantPair::raw(s.to_vec(), y.to_vec()), fallback: Some(reason) }
    }
}

/// `u = s − B⁻¹y`, given a solver for `B`.
pub fn image_direction_broyden<F>(solve_b: F, s: &[f64], y: &[f64]) -> Result<DenseVector, LinalgError>
where
    F: FnOnce(&[f64]) -> Result<DenseVector, LinalgError>,
{
    let by = solve_b(y)?;
    Ok(s.iter().zip(&by).map(|(a, b)| a - b).collect())
}

/// `u = M²[(1 − α) g_k − g_{k+1}]`, which equals `M²(B_k − A)s_k` on a
/// quadratic when `s_k = −α B_k⁻¹ g_k`.
pub fn image_direction_gpsb(m2: &InnerProductWeight, alpha: f64, g_k: &[f64], g_next: &[f64]) -> DenseVector {
    let r: DenseVector = g_k.iter().zip(g_next).map(|(a, b)| (1.0 - alpha) * a - b).collect();
    m2.apply(&r)
}

/// Finite-difference secondary secant `v = [g(x₊ + t u) − g(x₊)] / t`,
/// reusing the already evaluated `g(x₊)`.
pub fn secondary_secant<G>(grad: G, x_next: &[f64], g_next: &[f64], u: &[f64], t: f64) -> DenseVector
where
    G: FnOnce(&[f64]) -> DenseVector,
{
    debug_assert!(t > 0.0);
    let probe: DenseVector = x_next.iter().zip(u).map(|(x, ui)| x + t * ui).collect();
    let gp = grad(&probe);
    if t == 1.0 {
        gp.iter().zip(g_next).map(|(a, b)| a - b).collect()
    } else {
        gp.iter().zip(g_next).map(|(a, b)| (a - b) / t).collect()
    }
}

/// Applies the image-mode acceptance test to `(u, v)`.
pub fn accept_image_pair(s: &[f64], y: &[f64], u: DenseVector, v: DenseVector) -> Transformed {
    if norm2(&u) == 0.0 {
        return Transformed::fallback(s, y, FallbackReason::ZeroImage);
    }
    let uv = dot(&u, &v);
    if uv <= CURVATURE_TOL * norm2(&u) * norm2(&v) {
        return Transformed::fallback(s, y, FallbackReason::Curvature);
    }
    Transformed::accepted(SecantPair::new(u, v, PairKind::Image))
}

/// Window of the most recent orthogonalized pairs `(s̃_j, ỹ_j)`.
#[derive(Debug, Clone)]
pub struct OrthogonalHistory {
    capacity: usize,
    window: VecDeque<SecantPair>,
    restart: usize,
    pushes: usize,
    restarts: usize,
}

impl OrthogonalHistory {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1, "orthogonalization window must hold at least one pair");
        Self { capacity, window: VecDeque::with_capacity(capacity), restart: 0, pushes: 0, restarts: 0 }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.window.len()
    }

    pub fn is_empty(&self) -> bool {
        self.window.is_empty()
    }

    pub fn pairs(&self) -> impl Iterator<Item = &SecantPair> {
        self.window.iter()
    }

    /// Index of the first pair since the last restart.
    pub fn restart_marker(&self) -> usize {
        self.restart
    }

    pub fn restarts(&self) -> usize {
        self.restarts
    }

    fn push(&mut self, pair: SecantPair) {
        if self.window.len() == self.capacity {
            self.window.pop_front();
        }
        self.window.push_back(pair);
        self.pushes += 1;
    }

    fn restart(&mut self) {
        self.window.clear();
        self.restart = self.pushes;
        self.restarts += 1;
    }
}

/// Orthogonalizes `pair.s` against the window (modified Gram–Schmidt unless
/// `classical`), carrying the same combination into `ỹ`, then records the
/// result. On failure the window restarts from the raw pair.
pub fn gram_schmidt_transform(
    pair: &SecantPair,
    hist: &mut OrthogonalHistory,
    family: &CoefficientFamily,
    classical: bool,
) -> Transformed {
    let (s, y) = (&pair.s, &pair.y);
    let mut st = s.clone();
    let mut yt = y.clone();
    for pj in hist.window.iter() {
        let den = family.coupling(&pj.s, &pj.s, &pj.y);
        let num = if classical { family.coupling(s, &pj.s, &pj.y) } else { family.coupling(&st, &pj.s, &pj.y) };
        let a = num / den;
        for i in 0..st.len() {
            st[i] -= a * pj.s[i];
            yt[i] -= a * pj.y[i];
        }
    }
    let reason = if norm2(&st) <= DEFAULT_DISCARD_TOL * norm2(s) {
        Some(FallbackReason::SmallProjection)
    } else {
        let ok = match family {
            CoefficientFamily::Broyden => dot(&st, &yt) > CURVATURE_TOL * norm2(&st) * norm2(&yt),
            _ => true,
        };
        (!ok).then_some(FallbackReason::Curvature)
    };
    match reason {
        None => {
            let out = SecantPair::new(st, yt, if hist.is_empty() { pair.kind } else { PairKind::Projected });
            hist.push(out.clone());
            Transformed::accepted(out)
        }
        Some(reason) => {
            hist.restart();
            let raw = SecantPair::raw(s.clone(), y.clone());
            if !family.requires_curvature() || raw.satisfies_curvature() {
                hist.push(raw);
            }
            Transformed::fallback(s, y, reason)
        }
    }
}

/// The most recent raw pairs as `S` and `Y` column blocks, oldest first.
#[derive(Debug, Clone)]
pub struct RawHistory {
    capacity: usize,
    s: VecDeque<DenseVector>,
    y: VecDeque<DenseVector>,
}

impl RawHistory {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1, "raw history must hold at least one pair");
        Self { capacity, s: VecDeque::with_capacity(capacity), y: VecDeque::with_capacity(capacity) }
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn push(&mut self, s: DenseVector, y: DenseVector) {
        if self.s.len() == self.capacity {
            self.s.pop_front();
            self.y.pop_front();
        }
        self.s.push_back(s);
        self.y.push_back(y);
    }

    pub fn steps(&self) -> impl Iterator<Item = &DenseVector> {
        self.s.iter()
    }

    pub fn differences(&self) -> impl Iterator<Item = &DenseVector> {
        self.y.iter()
    }

    pub fn s_block(&self) -> DenseMatrix {
        let n = self.s.front().map_or(0, |v| v.len());
        DenseMatrix::from_columns(n, &self.s.iter().cloned().collect::<Vec<_>>())
    }

    pub fn y_block(&self) -> DenseMatrix {
        let n = self.y.front().map_or(0, |v| v.len());
        DenseMatrix::from_columns(n, &self.y.iter().cloned().collect::<Vec<_>>())
    }
}

/// Outcome of [`normal_eq_projection`]: the pair to use, the coefficients
/// `β` (empty on fallback or with empty history), and a fallback reason.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub pair: SecantPair,
    pub beta: DenseVector,
    pub fallback: Option<FallbackReason>,
}

/// Projects `pair` against the raw history by solving the family's
/// regularized `d×d` normal equations:
///
/// * Broyden: `(SᵀY + YᵀS + λI) β = Sᵀy + Yᵀs`
/// * GPSB: `(SᵀM⁻²S + λI) β = SᵀM⁻²s`
/// * BGM: `(SᵀS + λI) β = Sᵀs`
///
/// and returns `s̃ = s − Sβ`, `ỹ = y − Yβ`.
pub fn normal_eq_projection(
    pair: &SecantPair,
    raw: &RawHistory,
    family: &CoefficientFamily,
    regularization: Regularization,
    discard_tol: f64,
) -> Projection {
    let (s, y) = (&pair.s, &pair.y);
    if raw.is_empty() {
        return Projection { pair: pair.clone(), beta: Vec::new(), fallback: None };
    }
    let fallback = |reason| Projection {
        pair: SecantPair::raw(s.clone(), y.clone()),
        beta: Vec::new(),
        fallback: Some(reason),
    };
    let cols_s: Vec<&DenseVector> = raw.s.iter().collect();
    let cols_y: Vec<&DenseVector> = raw.y.iter().collect();
    let d = cols_s.len();
    let mut g = DenseMatrix::zeros(d, d);
    let mut rhs = vec![0.0; d];
    match family {
        CoefficientFamily::Broyden => {
            for i in 0..d {
                for j in 0..d {
                    g[(i, j)] = dot(cols_s[i], cols_y[j]) + dot(cols_y[i], cols_s[j]);
                }
                rhs[i] = dot(cols_s[i], y) + dot(cols_y[i], s);
            }
        }
        CoefficientFamily::Gpsb(w) => {
            let ws: Vec<DenseVector> = cols_s.iter().map(|c| w.apply(c)).collect();
            for i in 0..d {
                for j in 0..d {
                    g[(i, j)] = dot(cols_s[i], &ws[j]);
                }
                rhs[i] = dot(&ws[i], s);
            }
        }
        CoefficientFamily::Bgm => {
            for i in 0..d {
                for j in 0..d {
                    g[(i, j)] = dot(cols_s[i], cols_s[j]);
                }
                rhs[i] = dot(cols_s[i], s);
            }
        }
    }
    let lambda = regularization.lambda(&g);
    if lambda != 0.0 {
        for i in 0..d {
            g[(i, i)] += lambda;
        }
    }
    let beta = match solve_general(&g, &rhs) {
        Ok(b) if b.iter().all(|v| v.is_finite()) => b,
        _ => return fallback(FallbackReason::SingularSystem),
    };
    let n = s.len();
    let mut sb = vec![0.0; n];
    let mut yb = vec![0.0; n];
    for (j, &bj) in beta.iter().enumerate() {
        for i in 0..n {
            sb[i] += cols_s[j][i] * bj;
            yb[i] += cols_y[j][i] * bj;
        }
    }
    let st: DenseVector = (0..n).map(|i| s[i] - sb[i]).collect();
    let yt: DenseVector = (0..n).map(|i| y[i] - yb[i]).collect();
    if !(norm2(&st) > discard_tol * norm2(s)) {
        return fallback(FallbackReason::SmallProjection);
    }
    if family.requires_curvature() && !(dot(&st, &yt) > CURVATURE_TOL * norm2(&st) * norm2(&yt)) {
        return fallback(FallbackReason::Curvature);
    }
    Projection { pair: SecantPair::new(st, yt, PairKind::Projected), beta, fallback: None }
}

/// Per-run state for the window-based modes.
#[derive(Debug, Clone)]
pub enum PairTransformer {
    Identity,
    GramSchmidt { hist: OrthogonalHistory, family: CoefficientFamily, classical: bool },
    Projection { raw: RawHistory, family: CoefficientFamily, regularization: Regularization, discard_tol: f64 },
}

impl PairTransformer {
    /// State for `mode`; image mode is handled by the solvers and maps to
    /// the identity here.
    pub fn new(mode: &OperatorMode) -> Self {
        match mode {
            OperatorMode::None | OperatorMode::Image(_) => PairTransformer::Identity,
            OperatorMode::GramSchmidt { d, family, classical } => PairTransformer::GramSchmidt {
                hist: OrthogonalHistory::new(*d),
                family: family.clone(),
                classical: *classical,
            },
            OperatorMode::NormalEqProjection { d, regularization, family, discard_tol } => PairTransformer::Projection {
                raw: RawHistory::new(*d),
                family: family.clone(),
                regularization: *regularization,
                discard_tol: *discard_tol,
            },
        }
    }

    /// Transforms the raw pair `(s, y)` and records it in the history.
    pub fn transform(&mut self, s: &[f64], y: &[f64]) -> Transformed {
        let pair = SecantPair::raw(s.to_vec(), y.to_vec());
        match self {
            PairTransformer::Identity => Transformed::accepted(pair),
            PairTransformer::GramSchmidt { hist, family, classical } => {
                gram_schmidt_transform(&pair, hist, family, *classical)
            }
            PairTransformer::Projection { raw, family, regularization, discard_tol } => {
                let p = normal_eq_projection(&pair, raw, family, *regularization, *discard_tol);
                raw.push(pair.s, pair.y);
                Transformed { pair: p.pair, fallback: p.fallback }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{solve_symmetric, sub, unit_vector};

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn image_broyden_examples() {
        let a = DenseMatrix::from_diagonal(&[1.0, 3.0]);
        let s = vec![0.3, -0.7];
        let u = image_direction_broyden(|r| solve_symmetric(&a, r), &s, &a.matvec(&s)).unwrap();
        assert!(norm2(&u) < 1e-15);

        let eye = DenseMatrix::identity(2);
        let u = image_direction_broyden(|r| solve_symmetric(&eye, r), &[1.0, 0.0], &[2.0, 0.0]).unwrap();
        assert_eq!(u, vec![-1.0, 0.0]);

        let b = DenseMatrix::from_diagonal(&[1.0, 1e6]);
        let (p, q) = (0.4, -2.5);
        let u = image_direction_broyden(|r| solve_symmetric(&b, r), &[p, q], &[p, q]).unwrap();
        assert_eq!(u[0], 0.0);
        assert!((u[1] - q * (1.0 - 1e-6)).abs() < 1e-15);
    }

    #[test]
    fn image_gpsb_examples() {
        let g = vec![0.5, -1.5];
        let gn = vec![2.0, 1.0];
        assert_eq!(image_direction_gpsb(&InnerProductWeight::Identity, 1.0, &g, &gn), vec![-2.0, -1.0]);
        let alpha = 0.25;
        let gn: Vec<f64> = g.iter().map(|v| (1.0 - alpha) * v).collect();
        assert_eq!(image_direction_gpsb(&InnerProductWeight::Identity, alpha, &g, &gn), vec![0.0, 0.0]);
        let m2 = InnerProductWeight::spd(DenseMatrix::from_diagonal(&[2.0, 3.0])).unwrap();
        assert_eq!(image_direction_gpsb(&m2, 0.5, &[2.0, 2.0], &[1.0, 1.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn secondary_secant_on_weighted_quadratic() {
        let grad = |x: &[f64]| -> DenseVector { x.iter().enumerate().map(|(i, v)| (i + 1) as f64 * v).collect() };
        let x = vec![1.0; 50];
        let gx = grad(&x);
        let v = secondary_secant(grad, &x, &gx, &unit_vector(50, 2), 1.0);
        assert_eq!(v, {
            let mut e = vec![0.0; 50];
            e[2] = 3.0;
            e
        });
    }

    #[test]
    fn gram_schmidt_hand_example() {
        let a = DenseMatrix::from_diagonal(&[1.0, 2.0]);
        let mut hist = OrthogonalHistory::new(1);
        let s0 = vec![1.0, 1.0];
        let first = gram_schmidt_transform(&SecantPair::raw(s0.clone(), a.matvec(&s0)), &mut hist, &CoefficientFamily::Broyden, false);
        assert_eq!(first.pair.s, s0);
        let s1 = vec![1.0, 0.0];
        let out = gram_schmidt_transform(&SecantPair::raw(s1.clone(), a.matvec(&s1)), &mut hist, &CoefficientFamily::Broyden, false);
        assert!(out.fallback.is_none());
        assert!(close(&out.pair.s, &[2.0 / 3.0, -1.0 / 3.0], 1e-15));
        assert!(close(&out.pair.y, &a.matvec(&out.pair.s), 1e-15));
    }

    #[test]
    fn gram_schmidt_orthogonal_input_unchanged() {
        let mut hist = OrthogonalHistory::new(2);
        let e1 = SecantPair::raw(vec![1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]);
        gram_schmidt_transform(&e1, &mut hist, &CoefficientFamily::Bgm, false);
        let e2 = SecantPair::raw(vec![0.0, 2.0, 0.0], vec![0.0, 1.0, 5.0]);
        let out = gram_schmidt_transform(&e2, &mut hist, &CoefficientFamily::Bgm, false);
        assert_eq!(out.pair.s, e2.s);
        assert_eq!(out.pair.y, e2.y);
    }

    #[test]
    fn gram_schmidt_restarts_on_parallel_step() {
        let mut hist = OrthogonalHistory::new(2);
        let p = SecantPair::raw(vec![1.0, 1.0], vec![1.0, 2.0]);
        gram_schmidt_transform(&p, &mut hist, &CoefficientFamily::Broyden, false);
        let q = SecantPair::raw(vec![2.0, 2.0], vec![2.0, 4.0]);
        let out = gram_schmidt_transform(&q, &mut hist, &CoefficientFamily::Broyden, false);
        assert_eq!(out.fallback, Some(FallbackReason::SmallProjection));
        assert_eq!(out.pair, q);
        assert_eq!(hist.restarts(), 1);
        assert_eq!(hist.len(), 1);
    }

    #[test]
    fn projection_hand_example() {
        let mut raw = RawHistory::new(1);
        raw.push(vec![1.0, 1.0], vec![1.0, 2.0]);
        let pair = SecantPair::raw(vec![1.0, 0.0], vec![1.0, 0.0]);
        let p = normal_eq_projection(&pair, &raw, &CoefficientFamily::Broyden, Regularization::Fixed(0.0), DEFAULT_DISCARD_TOL);
        assert!(p.fallback.is_none());
        assert!((p.beta[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!(close(&p.pair.s, &[2.0 / 3.0, -1.0 / 3.0], 1e-15));
        assert!(close(&p.pair.y, &[2.0 / 3.0, -2.0 / 3.0], 1e-15));
    }

    #[test]
    fn projection_empty_and_full() {
        let raw = RawHistory::new(2);
        let pair = SecantPair::raw(vec![1.0, 2.0], vec![3.0, 4.0]);
        let p = normal_eq_projection(&pair, &raw, &CoefficientFamily::Bgm, Regularization::default(), DEFAULT_DISCARD_TOL);
        assert_eq!(p.pair, pair);
        assert!(p.beta.is_empty());

        let a = DenseMatrix::from_diagonal(&[1.0, 2.0, 3.0]);
        let mut raw = RawHistory::new(2);
        for s in [vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 1.0]] {
            raw.push(s.clone(), a.matvec(&s));
        }
        let s = vec![2.0, -1.0, 1.0];
        let pair = SecantPair::raw(s.clone(), a.matvec(&s));
        let p = normal_eq_projection(&pair, &raw, &CoefficientFamily::Broyden, Regularization::Fixed(0.0), DEFAULT_DISCARD_TOL);
        assert_eq!(p.fallback, Some(FallbackReason::SmallProjection));
    }

    #[test]
    fn projection_gpsb_orthogonality() {
        let w = InnerProductWeight::spd(DenseMatrix::from_diagonal(&[1.0, 4.0, 9.0])).unwrap();
        let mut raw = RawHistory::new(1);
        raw.push(vec![1.0, 1.0, 0.0], vec![0.0, 0.0, 0.0]);
        let pair = SecantPair::raw(vec![0.5, 1.0, 2.0], vec![1.0, 1.0, 1.0]);
        let p = normal_eq_projection(&pair, &raw, &CoefficientFamily::Gpsb(w.clone()), Regularization::Fixed(0.0), DEFAULT_DISCARD_TOL);
        assert!(w.inner(&p.pair.s, &[1.0, 1.0, 0.0]).abs() < 1e-14);
        assert!(w.norm(&p.pair.s) <= w.norm(&pair.s));
        assert_eq!(p.pair.y, sub(&pair.y, &[0.0, 0.0, 0.0]));
    }

    #[test]
    fn image_pair_acceptance() {
        let s = vec![1.0, 0.0];
        let y = vec![1.0, 0.0];
        let t = accept_image_pair(&s, &y, vec![0.0, 0.0], vec![0.0, 0.0]);
        assert_eq!(t.fallback, Some(FallbackReason::ZeroImage));
        let t = accept_image_pair(&s, &y, vec![1.0, 0.0], vec![-1.0, 0.0]);
        assert_eq!(t.fallback, Some(FallbackReason::Curvature));
        let t = accept_image_pair(&s, &y, vec![0.0, 1.0], vec![0.0, 3.0]);
        assert_eq!(t.pair.kind, PairKind::Image);
    }

    #[test]
    fn mode_validation() {
        assert!(OperatorMode::projection(2, CoefficientFamily::Broyden).validate(3).is_ok());
        assert!(OperatorMode::projection(3, CoefficientFamily::Broyden).validate(3).is_err());
        assert!(OperatorMode::gram_schmidt(0, CoefficientFamily::Bgm).validate(3).is_err());
        assert!(OperatorMode::Image(StepLength::Fixed(0.0)).validate(3).is_err());
        let bad = OperatorMode::NormalEqProjection {
            d: 1,
            regularization: Regularization::Fixed(-1.0),
            family: CoefficientFamily::Bgm,
            discard_tol: 1e-8,
        };
        assert!(bad.validate(3).is_err());
    }
}

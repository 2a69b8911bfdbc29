//! Quasi-Newton matrix updates as pure maps `B → B₊` (or `H → H₊`).
//!
//! Every update enforces a secant condition for the supplied pair: direct
//! forms give `B₊ s = y`, inverse forms give `H₊ y = s`.

use std::collections::VecDeque;

use thiserror::Error;

use crate::linalg::{dot, norm2, DenseMatrix, DenseVector, InnerProductWeight};

/// Relative curvature threshold: pairs need `sᵀy > CURVATURE_TOL · ‖s‖ ‖y‖`.
pub const CURVATURE_TOL: f64 = 1e-12;

/// Relative threshold for the `sᵀBs` denominator of the Broyden family.
pub const DENOMINATOR_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum UpdateError {
    #[error("curvature condition failed: sᵀy = {sy:e} ≤ {threshold:e}")]
    CurvatureBreakdown { sy: f64, threshold: f64 },
    #[error("degenerate denominator in {0}")]
    DegenerateDenominator(&'static str),
    #[error("zero step")]
    ZeroStep,
    #[error("dimension mismatch: matrix is {matrix}x{matrix}, pair has length {pair}")]
    DimensionMismatch { matrix: usize, pair: usize },
    #[error("inverse form is only available for θ = 0 (BFGS) and θ = 1 (DFP), got θ = {0}")]
    UnsupportedInverse(f64),
}

/// Where a secant pair came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairKind {
    /// `(s_k, y_k)` straight from the iteration.
    Raw,
    /// `(u_k, v_k)` built by an image operator.
    Image,
    /// `(s̃_k, ỹ_k)` after orthogonalization or projection.
    Projected,
}

/// A step `s` and the matching gradient (or residual) difference `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct SecantPair {
    pub s: DenseVector,
    pub y: DenseVector,
    pub kind: PairKind,
}

impl SecantPair {
    pub fn new(s: DenseVector, y: DenseVector, kind: PairKind) -> Self {
        assert_eq!(s.len(), y.len(), "secant pair vectors differ in length");
        Self { s, y, kind }
    }

    pub fn raw(s: DenseVector, y: DenseVector) -> Self {
        Self::new(s, y, PairKind::Raw)
    }

    pub fn dim(&self) -> usize {
        self.s.len()
    }

    pub fn curvature(&self) -> f64 {
        dot(&self.s, &self.y)
    }

    /// `sᵀy > CURVATURE_TOL · ‖s‖ ‖y‖`.
    pub fn satisfies_curvature(&self) -> bool {
        check_curvature(&self.s, &self.y).is_ok()
    }
}

fn check_curvature(s: &[f64], y: &[f64]) -> Result<f64, UpdateError> {
    let sy = dot(s, y);
    let threshold = CURVATURE_TOL * norm2(s) * norm2(y);
    if sy > threshold {
        Ok(sy)
    } else {
        Err(UpdateError::CurvatureBreakdown { sy, threshold })
    }
}

fn check_dims(m: &DenseMatrix, pair: &SecantPair) -> Result<usize, UpdateError> {
    let n = m.nrows();
    if !m.is_square() || pair.dim() != n {
        return Err(UpdateError::DimensionMismatch { matrix: n, pair: pair.dim() });
    }
    Ok(n)
}

/// Whether an update maintains `B ≈ ∇²f` or `H ≈ (∇²f)⁻¹`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UpdateForm {
    Direct,
    Inverse,
}

/// Choice of update formula.
#[derive(Debug, Clone, PartialEq)]
pub enum UpdateRule {
    /// Broyden family; θ = 0 is BFGS, θ = 1 is DFP.
    Broyden { theta: f64, form: UpdateForm },
    /// Least-change symmetric update in `‖M X M‖_F`, parameterized by `M⁻²`.
    GeneralizedPsb { minv2: InnerProductWeight, form: UpdateForm },
    /// Broyden's good method (nonsymmetric rank one).
    Bgm { form: UpdateForm },
}

impl UpdateRule {
    pub fn bfgs() -> Self {
        Self::Broyden { theta: 0.0, form: UpdateForm::Direct }
    }

    pub fn dfp() -> Self {
        Self::Broyden { theta: 1.0, form: UpdateForm::Direct }
    }

    pub fn psb() -> Self {
        Self::GeneralizedPsb { minv2: InnerProductWeight::Identity, form: UpdateForm::Direct }
    }

    pub fn bgm() -> Self {
        Self::Bgm { form: UpdateForm::Direct }
    }

    pub fn form(&self) -> UpdateForm {
        match self {
            Self::Broyden { form, .. } | Self::GeneralizedPsb { form, .. } | Self::Bgm { form } => *form,
        }
    }

    /// Broyden and generalized PSB updates keep symmetric matrices symmetric.
    pub fn is_symmetric(&self) -> bool {
        !matches!(self, Self::Bgm { .. })
    }

    /// Whether the rule needs `sᵀy > 0`.
    pub fn requires_curvature(&self) -> bool {
        matches!(self, Self::Broyden { .. })
    }

    /// Applies the rule to the matrix it maintains (`B` for direct forms,
    /// `H` for inverse forms).
    pub fn apply(&self, m: &DenseMatrix, pair: &SecantPair) -> Result<DenseMatrix, UpdateError> {
        match (self, self.form()) {
            (Self::Broyden { theta, .. }, UpdateForm::Direct) => broyden_update(m, pair, *theta),
            (Self::Broyden { theta, .. }, UpdateForm::Inverse) => {
                if *theta == 0.0 {
                    bfgs_inverse_update(m, pair)
                } else if *theta == 1.0 {
                    dfp_inverse_update(m, pair)
                } else {
                    Err(UpdateError::UnsupportedInverse(*theta))
                }
            }
            (Self::GeneralizedPsb { minv2, .. }, UpdateForm::Direct) => gpsb_update(m, pair, minv2),
            (Self::GeneralizedPsb { minv2, .. }, UpdateForm::Inverse) => gpsb_inverse_update(m, pair, minv2),
            (Self::Bgm { .. }, UpdateForm::Direct) => bgm_update(m, pair),
            (Self::Bgm { .. }, UpdateForm::Inverse) => bgm_inverse_update(m, pair),
        }
    }
}

/// Broyden family update
/// `B₊ = B + yyᵀ/sᵀy − BssᵀB/sᵀBs + θ ωωᵀ`,
/// `ω = √(sᵀBs) (y/sᵀy − Bs/sᵀBs)`.
pub fn broyden_update(b: &DenseMatrix, pair: &SecantPair, theta: f64) -> Result<DenseMatrix, UpdateError> {
    let n = check_dims(b, pair)?;
    let (s, y) = (&pair.s, &pair.y);
    let sy = check_curvature(s, y)?;
    let bs = b.matvec(s);
    let sbs = dot(s, &bs);
    let ss = dot(s, s);
    if sbs.abs() <= DENOMINATOR_TOL * ss * b.frobenius_norm() || sbs == 0.0 {
        return Err(UpdateError::DegenerateDenominator("sᵀBs"));
    }
    let omega: DenseVector = if theta != 0.0 {
        let root = sbs.sqrt();
        (0..n).map(|i| root * (y[i] / sy - bs[i] / sbs)).collect()
    } else {
        Vec::new()
    };
    let mut out = b.clone();
    for i in 0..n {
        for j in 0..n {
            let mut v = out[(i, j)] + y[i] * y[j] / sy - bs[i] * bs[j] / sbs;
            if theta != 0.0 {
                v += theta * (omega[i] * omega[j]);
            }
            out[(i, j)] = v;
        }
    }
    Ok(out)
}

/// Inverse BFGS update
/// `H₊ = H + ((s − Hy)sᵀ + s(s − Hy)ᵀ)/sᵀy − ((s − Hy)ᵀy/(sᵀy)²) ssᵀ`.
pub fn bfgs_inverse_update(h: &DenseMatrix, pair: &SecantPair) -> Result<DenseMatrix, UpdateError> {
    let n = check_dims(h, pair)?;
    let (s, y) = (&pair.s, &pair.y);
    let sy = check_curvature(s, y)?;
    let hy = h.matvec(y);
    let r: DenseVector = (0..n).map(|i| s[i] - hy[i]).collect();
    let c = dot(&r, y) / (sy * sy);
    let mut out = h.clone();
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] += (r[i] * s[j] + s[i] * r[j]) / sy - c * (s[i] * s[j]);
        }
    }
    Ok(out)
}

/// Inverse DFP update `H₊ = H + ssᵀ/sᵀy − HyyᵀH/yᵀHy`.
pub fn dfp_inverse_update(h: &DenseMatrix, pair: &SecantPair) -> Result<DenseMatrix, UpdateError> {
    let n = check_dims(h, pair)?;
    let (s, y) = (&pair.s, &pair.y);
    let sy = check_curvature(s, y)?;
    let hy = h.matvec(y);
    let yhy = dot(y, &hy);
    if yhy.abs() <= DENOMINATOR_TOL * dot(y, y) * h.frobenius_norm() || yhy == 0.0 {
        return Err(UpdateError::DegenerateDenominator("yᵀHy"));
    }
    let mut out = h.clone();
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] += s[i] * s[j] / sy - hy[i] * hy[j] / yhy;
        }
    }
    Ok(out)
}

/// Direct DFP update written as the rank-two least-change correction
/// `B₊ = B + ((y − Bs)yᵀ + y(y − Bs)ᵀ)/sᵀy − ((y − Bs)ᵀs/(sᵀy)²) yyᵀ`.
pub fn dfp_direct_update(b: &DenseMatrix, pair: &SecantPair) -> Result<DenseMatrix, UpdateError> {
    let n = check_dims(b, pair)?;
    let (s, y) = (&pair.s, &pair.y);
    let sy = check_curvature(s, y)?;
    let bs = b.matvec(s);
    let r: DenseVector = (0..n).map(|i| y[i] - bs[i]).collect();
    let c = dot(&r, s) / (sy * sy);
    let mut out = b.clone();
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] += (r[i] * y[j] + y[i] * r[j]) / sy - c * (y[i] * y[j]);
        }
    }
    Ok(out)
}

/// Generalized PSB update with weight `M⁻²`:
/// `B₊ = B + (r (M⁻²s)ᵀ + (M⁻²s) rᵀ)/σ − (rᵀs/σ²) (M⁻²s)(M⁻²s)ᵀ`,
/// with `r = y − Bs` and `σ = sᵀM⁻²s`. `M⁻² = I` is the PSB update.
pub fn gpsb_update(
    b: &DenseMatrix,
    pair: &SecantPair,
    minv2: &InnerProductWeight,
) -> Result<DenseMatrix, UpdateError> {
    let n = check_dims(b, pair)?;
    let (s, y) = (&pair.s, &pair.y);
    let ms = minv2.apply(s);
    let sigma = dot(s, &ms);
    if sigma <= 0.0 {
        return Err(if norm2(s) == 0.0 { UpdateError::ZeroStep } else { UpdateError::DegenerateDenominator("sᵀM⁻²s") });
    }
    let bs = b.matvec(s);
    let r: DenseVector = (0..n).map(|i| y[i] - bs[i]).collect();
    let c = dot(&r, s) / (sigma * sigma);
    let mut out = b.clone();
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] += (r[i] * ms[j] + ms[i] * r[j]) / sigma - c * (ms[i] * ms[j]);
        }
    }
    Ok(out)
}

/// Dual generalized PSB update for `H ≈ A⁻¹`, enforcing `H₊ y = s`:
/// the same algebra as [`gpsb_update`] with `s ↔ y`.
pub fn gpsb_inverse_update(
    h: &DenseMatrix,
    pair: &SecantPair,
    minv2: &InnerProductWeight,
) -> Result<DenseMatrix, UpdateError> {
    let swapped = SecantPair::new(pair.y.clone(), pair.s.clone(), pair.kind);
    check_dims(h, pair)?;
    if norm2(&pair.y) == 0.0 {
        return Err(UpdateError::DegenerateDenominator("yᵀM⁻²y"));
    }
    gpsb_update(h, &swapped, minv2)
}

/// Broyden's good method `B₊ = B + (y − Bs)sᵀ/sᵀs`.
pub fn bgm_update(b: &DenseMatrix, pair: &SecantPair) -> Result<DenseMatrix, UpdateError> {
    let n = check_dims(b, pair)?;
    let (s, y) = (&pair.s, &pair.y);
    let ss = dot(s, s);
    if ss == 0.0 {
        return Err(UpdateError::ZeroStep);
    }
    let bs = b.matvec(s);
    let r: DenseVector = (0..n).map(|i| y[i] - bs[i]).collect();
    let mut out = b.clone();
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] += r[i] * s[j] / ss;
        }
    }
    Ok(out)
}

/// Broyden's good method on `H = B⁻¹` (Sherman–Morrison):
/// `H₊ = H + (s − Hy)(sᵀH)/(sᵀHy)`.
pub fn bgm_inverse_update(h: &DenseMatrix, pair: &SecantPair) -> Result<DenseMatrix, UpdateError> {
    let n = check_dims(h, pair)?;
    let (s, y) = (&pair.s, &pair.y);
    if dot(s, s) == 0.0 {
        return Err(UpdateError::ZeroStep);
    }
    let hy = h.matvec(y);
    let sh = h.tr_matvec(s);
    let den = dot(s, &hy);
    if den == 0.0 || den.abs() <= DENOMINATOR_TOL * norm2(s) * norm2(&hy) {
        return Err(UpdateError::DegenerateDenominator("sᵀHy"));
    }
    let r: DenseVector = (0..n).map(|i| s[i] - hy[i]).collect();
    let mut out = h.clone();
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] += r[i] * sh[j] / den;
        }
    }
    Ok(out)
}

/// `H_k g` for the implicit L-BFGS inverse built from `history` (oldest
/// first) on the initial matrix `h0_scale · I`, by the two-loop recursion.
///
/// Pairs are assumed to satisfy `sᵀy > 0`; [`LbfgsMemory`] enforces this
/// when pairs are stored.
pub fn lbfgs_direction(history: &[SecantPair], g: &[f64], h0_scale: f64) -> DenseVector {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for pair in history.iter().rev() {
        let rho = 1.0 / dot(&pair.s, &pair.y);
        let a = rho * dot(&pair.s, &q);
        for (qi, yi) in q.iter_mut().zip(&pair.y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    let mut r: DenseVector = q.iter().map(|v| h0_scale * v).collect();
    for (pair, &a) in history.iter().zip(alphas.iter().rev()) {
        let rho = 1.0 / dot(&pair.s, &pair.y);
        let b = rho * dot(&pair.y, &r);
        for (ri, si) in r.iter_mut().zip(&pair.s) {
            *ri += si * (a - b);
        }
    }
    r
}

/// Bounded L-BFGS pair storage; the oldest pair is evicted when full.
#[derive(Debug, Clone)]
pub struct LbfgsMemory {
    capacity: usize,
    pairs: VecDeque<SecantPair>,
}

impl LbfgsMemory {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1, "L-BFGS memory must hold at least one pair");
        Self { capacity, pairs: VecDeque::with_capacity(capacity) }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Stores a pair, rejecting it when the curvature condition fails.
    pub fn push(&mut self, pair: SecantPair) -> Result<(), UpdateError> {
        check_curvature(&pair.s, &pair.y)?;
        if self.pairs.len() == self.capacity {
            self.pairs.pop_front();
        }
        self.pairs.push_back(pair);
        Ok(())
    }

    pub fn pairs(&self) -> Vec<SecantPair> {
        self.pairs.iter().cloned().collect()
    }

    pub fn apply(&self, g: &[f64], h0_scale: f64) -> DenseVector {
        let history: Vec<SecantPair> = self.pairs.iter().cloned().collect();
        lbfgs_direction(&history, g, h0_scale)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{inverse, sub};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spd(n: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
        let data: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let g = DenseMatrix::from_row_slice(n, n, &data);
        g.matmul(&g.transpose()).add(&DenseMatrix::scaled_identity(n, 0.5))
    }

    fn vector(n: usize, rng: &mut ChaCha8Rng) -> DenseVector {
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    fn rel_diff(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
        a.sub(b).frobenius_norm() / a.frobenius_norm().max(b.frobenius_norm()).max(f64::MIN_POSITIVE)
    }

    fn secant_residual(b: &DenseMatrix, pair: &SecantPair) -> f64 {
        norm2(&sub(&b.matvec(&pair.s), &pair.y)) / (b.frobenius_norm() * norm2(&pair.s) + norm2(&pair.y))
    }

    #[test]
    fn broyden_fixed_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = spd(4, &mut rng);
        let s = vector(4, &mut rng);
        let pair = SecantPair::raw(s.clone(), a.matvec(&s));
        for theta in [0.0, 0.3, 1.0] {
            let b = broyden_update(&a, &pair, theta).unwrap();
            assert!(rel_diff(&b, &a) < 1e-12, "theta {theta}");
        }
    }

    #[test]
    fn bfgs_hand_example() {
        let pair = SecantPair::raw(vec![1.0, 0.0, 0.0], vec![2.0, 0.0, 0.0]);
        let b = broyden_update(&DenseMatrix::identity(3), &pair, 0.0).unwrap();
        assert_eq!(b, DenseMatrix::from_diagonal(&[2.0, 1.0, 1.0]));
    }

    #[test]
    fn broyden_secant_on_random_spd() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = spd(2, &mut rng);
        let s = vector(2, &mut rng);
        let pair = SecantPair::raw(s.clone(), a.matvec(&s));
        let b = broyden_update(&DenseMatrix::identity(2), &pair, 0.0).unwrap();
        assert!(secant_residual(&b, &pair) <= 1e-10);
    }

    #[test]
    fn broyden_errors() {
        let b = DenseMatrix::identity(2);
        let pair = SecantPair::raw(vec![1.0, 0.0], vec![-1.0, 0.0]);
        assert!(matches!(broyden_update(&b, &pair, 0.0), Err(UpdateError::CurvatureBreakdown { .. })));
        let pair = SecantPair::raw(vec![1.0, 0.0], vec![1.0, 0.0]);
        let degenerate = DenseMatrix::from_diagonal(&[0.0, 1.0]);
        assert_eq!(broyden_update(&degenerate, &pair, 0.0), Err(UpdateError::DegenerateDenominator("sᵀBs")));
        let pair = SecantPair::raw(vec![1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]);
        assert!(matches!(broyden_update(&b, &pair, 0.0), Err(UpdateError::DimensionMismatch { .. })));
    }

    #[test]
    fn bfgs_inverse_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = spd(3, &mut rng);
        let a_inv = inverse(&a).unwrap();
        let s = vector(3, &mut rng);
        let pair = SecantPair::raw(s.clone(), a.matvec(&s));
        assert!(rel_diff(&bfgs_inverse_update(&a_inv, &pair).unwrap(), &a_inv) < 1e-12);

        let pair = SecantPair::raw(vec![2.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]);
        let h = bfgs_inverse_update(&DenseMatrix::identity(3), &pair).unwrap();
        assert_eq!(h, DenseMatrix::from_diagonal(&[2.0, 1.0, 1.0]));
    }

    #[test]
    fn bfgs_inverse_matches_inverse_of_direct() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in 2..8 {
            let b = spd(n, &mut rng);
            let a = spd(n, &mut rng);
            let s = vector(n, &mut rng);
            let pair = SecantPair::raw(s.clone(), a.matvec(&s));
            let h_plus = bfgs_inverse_update(&inverse(&b).unwrap(), &pair).unwrap();
            let b_plus = broyden_update(&b, &pair, 0.0).unwrap();
            assert!(rel_diff(&h_plus, &inverse(&b_plus).unwrap()) < 1e-8);
            let h_dfp = dfp_inverse_update(&inverse(&b).unwrap(), &pair).unwrap();
            let b_dfp = broyden_update(&b, &pair, 1.0).unwrap();
            assert!(rel_diff(&h_dfp, &inverse(&b_dfp).unwrap()) < 1e-8);
        }
    }

    #[test]
    fn dfp_direct_agrees_with_broyden_theta_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let n = rng.random_range(2..8);
            let b = spd(n, &mut rng);
            let a = spd(n, &mut rng);
            let s = vector(n, &mut rng);
            let pair = SecantPair::raw(s.clone(), a.matvec(&s));
            let d = dfp_direct_update(&b, &pair).unwrap();
            assert!(rel_diff(&d, &broyden_update(&b, &pair, 1.0).unwrap()) < 1e-10);
            assert!(secant_residual(&d, &pair) < 1e-10);
            assert!(rel_diff(&dfp_direct_update(&a, &pair).unwrap(), &a) < 1e-12);
        }
    }

    #[test]
    fn gpsb_with_hessian_weight_is_dfp() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = spd(4, &mut rng);
        let b = spd(4, &mut rng);
        let s = vector(4, &mut rng);
        let pair = SecantPair::raw(s.clone(), a.matvec(&s));
        let w = InnerProductWeight::spd(a.clone()).unwrap();
        let g = gpsb_update(&b, &pair, &w).unwrap();
        assert!(rel_diff(&g, &dfp_direct_update(&b, &pair).unwrap()) < 1e-10);
        assert!(rel_diff(&gpsb_update(&a, &pair, &InnerProductWeight::Identity).unwrap(), &a) < 1e-12);
        assert!(secant_residual(&gpsb_update(&b, &pair, &InnerProductWeight::Identity).unwrap(), &pair) < 1e-10);
    }

    #[test]
    fn gpsb_inverse_with_step_weight_is_bfgs() {
        // With M⁻² = A⁻¹ and y = As we have M⁻²y = s.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = spd(4, &mut rng);
        let a_inv = inverse(&a).unwrap().symmetric_part();
        let h = inverse(&spd(4, &mut rng)).unwrap().symmetric_part();
        let s = vector(4, &mut rng);
        let pair = SecantPair::raw(s.clone(), a.matvec(&s));
        let w = InnerProductWeight::spd(a_inv.clone()).unwrap();
        let g = gpsb_inverse_update(&h, &pair, &w).unwrap();
        assert!(rel_diff(&g, &bfgs_inverse_update(&h, &pair).unwrap()) < 1e-10);
        assert!(norm2(&sub(&g.matvec(&pair.y), &pair.s)) < 1e-10 * norm2(&pair.s));
        assert!(rel_diff(&gpsb_inverse_update(&a_inv, &pair, &InnerProductWeight::Identity).unwrap(), &a_inv) < 1e-10);
    }

    #[test]
    fn gpsb_zero_step() {
        let b = DenseMatrix::identity(2);
        let pair = SecantPair::raw(vec![0.0, 0.0], vec![1.0, 0.0]);
        assert_eq!(gpsb_update(&b, &pair, &InnerProductWeight::Identity), Err(UpdateError::ZeroStep));
    }

    #[test]
    fn bgm_examples() {
        let b = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        let s = vec![0.5, -1.0];
        let pair = SecantPair::raw(s.clone(), b.matvec(&s));
        assert_eq!(bgm_update(&b, &pair).unwrap(), b);

        let pair = SecantPair::raw(vec![1.0, 0.0], vec![1.0, 2.0]);
        let out = bgm_update(&DenseMatrix::zeros(2, 2), &pair).unwrap();
        assert_eq!(out, DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![2.0, 0.0]]));

        let pair = SecantPair::raw(vec![0.0, 0.0], vec![1.0, 2.0]);
        assert_eq!(bgm_update(&b, &pair), Err(UpdateError::ZeroStep));
    }

    #[test]
    fn bgm_inverse_is_inverse_of_direct() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for n in 2..7 {
            let data: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let b = DenseMatrix::from_row_slice(n, n, &data).add(&DenseMatrix::scaled_identity(n, 3.0));
            let pair = SecantPair::raw(vector(n, &mut rng), vector(n, &mut rng));
            let b_plus = bgm_update(&b, &pair).unwrap();
            let h_plus = bgm_inverse_update(&inverse(&b).unwrap(), &pair).unwrap();
            assert!(rel_diff(&h_plus, &inverse(&b_plus).unwrap()) < 1e-8);
        }
    }

    #[test]
    fn lbfgs_empty_and_single_pair() {
        let g = vec![0.3, -1.0, 2.0];
        assert_eq!(lbfgs_direction(&[], &g, 1.0), g);
        let pair = SecantPair::raw(vec![1.0, 0.0], vec![1.0, 0.0]);
        assert_eq!(lbfgs_direction(&[pair], &[1.0, 0.0], 1.0), vec![1.0, 0.0]);
    }

    #[test]
    fn lbfgs_matches_dense_bfgs() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 6;
        let a = spd(n, &mut rng);
        let h0 = 0.7;
        let mut h = DenseMatrix::scaled_identity(n, h0);
        let mut memory = LbfgsMemory::new(10);
        for _ in 0..5 {
            let s = vector(n, &mut rng);
            let pair = SecantPair::raw(s.clone(), a.matvec(&s));
            h = bfgs_inverse_update(&h, &pair).unwrap();
            memory.push(pair).unwrap();
        }
        let g = vector(n, &mut rng);
        let dense = h.matvec(&g);
        let implicit = memory.apply(&g, h0);
        assert!(norm2(&sub(&dense, &implicit)) <= 1e-10 * norm2(&dense));
    }

    #[test]
    fn lbfgs_memory_rejects_and_evicts() {
        let mut memory = LbfgsMemory::new(2);
        assert!(memory.push(SecantPair::raw(vec![1.0, 0.0], vec![-1.0, 0.0])).is_err());
        assert!(memory.is_empty());
        for k in 1..=3 {
            memory.push(SecantPair::raw(vec![k as f64, 0.0], vec![1.0, 0.0])).unwrap();
        }
        assert_eq!(memory.len(), 2);
        assert_eq!(memory.pairs()[0].s[0], 2.0);
    }

    #[test]
    fn rule_dispatch() {
        let pair = SecantPair::raw(vec![1.0, 0.0], vec![2.0, 0.0]);
        let b = DenseMatrix::identity(2);
        assert_eq!(UpdateRule::bfgs().apply(&b, &pair).unwrap(), DenseMatrix::from_diagonal(&[2.0, 1.0]));
        let inv = UpdateRule::Broyden { theta: 0.5, form: UpdateForm::Inverse };
        assert_eq!(inv.apply(&b, &pair), Err(UpdateError::UnsupportedInverse(0.5)));
        assert!(!UpdateRule::bgm().is_symmetric());
        assert!(UpdateRule::dfp().requires_curvature());
    }
}

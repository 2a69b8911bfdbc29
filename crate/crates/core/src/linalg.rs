//! Dense linear algebra for small problems (n ≲ 100).
//!
//! Matrices are row-major and may be rectangular; most operations in this
//! crate only need square matrices plus `n × d` column blocks for secant
//! histories. Products use plain sequential summation so results are
//! reproducible across runs and optimization levels.

use std::fmt;
use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;
use thiserror::Error;

/// A dense real vector. Entries are expected to be finite.
pub type DenseVector = Vec<f64>;

/// Relative pivot threshold used by the symmetric and general factorizations.
pub const PIVOT_TOL: f64 = 1e-14;

/// Default relative tolerance for numerical kernels (`σ ≤ tol · σ_max`).
pub const DEFAULT_KERNEL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric (relative asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("matrix is not positive definite (pivot {0})")]
    NotPositiveDefinite(usize),
    #[error("matrix is singular to working precision (pivot {0})")]
    Singular(usize),
    #[error("zero vector where a nonzero vector is required")]
    ZeroVector,
}

/// Row-major dense matrix.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::scaled_identity(n, 1.0)
    }

    pub fn scaled_identity(n: usize, lambda: f64) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = lambda;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from a row-major slice.
    ///
    /// Panics if `data.len() != rows * cols`.
    pub fn from_row_slice(rows: usize, cols: usize, data: &[f64]) -> Self {
        assert_eq!(data.len(), rows * cols, "row slice length does not match shape");
        Self { rows, cols, data: data.to_vec() }
    }

    /// Builds a matrix from equally sized rows. Panics on ragged input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Self { rows: r, cols: c, data }
    }

    /// Builds an `n × m` matrix whose columns are the given vectors.
    /// An empty slice yields an `n × 0` block.
    pub fn from_columns(n: usize, columns: &[Vec<f64>]) -> Self {
        let mut m = Self::zeros(n, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), n, "column length does not match row count");
            for i in 0..n {
                m[(i, j)] = col[i];
            }
        }
        m
    }

    /// `a bᵀ`.
    pub fn outer(a: &[f64], b: &[f64]) -> Self {
        let mut m = Self::zeros(a.len(), b.len());
        for (i, &ai) in a.iter().enumerate() {
            for (j, &bj) in b.iter().enumerate() {
                m[(i, j)] = ai * bj;
            }
        }
        m
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> DenseVector {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn columns(&self) -> Vec<DenseVector> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn diagonal(&self) -> DenseVector {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// `A x`. Panics on dimension mismatch.
    pub fn matvec(&self, x: &[f64]) -> DenseVector {
        assert_eq!(x.len(), self.cols, "matvec dimension mismatch");
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `Aᵀ x`. Panics on dimension mismatch.
    pub fn tr_matvec(&self, x: &[f64]) -> DenseVector {
        assert_eq!(x.len(), self.rows, "tr_matvec dimension mismatch");
        let mut out = vec![0.0; self.cols];
        for (i, &xi) in x.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += a * xi;
            }
        }
        out
    }

    /// `A B`. Panics on dimension mismatch.
    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    fn zip_with(&self, other: &DenseMatrix, f: impl Fn(f64, f64) -> f64) -> DenseMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn add(&self, other: &DenseMatrix) -> DenseMatrix {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, alpha: f64) -> DenseMatrix {
        DenseMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| alpha * v).collect() }
    }

    /// `self += alpha · a bᵀ`.
    pub fn rank_one_update(&mut self, alpha: f64, a: &[f64], b: &[f64]) {
        assert_eq!((a.len(), b.len()), (self.rows, self.cols), "rank-one update shape mismatch");
        for (i, &ai) in a.iter().enumerate() {
            for (j, &bj) in b.iter().enumerate() {
                self[(i, j)] += alpha * (ai * bj);
            }
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `‖A − Aᵀ‖_F / ‖A‖_F` (zero for the zero matrix).
    pub fn asymmetry(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut acc = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                let d = self[(i, j)] - self[(j, i)];
                acc += d * d;
            }
        }
        let norm = self.frobenius_norm();
        if norm == 0.0 {
            0.0
        } else {
            acc.sqrt() / norm
        }
    }

    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        self.is_square() && self.asymmetry() <= rel_tol
    }

    /// `(A + Aᵀ) / 2`.
    pub fn symmetric_part(&self) -> DenseMatrix {
        let t = self.transpose();
        self.add(&t).scale(0.5)
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub(crate) fn from_nalgebra(m: &DMatrix<f64>) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out[(i, j)] = m[(i, j)];
            }
        }
        out
    }

    fn require_square(&self) -> Result<usize, LinalgError> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(LinalgError::NotSquare { rows: self.rows, cols: self.cols })
        }
    }
}

// ---------------------------------------------------------------------------
// Vector helpers
// ---------------------------------------------------------------------------

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> DenseVector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> DenseVector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scaled(alpha: f64, a: &[f64]) -> DenseVector {
    a.iter().map(|x| alpha * x).collect()
}

/// `y += alpha · x`.
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn unit_vector(n: usize, i: usize) -> DenseVector {
    let mut e = vec![0.0; n];
    e[i] = 1.0;
    e
}

// ---------------------------------------------------------------------------
// Inner-product weights
// ---------------------------------------------------------------------------

/// Weight `W` of the inner product `⟨a, b⟩_W = aᵀ W b`.
#[derive(Debug, Clone, PartialEq)]
pub enum InnerProductWeight {
    Identity,
    Matrix(DenseMatrix),
}

impl InnerProductWeight {
    /// Validates that `w` is symmetric (relative asymmetry ≤ 1e-12) and
    /// positive definite (Cholesky succeeds).
    pub fn spd(w: DenseMatrix) -> Result<Self, LinalgError> {
        w.require_square()?;
        let asym = w.asymmetry();
        if asym > 1e-12 {
            return Err(LinalgError::NotSymmetric(asym));
        }
        Cholesky::factor(&w)?;
        Ok(Self::Matrix(w))
    }

    pub fn apply(&self, v: &[f64]) -> DenseVector {
        match self {
            Self::Identity => v.to_vec(),
            Self::Matrix(w) => w.matvec(v),
        }
    }

    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Self::Identity => dot(a, b),
            Self::Matrix(w) => dot(a, &w.matvec(b)),
        }
    }

    pub fn norm(&self, a: &[f64]) -> f64 {
        self.inner(a, a).max(0.0).sqrt()
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            Self::Identity => None,
            Self::Matrix(w) => Some(w.nrows()),
        }
    }

    pub fn to_matrix(&self, n: usize) -> DenseMatrix {
        match self {
            Self::Identity => DenseMatrix::identity(n),
            Self::Matrix(w) => w.clone(),
        }
    }
}

/// `aᵀ W b`; with [`InnerProductWeight::Identity`] the Euclidean dot product.
pub fn weighted_inner(a: &[f64], b: &[f64], w: &InnerProductWeight) -> Result<f64, LinalgError> {
    if a.len() != b.len() {
        return Err(LinalgError::DimensionMismatch { expected: a.len(), found: b.len() });
    }
    if let Some(n) = w.dim() {
        if n != a.len() {
            return Err(LinalgError::DimensionMismatch { expected: n, found: a.len() });
        }
    }
    Ok(w.inner(a, b))
}

// ---------------------------------------------------------------------------
// Factorizations
// ---------------------------------------------------------------------------

/// Cholesky factor `W = L Lᵀ` of a symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: DenseMatrix,
}

impl Cholesky {
    pub fn factor(a: &DenseMatrix) -> Result<Self, LinalgError> {
        let n = a.require_square()?;
        let mut l = DenseMatrix::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(LinalgError::NotPositiveDefinite(j));
            }
            let d = d.sqrt();
            l[(j, j)] = d;
            for i in j + 1..n {
                let mut v = a[(i, j)];
                for k in 0..j {
                    v -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = v / d;
            }
        }
        Ok(Self { l })
    }

    pub fn lower(&self) -> &DenseMatrix {
        &self.l
    }

    pub fn solve(&self, rhs: &[f64]) -> DenseVector {
        let n = self.l.nrows();
        let mut x = rhs.to_vec();
        for i in 0..n {
            let mut v = x[i];
            for k in 0..i {
                v -= self.l[(i, k)] * x[k];
            }
            x[i] = v / self.l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut v = x[i];
            for k in i + 1..n {
                v -= self.l[(k, i)] * x[k];
            }
            x[i] = v / self.l[(i, i)];
        }
        x
    }
}

/// `true` when Cholesky succeeds on the symmetric part of `a`.
pub fn is_positive_definite(a: &DenseMatrix) -> bool {
    a.is_square() && Cholesky::factor(&a.symmetric_part()).is_ok()
}

/// Bunch–Kaufman symmetric indefinite factorization `P A Pᵀ = L D Lᵀ` with
/// 1×1 and 2×2 diagonal blocks.
#[derive(Debug, Clone)]
pub struct SymmetricFactorization {
    n: usize,
    /// Unit lower triangular factor (strict lower part used).
    l: DenseMatrix,
    /// Diagonal blocks: `d[(k, k)]`, plus `d[(k + 1, k)]` for 2×2 blocks.
    d: DenseMatrix,
    /// `perm[i]` is the original index placed at position `i`.
    perm: Vec<usize>,
    /// `block[k]` is 1 or 2 at the first index of each block, 0 on the second
    /// row of a 2×2 block.
    block: Vec<u8>,
}

impl SymmetricFactorization {
    pub fn factor(b: &DenseMatrix) -> Result<Self, LinalgError> {
        let n = b.require_square()?;
        let alpha = (1.0 + 17f64.sqrt()) / 8.0;
        let scale = b.max_abs();
        let zero_tol = PIVOT_TOL * scale;
        let mut a = b.symmetric_part();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut block = vec![0u8; n];
        let mut d = DenseMatrix::zeros(n, n);

        let swap = |a: &mut DenseMatrix, perm: &mut Vec<usize>, i: usize, j: usize| {
            if i == j {
                return;
            }
            for c in 0..n {
                let t = a[(i, c)];
                a[(i, c)] = a[(j, c)];
                a[(j, c)] = t;
            }
            for r in 0..n {
                let t = a[(r, i)];
                a[(r, i)] = a[(r, j)];
                a[(r, j)] = t;
            }
            perm.swap(i, j);
        };

        let mut k = 0;
        while k < n {
            let absakk = a[(k, k)].abs();
            let (imax, colmax) = (k + 1..n)
                .map(|i| (i, a[(i, k)].abs()))
                .fold((k, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best });

            if absakk.max(colmax) <= zero_tol {
                return Err(LinalgError::Singular(k));
            }

            let two_by_two = if absakk >= alpha * colmax {
                false
            } else {
                let rowmax = (k..n)
                    .filter(|&j| j != imax)
                    .map(|j| a[(imax, j)].abs())
                    .fold(0.0_f64, f64::max);
                if absakk * rowmax >= alpha * colmax * colmax {
                    false
                } else if a[(imax, imax)].abs() >= alpha * rowmax {
                    swap(&mut a, &mut perm, k, imax);
                    false
                } else {
                    swap(&mut a, &mut perm, k + 1, imax);
                    true
                }
            };

            if !two_by_two {
                let dkk = a[(k, k)];
                if dkk.abs() <= zero_tol {
                    return Err(LinalgError::Singular(k));
                }
                d[(k, k)] = dkk;
                block[k] = 1;
                for i in k + 1..n {
                    a[(i, k)] /= dkk;
                }
                for j in k + 1..n {
                    let ljd = a[(j, k)] * dkk;
                    for i in j..n {
                        let v = a[(i, j)] - a[(i, k)] * ljd;
                        a[(i, j)] = v;
                        a[(j, i)] = v;
                    }
                }
                k += 1;
            } else {
                let (p, q, r) = (a[(k, k)], a[(k + 1, k)], a[(k + 1, k + 1)]);
                let det = p * r - q * q;
                if det.abs() <= PIVOT_TOL * (p * r).abs().max(q * q) || det == 0.0 {
                    return Err(LinalgError::Singular(k));
                }
                d[(k, k)] = p;
                d[(k + 1, k)] = q;
                d[(k + 1, k + 1)] = r;
                block[k] = 2;
                block[k + 1] = 0;
                // Columns of L: [a_ik, a_i,k+1] D⁻¹.
                for i in k + 2..n {
                    let (x, y) = (a[(i, k)], a[(i, k + 1)]);
                    a[(i, k)] = (r * x - q * y) / det;
                    a[(i, k + 1)] = (p * y - q * x) / det;
                }
                for j in k + 2..n {
                    let (xj, yj) = (a[(j, k)] * p + a[(j, k + 1)] * q, a[(j, k)] * q + a[(j, k + 1)] * r);
                    for i in j..n {
                        let v = a[(i, j)] - a[(i, k)] * xj - a[(i, k + 1)] * yj;
                        a[(i, j)] = v;
                        a[(j, i)] = v;
                    }
                }
                k += 2;
            }
        }

        let mut l = DenseMatrix::identity(n);
        for i in 0..n {
            for j in 0..i {
                // Within a 2×2 block the (k+1, k) entry belongs to D.
                if block[j] == 2 && i == j + 1 {
                    continue;
                }
                l[(i, j)] = a[(i, j)];
            }
        }
        Ok(Self { n, l, d, perm, block })
    }

    /// `true` when every pivot block is a positive 1×1 block.
    pub fn is_positive_definite(&self) -> bool {
        (0..self.n).all(|k| self.block[k] == 1 && self.d[(k, k)] > 0.0)
    }

    pub fn solve(&self, rhs: &[f64]) -> DenseVector {
        let n = self.n;
        assert_eq!(rhs.len(), n, "rhs dimension mismatch");
        let mut z: DenseVector = self.perm.iter().map(|&p| rhs[p]).collect();
        for i in 0..n {
            let mut v = z[i];
            for k in 0..i {
                v -= self.l[(i, k)] * z[k];
            }
            z[i] = v;
        }
        let mut k = 0;
        while k < n {
            if self.block[k] == 1 {
                z[k] /= self.d[(k, k)];
                k += 1;
            } else {
                let (p, q, r) = (self.d[(k, k)], self.d[(k + 1, k)], self.d[(k + 1, k + 1)]);
                let det = p * r - q * q;
                let (x, y) = (z[k], z[k + 1]);
                z[k] = (r * x - q * y) / det;
                z[k + 1] = (p * y - q * x) / det;
                k += 2;
            }
        }
        for i in (0..n).rev() {
            let mut v = z[i];
            for k in i + 1..n {
                v -= self.l[(k, i)] * z[k];
            }
            z[i] = v;
        }
        let mut x = vec![0.0; n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = z[i];
        }
        x
    }
}

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct LuFactorization {
    lu: DenseMatrix,
    perm: Vec<usize>,
}

impl LuFactorization {
    pub fn factor(b: &DenseMatrix) -> Result<Self, LinalgError> {
        let n = b.require_square()?;
        let zero_tol = PIVOT_TOL * b.max_abs();
        let mut lu = b.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[(i, k)].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax <= zero_tol {
                return Err(LinalgError::Singular(k));
            }
            if p != k {
                for c in 0..n {
                    let t = lu[(k, c)];
                    lu[(k, c)] = lu[(p, c)];
                    lu[(p, c)] = t;
                }
                perm.swap(k, p);
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f != 0.0 {
                    for j in k + 1..n {
                        lu[(i, j)] -= f * lu[(k, j)];
                    }
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn solve(&self, rhs: &[f64]) -> DenseVector {
        let n = self.lu.nrows();
        assert_eq!(rhs.len(), n, "rhs dimension mismatch");
        let mut x: DenseVector = self.perm.iter().map(|&p| rhs[p]).collect();
        for i in 0..n {
            let mut v = x[i];
            for k in 0..i {
                v -= self.lu[(i, k)] * x[k];
            }
            x[i] = v;
        }
        for i in (0..n).rev() {
            let mut v = x[i];
            for k in i + 1..n {
                v -= self.lu[(i, k)] * x[k];
            }
            x[i] = v / self.lu[(i, i)];
        }
        x
    }
}

fn check_rhs(b: &DenseMatrix, rhs: &[f64]) -> Result<(), LinalgError> {
    let n = b.require_square()?;
    if rhs.len() != n {
        return Err(LinalgError::DimensionMismatch { expected: n, found: rhs.len() });
    }
    Ok(())
}

/// Solves `B x = rhs` for symmetric (possibly indefinite) `B`.
pub fn solve_symmetric(b: &DenseMatrix, rhs: &[f64]) -> Result<DenseVector, LinalgError> {
    check_rhs(b, rhs)?;
    Ok(SymmetricFactorization::factor(b)?.solve(rhs))
}

/// Solves `B x = rhs` for general square `B`.
pub fn solve_general(b: &DenseMatrix, rhs: &[f64]) -> Result<DenseVector, LinalgError> {
    check_rhs(b, rhs)?;
    Ok(LuFactorization::factor(b)?.solve(rhs))
}

/// Inverse of a general square matrix via LU.
pub fn inverse(b: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
    let n = b.require_square()?;
    let lu = LuFactorization::factor(b)?;
    let cols: Vec<DenseVector> = (0..n).map(|j| lu.solve(&unit_vector(n, j))).collect();
    Ok(DenseMatrix::from_columns(n, &cols))
}

// ---------------------------------------------------------------------------
// Spectral helpers
// ---------------------------------------------------------------------------

/// Singular values of `e`, in no particular order.
pub fn singular_values(e: &DenseMatrix) -> DenseVector {
    e.to_nalgebra().singular_values().iter().copied().collect()
}

/// Orthonormal basis (as columns) of the right singular vectors of `e` whose
/// singular values are at most `tol · σ_max(e)`. The zero matrix has the
/// whole space as kernel. `e` is expected to be square.
pub fn kernel_basis(e: &DenseMatrix, tol: f64) -> DenseMatrix {
    let n = e.ncols();
    let svd = e.to_nalgebra().svd(false, true);
    let sigma_max = svd.singular_values.iter().fold(0.0_f64, |m, &s| m.max(s));
    if sigma_max == 0.0 {
        return DenseMatrix::identity(n);
    }
    let v_t = svd.v_t.expect("right singular vectors were requested");
    let mut cols: Vec<DenseVector> = Vec::new();
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s <= tol * sigma_max {
            cols.push((0..n).map(|j| v_t[(i, j)]).collect());
        }
    }
    DenseMatrix::from_columns(n, &cols)
}

/// Eigendecomposition of a symmetric matrix: `(eigenvalues, eigenvectors as columns)`.
pub fn symmetric_eigen(a: &DenseMatrix) -> (DenseVector, DenseMatrix) {
    let eig = a.symmetric_part().to_nalgebra().symmetric_eigen();
    (eig.eigenvalues.iter().copied().collect(), DenseMatrix::from_nalgebra(&eig.eigenvectors))
}

/// `f(A)` for symmetric `A`, applied through the eigendecomposition.
pub fn symmetric_function(a: &DenseMatrix, f: impl Fn(f64) -> f64) -> DenseMatrix {
    let (vals, vecs) = symmetric_eigen(a);
    let n = vals.len();
    let mut out = DenseMatrix::zeros(n, n);
    for (k, &lam) in vals.iter().enumerate() {
        let fl = f(lam);
        for i in 0..n {
            let vik = vecs[(i, k)] * fl;
            for j in 0..n {
                out[(i, j)] += vik * vecs[(j, k)];
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Geometry
// ---------------------------------------------------------------------------

/// `W`-orthogonal projection of `s` onto the column span of `basis`.
pub fn project_onto_span(
    s: &[f64],
    basis: &DenseMatrix,
    w: &InnerProductWeight,
) -> Result<DenseVector, LinalgError> {
    let r = basis.ncols();
    if r == 0 {
        return Ok(vec![0.0; s.len()]);
    }
    if basis.nrows() != s.len() {
        return Err(LinalgError::DimensionMismatch { expected: basis.nrows(), found: s.len() });
    }
    let cols = basis.columns();
    let wcols: Vec<DenseVector> = cols.iter().map(|c| w.apply(c)).collect();
    let mut gram = DenseMatrix::zeros(r, r);
    for i in 0..r {
        for j in 0..r {
            gram[(i, j)] = dot(&cols[i], &wcols[j]);
        }
    }
    let rhs: DenseVector = wcols.iter().map(|wc| dot(wc, s)).collect();
    let coef = solve_symmetric(&gram, &rhs)?;
    Ok(basis.matvec(&coef))
}

/// Principal angle in degrees between `s` and the column span of `basis`
/// under `⟨·,·⟩_W`, as `arccos(‖proj‖_W / ‖s‖_W)`. An empty basis gives 90°.
pub fn angle_to_subspace(
    s: &[f64],
    basis: &DenseMatrix,
    w: &InnerProductWeight,
) -> Result<f64, LinalgError> {
    let s_norm = w.norm(s);
    if s_norm == 0.0 {
        return Err(LinalgError::ZeroVector);
    }
    if basis.ncols() == 0 {
        return Ok(90.0);
    }
    let proj = project_onto_span(s, basis, w)?;
    let c = (w.norm(&proj) / s_norm).clamp(0.0, 1.0);
    Ok(c.acos().to_degrees())
}

/// `‖M X M‖_F`.
pub fn weighted_frobenius_error(x: &DenseMatrix, m: &DenseMatrix) -> Result<f64, LinalgError> {
    if x.nrows() != m.nrows() || x.ncols() != m.ncols() {
        return Err(LinalgError::DimensionMismatch { expected: m.nrows(), found: x.nrows() });
    }
    Ok(m.matmul(x).matmul(m).frobenius_norm())
}

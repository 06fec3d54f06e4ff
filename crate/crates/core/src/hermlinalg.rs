//! Dense Hermitian and positive-semidefinite linear algebra.
//!
//! Everything downstream (means, Choi matrices, Radon–Nikodym pairs) is built
//! on the three carriers defined here:
//!
//! * [`HermitianMatrix`]: a square complex matrix that is self-adjoint after
//!   construction-time symmetrization,
//! * [`PsdMatrix`]: a Hermitian matrix whose smallest eigenvalue is above
//!   `-TOL_PSD * max(1, ‖A‖)`, with a lazily cached spectral decomposition,
//! * [`Projection`]: an orthogonal projection together with an orthonormal
//!   basis of its range.
//!
//! Numerical rank is decided by a single relative cutoff: an eigenvalue counts
//! as nonzero when it exceeds `rank_rtol * λ_max`. Matrix functions, supports
//! and pseudo-inverses all use the same rule so that ranges stay consistent.

use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{shape_err, Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Allowed negative drift of the smallest eigenvalue, relative to `max(1, ‖A‖)`.
pub const TOL_PSD: f64 = 1e-9;
/// Allowed asymmetry `|a_ij - conj(a_ji)|`, relative to `max(1, max |a_ij|)`.
pub const TOL_HERM: f64 = 1e-10;
/// Reconstruction tolerance factor; see [`recon_tol`].
pub const TOL_RECON_REL: f64 = 1e-8;
/// Relative eigenvalue cutoff used for numerical rank.
pub const RANK_RTOL: f64 = 1e-10;

const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_ITER: usize = 10_000;

pub fn recon_tol(scale: f64) -> f64 {
    TOL_RECON_REL * scale.max(1.0)
}

pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Operator (spectral) norm of an arbitrary complex matrix.
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().iter().fold(0.0_f64, |acc, &s| acc.max(s))
}

/// Kronecker product `a ⊗ b` with row index `i_a * rows(b) + i_b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    entries: CMatrix,
}

impl HermitianMatrix {
    /// Validates squareness, finiteness and self-adjointness within
    /// [`TOL_HERM`], then replaces the entries by `(M + M*)/2`.
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(shape_err("Hermitian matrix must be square", m.nrows(), m.ncols()));
        }
        if m.nrows() == 0 {
            return Err(Error::InvalidInput("dimension must be at least 1".into()));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("matrix has non-finite entries".into()));
        }
        let asym = max_abs(&(&m - m.adjoint()));
        let allowed = TOL_HERM * max_abs(&m).max(1.0);
        if asym > allowed {
            return Err(Error::InvalidInput(format!("matrix is not Hermitian (asymmetry {asym:e} > {allowed:e})")));
        }
        Ok(Self::symmetrized(m))
    }

    /// Symmetrizes without validation; for values computed from Hermitian
    /// inputs whose asymmetry is pure rounding.
    pub(crate) fn symmetrized(m: CMatrix) -> Self {
        let entries = (&m + m.adjoint()).scale(0.5);
        Self { entries }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        let m = CMatrix::from_fn(n, n, |i, j| if i == j { c64(diag[i], 0.0) } else { c64(0.0, 0.0) });
        Self::new(m)
    }

    /// Builds from real row-major entries.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Shape("rows must form a square matrix".into()));
        }
        Self::new(CMatrix::from_fn(n, n, |i, j| c64(rows[i][j], 0.0)))
    }

    pub fn identity(n: usize) -> Self {
        Self { entries: CMatrix::identity(n, n) }
    }

    pub fn zeros(n: usize) -> Self {
        Self { entries: CMatrix::zeros(n, n) }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_matrix(self) -> CMatrix {
        self.entries
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.entries)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        same_dim(self.dim(), other.dim())?;
        Ok(Self { entries: &self.entries + &other.entries })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        same_dim(self.dim(), other.dim())?;
        Ok(Self { entries: &self.entries - &other.entries })
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { entries: self.entries.map(|z| z * c) }
    }

    pub fn trace(&self) -> f64 {
        self.entries.diagonal().iter().map(|z| z.re).sum()
    }
}

pub(crate) fn same_dim(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(shape_err("dimension mismatch", a, b))
    }
}

/// Eigen-decomposition with eigenvalues in ascending order. Columns of
/// `vectors` are the corresponding orthonormal eigenvectors.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Spectrum {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// Spectral norm of the underlying Hermitian matrix.
    pub fn norm(&self) -> f64 {
        self.min().abs().max(self.max().abs())
    }

    /// `U diag(f(λ)) U*`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &lambda) in self.values.iter().enumerate() {
            let fl = f(lambda);
            for i in 0..n {
                scaled[(i, j)] *= fl;
            }
        }
        &scaled * self.vectors.adjoint()
    }

    /// Numerical rank cutoff `rank_rtol * max(λ_max, 0)`.
    pub fn cutoff(&self, rank_rtol: f64) -> f64 {
        rank_rtol * self.max().max(0.0)
    }

    /// Eigenvectors whose eigenvalue satisfies `keep`, as columns.
    pub fn columns_where(&self, keep: impl Fn(f64) -> bool) -> CMatrix {
        let idx: Vec<usize> = (0..self.values.len()).filter(|&j| keep(self.values[j])).collect();
        let n = self.vectors.nrows();
        CMatrix::from_fn(n, idx.len(), |i, k| self.vectors[(i, idx[k])])
    }
}

pub fn eigh(h: &HermitianMatrix) -> Result<Spectrum> {
    eigh_raw(h.matrix())
}

fn eigh_raw(m: &CMatrix) -> Result<Spectrum> {
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    // nalgebra's complex Hermitian solver loses accuracy on badly conditioned
    // input, so diagonalize the real embedding [[X, -Y], [Y, X]] of X + iY
    let eig = real_embedding(m)
        .try_symmetric_eigen(EIGEN_EPS, EIGEN_MAX_ITER)
        .ok_or_else(|| Error::NonConvergence("Hermitian eigensolver".into()))?;
    Ok(from_embedding(m, &eig.eigenvectors))
}

fn real_embedding(m: &CMatrix) -> DMatrix<f64> {
    let n = m.nrows();
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let z = m[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Every eigenvector `[u; v]` of the embedding gives a unit eigenvector
/// `u + iv` of the Hermitian matrix, and each eigenvalue shows up twice.
/// Pivoted Gram–Schmidt picks `n` orthonormal ones out of the `2n` images.
fn from_embedding(m: &CMatrix, real_vectors: &DMatrix<f64>) -> Spectrum {
    let n = m.nrows();
    let mut cand: Vec<CMatrix> = (0..2 * n)
        .map(|k| CMatrix::from_fn(n, 1, |i, _| c64(real_vectors[(i, k)], real_vectors[(i + n, k)])))
        .collect();
    let mut picked: Vec<CMatrix> = Vec::with_capacity(n);
    for _ in 0..n {
        let (best, _) = cand
            .iter()
            .enumerate()
            .map(|(k, z)| (k, z.norm()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("candidates remain");
        let z = cand.swap_remove(best);
        let q = &z / c64(z.norm(), 0.0);
        for c in cand.iter_mut() {
            let proj = q.adjoint() * &*c;
            *c -= &q * proj[(0, 0)];
        }
        picked.push(q);
    }
    let mut pairs: Vec<(f64, CMatrix)> = picked.into_iter().map(|q| ((q.adjoint() * m * &q)[(0, 0)].re, q)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let values = pairs.iter().map(|p| p.0).collect();
    let vectors = CMatrix::from_fn(n, n, |i, k| pairs[k].1[(i, 0)]);
    Spectrum { values, vectors }
}

/// True iff `λ_min(H) ≥ -tol * max(1, ‖H‖)`.
pub fn is_psd(h: &HermitianMatrix, tol: f64) -> bool {
    match eigh(h) {
        Ok(s) => s.min() >= -tol * s.norm().max(1.0),
        Err(_) => false,
    }
}

/// Hermitian positive-semidefinite matrix with a lazily cached spectrum.
#[derive(Clone, Debug)]
pub struct PsdMatrix {
    herm: HermitianMatrix,
    spectrum: OnceLock<Spectrum>,
}

impl PartialEq for PsdMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.herm == other.herm
    }
}

impl PsdMatrix {
    pub fn new(herm: HermitianMatrix) -> Result<Self> {
        let spectrum = eigh(&herm)?;
        let allowed = TOL_PSD * spectrum.norm().max(1.0);
        if spectrum.min() < -allowed {
            return Err(Error::NotPsd { min_eigenvalue: spectrum.min(), allowed });
        }
        let cell = OnceLock::new();
        let _ = cell.set(spectrum);
        Ok(Self { herm, spectrum: cell })
    }

    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        Self::new(HermitianMatrix::new(m)?)
    }

    /// Wraps a value that is PSD by construction (sums, scalings, congruences
    /// of PSD matrices). The spectrum is computed on first use.
    pub(crate) fn trusted(m: CMatrix) -> Self {
        Self { herm: HermitianMatrix::symmetrized(m), spectrum: OnceLock::new() }
    }

    /// Wraps a computed value that should be PSD, failing with
    /// [`Error::Numerical`] when rounding pushed it outside the PSD cone.
    pub(crate) fn computed(m: CMatrix, what: &str) -> Result<Self> {
        Self::new(HermitianMatrix::symmetrized(m)).map_err(|e| match e {
            Error::NotPsd { min_eigenvalue, allowed } => Error::Numerical(format!(
                "{what} left the PSD cone (min eigenvalue {min_eigenvalue:e}, allowed {allowed:e})"
            )),
            other => other,
        })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(HermitianMatrix::from_real_diagonal(diag)?)
    }

    pub fn identity(n: usize) -> Self {
        Self::trusted(CMatrix::identity(n, n))
    }

    pub fn zeros(n: usize) -> Self {
        Self::trusted(CMatrix::zeros(n, n))
    }

    /// `v v*` for a column vector `v`.
    pub fn outer(v: &CMatrix) -> Self {
        Self::trusted(v * v.adjoint())
    }

    pub fn spectrum(&self) -> &Spectrum {
        self.spectrum.get_or_init(|| {
            // entries are finite and Hermitian; only an iteration-cap miss
            // lands in the fallback, which runs the solver without a cap
            eigh(&self.herm).unwrap_or_else(|_| {
                let m = self.herm.matrix();
                from_embedding(m, &real_embedding(m).symmetric_eigen().eigenvectors)
            })
        })
    }

    pub fn dim(&self) -> usize {
        self.herm.dim()
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.herm
    }

    pub fn matrix(&self) -> &CMatrix {
        self.herm.matrix()
    }

    pub fn into_matrix(self) -> CMatrix {
        self.herm.into_matrix()
    }

    /// Spectral norm, i.e. the largest eigenvalue.
    pub fn norm(&self) -> f64 {
        self.spectrum().max().max(0.0)
    }

    pub fn trace(&self) -> f64 {
        self.herm.trace()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.spectrum().min()
    }

    pub fn rank(&self, rank_rtol: f64) -> usize {
        let s = self.spectrum();
        let cut = s.cutoff(rank_rtol);
        s.values.iter().filter(|&&l| l > cut).count()
    }

    /// Full numerical rank under the relative cutoff.
    pub fn is_invertible(&self, rank_rtol: f64) -> bool {
        self.norm() > 0.0 && self.rank(rank_rtol) == self.dim()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        same_dim(self.dim(), other.dim())?;
        Ok(Self::trusted(self.matrix() + other.matrix()))
    }

    /// `c · A` for `c ≥ 0`.
    pub fn scale(&self, c: f64) -> Result<Self> {
        if !c.is_finite() || c < 0.0 {
            return Err(Error::Domain(format!("PSD scaling factor must be finite and nonnegative, got {c}")));
        }
        Ok(Self::trusted(self.matrix().map(|z| z * c)))
    }

    /// `X A X*`, PSD for any `X` of matching column count.
    pub fn congruence(&self, x: &CMatrix) -> Result<Self> {
        same_dim(x.ncols(), self.dim())?;
        Ok(Self::trusted(x * self.matrix() * x.adjoint()))
    }

    /// Difference `self - other` as a Hermitian matrix.
    pub fn minus(&self, other: &Self) -> Result<HermitianMatrix> {
        self.herm.sub(&other.herm)
    }

    /// Applies a scalar function to the spectrum, zeroing eigenvalues at or
    /// below the numerical rank cutoff.
    pub(crate) fn map_spectrum(&self, rank_rtol: f64, f: impl Fn(f64) -> f64) -> CMatrix {
        let s = self.spectrum();
        let cut = s.cutoff(rank_rtol);
        s.apply(|l| if l > cut { f(l) } else { 0.0 })
    }
}

/// Orthogonal projection, stored with an orthonormal basis of its range.
#[derive(Clone, Debug)]
pub struct Projection {
    base: PsdMatrix,
    basis: CMatrix,
}

impl PartialEq for Projection {
    fn eq(&self, other: &Self) -> bool {
        self.base == other.base
    }
}

impl Projection {
    /// Validates `P = P*`, `P² = P` and a `{0, 1}` spectrum.
    pub fn new(base: PsdMatrix) -> Result<Self> {
        let p = base.matrix();
        let idem = max_abs(&(p * p - p));
        if idem > recon_tol(1.0) {
            return Err(Error::InvalidInput(format!("matrix is not idempotent (residual {idem:e})")));
        }
        let s = base.spectrum();
        if s.values.iter().any(|&l| l.abs() > TOL_PSD && (l - 1.0).abs() > TOL_PSD) {
            return Err(Error::InvalidInput("projection spectrum must lie in {0, 1}".into()));
        }
        let basis = s.columns_where(|l| l > 0.5);
        Ok(Self { base, basis })
    }

    /// Projection onto the span of orthonormal columns.
    pub(crate) fn from_orthonormal(basis: CMatrix) -> Self {
        let base = PsdMatrix::trusted(&basis * basis.adjoint());
        Self { base, basis }
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_orthonormal(CMatrix::zeros(n, 0))
    }

    pub fn identity(n: usize) -> Self {
        Self::from_orthonormal(CMatrix::identity(n, n))
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    /// Orthonormal basis of the range, one column per dimension.
    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    pub fn matrix(&self) -> &CMatrix {
        self.base.matrix()
    }

    pub fn as_psd(&self) -> &PsdMatrix {
        &self.base
    }

    /// `I - P`.
    pub fn complement(&self) -> Projection {
        let n = self.dim();
        let mut q = CMatrix::identity(n, n);
        q -= self.matrix();
        let s = eigh_raw(&HermitianMatrix::symmetrized(q).into_matrix()).expect("finite projection complement");
        Self::from_orthonormal(s.columns_where(|l| l > 0.5))
    }
}

/// Principal square root; eigenvalues at or below the rank cutoff map to 0.
pub fn psd_sqrt(a: &PsdMatrix) -> PsdMatrix {
    PsdMatrix::trusted(a.map_spectrum(RANK_RTOL, f64::sqrt))
}

/// Moore–Penrose inverse restricted to eigenvalues above `rank_rtol · λ_max`.
pub fn pinv_psd(a: &PsdMatrix, rank_rtol: f64) -> PsdMatrix {
    PsdMatrix::trusted(a.map_spectrum(rank_rtol, |l| 1.0 / l))
}

/// Projection onto the eigenvectors with eigenvalue above `rank_rtol · λ_max`.
pub fn support_projection(a: &PsdMatrix, rank_rtol: f64) -> Projection {
    let s = a.spectrum();
    let cut = s.cutoff(rank_rtol);
    Projection::from_orthonormal(s.columns_where(|l| l > cut && l > 0.0))
}

/// Spectral power `λ ↦ λ^p` for `p ∈ [-1, 1]`, acting on the numerical
/// support only (so negative powers are pseudo-powers and `0 ↦ 0`).
pub fn frac_power_psd(a: &PsdMatrix, p: f64) -> Result<PsdMatrix> {
    if !(-1.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("power must lie in [-1, 1], got {p}")));
    }
    Ok(PsdMatrix::trusted(a.map_spectrum(RANK_RTOL, |l| l.powf(p))))
}

/// Projection onto `ran(P) ∩ ran(Q)`: the common null space of `I-P` and
/// `I-Q`, i.e. the kernel of the PSD matrix `(I-P) + (I-Q)`.
pub fn proj_intersection(p: &Projection, q: &Projection) -> Result<Projection> {
    same_dim(p.dim(), q.dim())?;
    let n = p.dim();
    let mut m = CMatrix::identity(n, n).scale(2.0);
    m -= p.matrix();
    m -= q.matrix();
    let s = eigh_raw(&HermitianMatrix::symmetrized(m).into_matrix())?;
    Ok(Projection::from_orthonormal(s.columns_where(|l| l < TOL_PSD)))
}

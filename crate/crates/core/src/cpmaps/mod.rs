//! Completely positive maps `M_m → M_n` stored through their Choi matrices.
//!
//! Choi convention (0-based): `C[(i·n+k), (j·n+l)] = Φ(e_ij)[k, l]`. A Kraus
//! operator `K` (an `n×m` matrix) contributes `v v*` with `v[i·n+k] = K[k, i]`.

mod states;
pub mod zoo;

use std::fmt;

pub use states::{state_mean_quantities, DensityFunctional, StateMeanQuantities};

use crate::error::{shape_err, Error, Result};
use crate::hermlinalg::{
    c64, kron, max_abs, pinv_psd, recon_tol, same_dim, support_projection, CMatrix, HermitianMatrix, PsdMatrix,
    RANK_RTOL, TOL_PSD,
};
use crate::opmeans::{mean, MeanKind, MeanOptions};

/// Absolute tolerance on `‖Φ(1) - 1‖` and `‖Tr_out C - 1‖`.
pub const TOL_CHANNEL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct CpMap {
    dim_in: usize,
    dim_out: usize,
    choi: PsdMatrix,
    kraus: Option<Vec<CMatrix>>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelFlags {
    pub is_cp: bool,
    pub is_unital: bool,
    pub is_trace_preserving: bool,
    pub unital_residual: f64,
    pub trace_residual: f64,
    pub tolerance: f64,
}

/// Pimsner–Popa type index `inf{λ > 0 : λΦ - id ≥cp 0}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CpIndex {
    Finite(f64),
    Infinite,
}

impl CpIndex {
    pub fn is_finite(&self) -> bool {
        matches!(self, Self::Finite(_))
    }

    pub fn value(&self) -> f64 {
        match self {
            Self::Finite(v) => *v,
            Self::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for CpIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(v) => write!(f, "{v}"),
            Self::Infinite => f.write_str("inf"),
        }
    }
}

fn check_dims(m: usize, n: usize) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(Error::Shape(format!("map dimensions must be positive, got {m}→{n}")));
    }
    Ok(())
}

fn vec_kraus(k: &CMatrix) -> CMatrix {
    let (n, m) = k.shape();
    CMatrix::from_fn(m * n, 1, |r, _| k[(r % n, r / n)])
}

/// `Σ vec(K) vec(K)*` under the fixed convention.
pub fn choi_from_kraus(m: usize, n: usize, kraus: &[CMatrix]) -> Result<CMatrix> {
    check_dims(m, n)?;
    let mut c = CMatrix::zeros(m * n, m * n);
    for k in kraus {
        if k.shape() != (n, m) {
            return Err(Error::Shape(format!("Kraus operator is {:?}, expected ({n}, {m})", k.shape())));
        }
        let v = vec_kraus(k);
        c += &v * v.adjoint();
    }
    Ok(c)
}

/// Assembles the Choi matrix from the images of the matrix units `e_ij`.
pub fn choi_from_action(m: usize, n: usize, action: impl Fn(&CMatrix) -> CMatrix) -> Result<CpMap> {
    check_dims(m, n)?;
    let mut c = CMatrix::zeros(m * n, m * n);
    for i in 0..m {
        for j in 0..m {
            let mut e = CMatrix::zeros(m, m);
            e[(i, j)] = c64(1.0, 0.0);
            let img = action(&e);
            if img.shape() != (n, n) {
                return Err(Error::Shape(format!("action returned {:?}, expected ({n}, {n})", img.shape())));
            }
            c.view_mut((i * n, j * n), (n, n)).copy_from(&img);
        }
    }
    CpMap::from_choi(m, n, c)
}

impl CpMap {
    /// Validates Hermiticity and complete positivity of a raw Choi matrix.
    pub fn from_choi(m: usize, n: usize, choi: CMatrix) -> Result<Self> {
        check_dims(m, n)?;
        if choi.shape() != (m * n, m * n) {
            return Err(Error::Shape(format!("Choi matrix is {:?}, expected {} square", choi.shape(), m * n)));
        }
        let herm = HermitianMatrix::new(choi)?;
        let psd = PsdMatrix::new(herm).map_err(|e| match e {
            Error::NotPsd { min_eigenvalue, .. } => Error::NotCompletelyPositive { min_eigenvalue },
            other => other,
        })?;
        Ok(Self { dim_in: m, dim_out: n, choi: psd, kraus: None })
    }

    pub fn from_choi_psd(m: usize, n: usize, choi: PsdMatrix) -> Result<Self> {
        check_dims(m, n)?;
        same_dim(choi.dim(), m * n)?;
        Ok(Self { dim_in: m, dim_out: n, choi, kraus: None })
    }

    /// `x ↦ Σ K x K*`; every Kraus operator is `n×m`.
    pub fn from_kraus(m: usize, n: usize, kraus: Vec<CMatrix>) -> Result<Self> {
        let c = choi_from_kraus(m, n, &kraus)?;
        Ok(Self { dim_in: m, dim_out: n, choi: PsdMatrix::trusted(c), kraus: Some(kraus) })
    }

    pub fn zero(m: usize, n: usize) -> Result<Self> {
        check_dims(m, n)?;
        Ok(Self { dim_in: m, dim_out: n, choi: PsdMatrix::zeros(m * n), kraus: Some(Vec::new()) })
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn choi(&self) -> &PsdMatrix {
        &self.choi
    }

    /// Kraus operators the map was built from, if any.
    pub fn kraus(&self) -> Option<&[CMatrix]> {
        self.kraus.as_deref()
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.dim_in != other.dim_in || self.dim_out != other.dim_out {
            return Err(Error::Shape(format!(
                "maps {}→{} and {}→{} are not comparable",
                self.dim_in, self.dim_out, other.dim_in, other.dim_out
            )));
        }
        Ok(())
    }

    /// Minimal Kraus family from the Choi eigendecomposition:
    /// `√λ · unvec(v)` for each eigenpair above the rank cutoff.
    pub fn kraus_decompose(&self, rank_rtol: f64) -> Vec<CMatrix> {
        let (m, n) = (self.dim_in, self.dim_out);
        let s = self.choi.spectrum();
        let cut = s.cutoff(rank_rtol);
        s.values
            .iter()
            .enumerate()
            .filter(|&(_, &l)| l > cut && l > 0.0)
            .map(|(c, &l)| {
                let root = l.sqrt();
                CMatrix::from_fn(n, m, |k, i| s.vectors[(i * n + k, c)] * root)
            })
            .collect()
    }

    /// `Φ(X)[k,l] = Σ_{i,j} X[i,j] C[(i·n+k), (j·n+l)]`.
    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        let (m, n) = (self.dim_in, self.dim_out);
        if x.shape() != (m, m) {
            return Err(Error::Shape(format!("input is {:?}, expected ({m}, {m})", x.shape())));
        }
        let c = self.choi.matrix();
        let mut out = CMatrix::zeros(n, n);
        for i in 0..m {
            for j in 0..m {
                let xij = x[(i, j)];
                if xij != c64(0.0, 0.0) {
                    out += c.view((i * n, j * n), (n, n)) * xij;
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Self { dim_in: self.dim_in, dim_out: self.dim_out, choi: self.choi.add(&other.choi)?, kraus: None })
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        Ok(Self { dim_in: self.dim_in, dim_out: self.dim_out, choi: self.choi.scale(c)?, kraus: None })
    }

    pub fn flags(&self, tol: f64) -> ChannelFlags {
        let (m, n) = (self.dim_in, self.dim_out);
        let s = self.choi.spectrum();
        let is_cp = s.min() >= -TOL_PSD * s.norm().max(1.0);
        let one = self.apply(&CMatrix::identity(m, m)).expect("identity has input shape");
        let unital_residual = max_abs(&(one - CMatrix::identity(n, n)));
        let c = self.choi.matrix();
        let traced = CMatrix::from_fn(m, m, |i, j| (0..n).map(|k| c[(i * n + k, j * n + k)]).sum());
        let trace_residual = max_abs(&(traced - CMatrix::identity(m, m)));
        ChannelFlags {
            is_cp,
            is_unital: unital_residual <= tol,
            is_trace_preserving: trace_residual <= tol,
            unital_residual,
            trace_residual,
            tolerance: tol,
        }
    }
}

/// `Φ ≤cp Ψ`, i.e. `C_Ψ - C_Φ ≥ 0` up to `tol · max(1, ‖C_Ψ - C_Φ‖)`.
pub fn leq_cp(phi: &CpMap, psi: &CpMap, tol: f64) -> Result<bool> {
    phi.same_shape(psi)?;
    let diff = psi.choi.minus(&phi.choi)?;
    Ok(crate::hermlinalg::is_psd(&diff, tol))
}

pub fn mean_cp(kind: &MeanKind, phi: &CpMap, psi: &CpMap) -> Result<CpMap> {
    mean_cp_with(kind, phi, psi, &MeanOptions::default())
}

/// Mean of CP maps computed on the Choi matrices.
pub fn mean_cp_with(kind: &MeanKind, phi: &CpMap, psi: &CpMap, opts: &MeanOptions) -> Result<CpMap> {
    phi.same_shape(psi)?;
    let c = mean(kind, &phi.choi, &psi.choi, opts)?;
    CpMap::from_choi_psd(phi.dim_in, phi.dim_out, c)
}

/// PSD status of the block Choi matrix `[[C_Φ, C_Θ], [C_Θ, C_Ψ]]`.
pub fn geo_certificate(phi: &CpMap, psi: &CpMap, theta: &CpMap, tol: f64) -> Result<bool> {
    phi.same_shape(psi)?;
    phi.same_shape(theta)?;
    let d = phi.choi.dim();
    let mut block = CMatrix::zeros(2 * d, 2 * d);
    block.view_mut((0, 0), (d, d)).copy_from(phi.choi.matrix());
    block.view_mut((0, d), (d, d)).copy_from(theta.choi.matrix());
    block.view_mut((d, 0), (d, d)).copy_from(theta.choi.matrix());
    block.view_mut((d, d), (d, d)).copy_from(psi.choi.matrix());
    Ok(crate::hermlinalg::is_psd(&HermitianMatrix::new(block)?, tol))
}

/// Reorders a Kronecker product `C_1 ⊗ C_2` of Choi matrices, whose legs run
/// `(i1, k1, i2, k2)`, into the Choi layout of `Φ_1 ⊗ Φ_2`, whose legs run
/// `(i1, i2, k1, k2)`. Here `i` are input and `k` output indices.
pub fn tensor_legs(product: &CMatrix, m1: usize, n1: usize, m2: usize, n2: usize) -> Result<CMatrix> {
    let d = m1 * n1 * m2 * n2;
    if product.shape() != (d, d) {
        return Err(shape_err("tensor product size", product.nrows(), d));
    }
    // Choi row of (i1, i2, k1, k2) → Kronecker row of (i1, k1, i2, k2)
    let src = |r: usize| {
        let (big_i, big_k) = (r / (n1 * n2), r % (n1 * n2));
        let (i1, i2) = (big_i / m2, big_i % m2);
        let (k1, k2) = (big_k / n2, big_k % n2);
        (i1 * n1 + k1) * (m2 * n2) + (i2 * n2 + k2)
    };
    Ok(CMatrix::from_fn(d, d, |r, c| product[(src(r), src(c))]))
}

/// `Φ_1 ⊗ Φ_2 : M_{m1 m2} → M_{n1 n2}`.
pub fn tensor(phi1: &CpMap, phi2: &CpMap) -> CpMap {
    let prod = kron(phi1.choi.matrix(), phi2.choi.matrix());
    let c = tensor_legs(&prod, phi1.dim_in, phi1.dim_out, phi2.dim_in, phi2.dim_out)
        .expect("Kronecker product has matching size");
    CpMap {
        dim_in: phi1.dim_in * phi2.dim_in,
        dim_out: phi1.dim_out * phi2.dim_out,
        choi: PsdMatrix::trusted(c),
        kraus: None,
    }
}

/// `Ξ ∘ Φ`, applying `Ξ` to each Choi block of `Φ`.
pub fn compose(xi: &CpMap, phi: &CpMap) -> Result<CpMap> {
    if xi.dim_in != phi.dim_out {
        return Err(shape_err("compose: Ξ input vs Φ output", xi.dim_in, phi.dim_out));
    }
    let (m, n, p) = (phi.dim_in, phi.dim_out, xi.dim_out);
    let c = phi.choi.matrix();
    let mut out = CMatrix::zeros(m * p, m * p);
    for i in 0..m {
        for j in 0..m {
            let block = c.view((i * n, j * n), (n, n)).into_owned();
            out.view_mut((i * p, j * p), (p, p)).copy_from(&xi.apply(&block)?);
        }
    }
    Ok(CpMap { dim_in: m, dim_out: p, choi: PsdMatrix::trusted(out), kraus: None })
}

/// With `v = Σ e_i ⊗ e_i`: `+∞` if `v ∉ ran C_Φ`, else `⟨v, C_Φ⁺ v⟩`.
pub fn index_cp(phi: &CpMap) -> Result<CpIndex> {
    if phi.dim_in != phi.dim_out {
        return Err(shape_err("index needs a map on a single algebra", phi.dim_in, phi.dim_out));
    }
    let n = phi.dim_in;
    let mut v = CMatrix::zeros(n * n, 1);
    for i in 0..n {
        v[(i * n + i, 0)] = c64(1.0, 0.0);
    }
    let support = support_projection(&phi.choi, RANK_RTOL);
    let basis = support.basis();
    let projected = basis * (basis.adjoint() * &v);
    if (&v - projected).norm() > TOL_CHANNEL * v.norm() {
        return Ok(CpIndex::Infinite);
    }
    let inv = pinv_psd(&phi.choi, RANK_RTOL);
    Ok(CpIndex::Finite((v.adjoint() * inv.matrix() * &v)[(0, 0)].re))
}

/// Reassembly check for a Kraus family: residual and its tolerance.
pub fn kraus_residual(phi: &CpMap, kraus: &[CMatrix]) -> Result<(f64, f64)> {
    let c = choi_from_kraus(phi.dim_in, phi.dim_out, kraus)?;
    Ok((max_abs(&(c - phi.choi.matrix())), recon_tol(phi.choi.norm())))
}

//! Concrete CP maps: channels, conditional expectations, Schur multipliers
//! and functionals.

use super::{choi_from_action, CpMap, DensityFunctional, TOL_CHANNEL};
use crate::error::{Error, Result};
use crate::hermlinalg::{c64, max_abs, CMatrix, HermitianMatrix, PsdMatrix};

fn check_dim(d: usize) -> Result<()> {
    if d == 0 {
        Err(Error::Domain("dimension must be positive".into()))
    } else {
        Ok(())
    }
}

pub fn identity(d: usize) -> Result<CpMap> {
    check_dim(d)?;
    CpMap::from_kraus(d, d, vec![CMatrix::identity(d, d)])
}

/// `Δ(x) = Tr(x)/d · 1`, Choi `I/d`.
pub fn depolarizing(d: usize) -> Result<CpMap> {
    check_dim(d)?;
    let c = CMatrix::identity(d * d, d * d) / c64(d as f64, 0.0);
    CpMap::from_choi_psd(d, d, PsdMatrix::trusted(c))
}

/// `x ↦ U x U*` for a unitary `U`.
pub fn unitary_conj(u: &CMatrix) -> Result<CpMap> {
    if !u.is_square() || u.nrows() == 0 {
        return Err(Error::Domain(format!("unitary must be square, got {:?}", u.shape())));
    }
    let d = u.nrows();
    let defect = max_abs(&(u.adjoint() * u - CMatrix::identity(d, d)));
    if defect > TOL_CHANNEL {
        return Err(Error::Domain(format!("matrix is not unitary (‖U*U - 1‖ = {defect:e})")));
    }
    CpMap::from_kraus(d, d, vec![u.clone()])
}

/// `x ↦ A x A*` for any `n×m` matrix `A`.
pub fn conjugation(a: &CMatrix) -> Result<CpMap> {
    if a.is_empty() {
        return Err(Error::Domain("conjugating matrix is empty".into()));
    }
    CpMap::from_kraus(a.ncols(), a.nrows(), vec![a.clone()])
}

/// Schur multiplier `x ↦ A ∘ x`, completely positive iff `A ≥ 0`.
pub fn schur(a: &PsdMatrix) -> Result<CpMap> {
    let d = a.dim();
    let mut c = CMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            c[(i * d + i, j * d + j)] = a.matrix()[(i, j)];
        }
    }
    CpMap::from_choi_psd(d, d, PsdMatrix::trusted(c))
}

/// Schur multiplier from a raw matrix, rejecting non-PSD symbols.
pub fn schur_from_matrix(a: CMatrix) -> Result<CpMap> {
    let herm = HermitianMatrix::new(a).map_err(|e| Error::Domain(format!("Schur symbol: {e}")))?;
    let psd = PsdMatrix::new(herm).map_err(|e| Error::Domain(format!("Schur symbol: {e}")))?;
    schur(&psd)
}

/// Diagonal compression `x ↦ Σ e_ii x e_ii` onto the diagonal masa of `M_d`.
pub fn cond_exp_diag(d: usize) -> Result<CpMap> {
    check_dim(d)?;
    let kraus = (0..d)
        .map(|i| {
            let mut e = CMatrix::zeros(d, d);
            e[(i, i)] = c64(1.0, 0.0);
            e
        })
        .collect();
    CpMap::from_kraus(d, d, kraus)
}

pub fn rotation(theta: f64) -> CMatrix {
    let (c, s) = (theta.cos(), theta.sin());
    CMatrix::from_row_slice(2, 2, &[c64(c, 0.0), c64(-s, 0.0), c64(s, 0.0), c64(c, 0.0)])
}

/// `x ↦ u E(u* x u) u*` with `E` the diagonal expectation on `M_2` and `u`
/// the real rotation by `θ`.
pub fn cond_exp_rotated(theta: f64) -> Result<CpMap> {
    if !theta.is_finite() {
        return Err(Error::Domain(format!("rotation angle must be finite, got {theta}")));
    }
    let u = rotation(theta);
    let kraus = (0..2)
        .map(|i| {
            let col = u.column(i).into_owned();
            &col * col.adjoint()
        })
        .collect();
    CpMap::from_kraus(2, 2, kraus)
}

/// Conditional expectation on `M_n ⊗ M_n` onto one tensor factor, with the
/// diagonal state `Tr(diag(w) ·)` on the other factor.
///
/// `factor = 1`: `x_1 ⊗ x_2 ↦ x_1 ⊗ ψ(x_2) 1`.
/// `factor = 2`: `x_1 ⊗ x_2 ↦ ψ(x_1) 1 ⊗ x_2`.
pub fn cond_exp_tensor(factor: u8, weights: &[f64]) -> Result<CpMap> {
    let n = weights.len();
    if n == 0 {
        return Err(Error::Domain("state weights are empty".into()));
    }
    if !weights.iter().all(|&w| w > 0.0 && w.is_finite()) {
        return Err(Error::Domain(format!("state weights must be positive, got {weights:?}")));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::Domain(format!("state weights must sum to 1, got {total}")));
    }
    if factor != 1 && factor != 2 {
        return Err(Error::Domain(format!("tensor factor must be 1 or 2, got {factor}")));
    }
    let d = n * n;
    choi_from_action(d, d, |e| {
        // e = e_IJ with I = i1·n + i2, J = j1·n + j2
        let (row, col) = e.iter().position(|z| z.re == 1.0).map(|p| (p % d, p / d)).expect("matrix unit");
        let (i1, i2, j1, j2) = (row / n, row % n, col / n, col % n);
        let mut out = CMatrix::zeros(d, d);
        if factor == 1 && i2 == j2 {
            for k in 0..n {
                out[(i1 * n + k, j1 * n + k)] = c64(weights[i2], 0.0);
            }
        } else if factor == 2 && i1 == j1 {
            for k in 0..n {
                out[(k * n + i2, k * n + j2)] = c64(weights[i1], 0.0);
            }
        }
        out
    })
}

/// `φ(x) = Tr(ρ x)` as a map `M_n → M_1`; its Choi matrix is `ρᵀ`.
pub fn functional(rho: &DensityFunctional) -> Result<CpMap> {
    let t = rho.rho().matrix().transpose();
    CpMap::from_choi_psd(rho.dim(), 1, PsdMatrix::trusted(t))
}

/// `z ↦ z A` as a map `M_1 → M_n`; its Choi matrix is `A`.
pub fn scalar_embedding(a: &PsdMatrix) -> Result<CpMap> {
    CpMap::from_choi_psd(1, a.dim(), a.clone())
}

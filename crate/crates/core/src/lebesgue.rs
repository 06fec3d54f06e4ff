//! Lebesgue decomposition `Ψ = Ψ_ac + Ψ_s` of a CP map relative to `Φ`.
//!
//! With `C = C_Φ + C_Ψ`, the Radon–Nikodym pair is `A' = C^{+1/2} C_Φ C^{+1/2}`,
//! `B' = C^{+1/2} C_Ψ C^{+1/2}`, so `A' + B'` is the support projection of
//! `C`. The absolutely continuous part is `C^{1/2} P' B' P' C^{1/2}` where
//! `P'` is the support of `A'`.

use crate::cpmaps::CpMap;
use crate::error::{Error, Result};
use crate::hermlinalg::{
    frac_power_psd, max_abs, pinv_psd, psd_sqrt, recon_tol, support_projection, Projection, PsdMatrix, RANK_RTOL,
    TOL_PSD,
};
use crate::opmeans::parallel_sum;

/// Absolute eigenvalue cutoff for `supp A'`; the spectrum of `A'` lies in `[0, 1]`.
pub const RN_SUPPORT_CUTOFF: f64 = 1e-10;

/// `1e-6 · max(1, ‖C_Ψ‖)`.
pub fn tol_lim(psi: &CpMap) -> f64 {
    1e-6 * psi.choi().norm().max(1.0)
}

#[derive(Clone, Debug)]
pub struct RnPair {
    pub c_half: PsdMatrix,
    pub a_prime: PsdMatrix,
    pub b_prime: PsdMatrix,
    pub support: Projection,
}

impl RnPair {
    /// Projection onto the support of `A'`.
    pub fn phi_support(&self) -> Projection {
        rn_support(&self.a_prime)
    }

    /// Projection onto the support of `B'`.
    pub fn psi_support(&self) -> Projection {
        rn_support(&self.b_prime)
    }
}

fn rn_support(a: &PsdMatrix) -> Projection {
    let s = a.spectrum();
    // support_projection with a relative cutoff of c/λ_max gives the absolute cutoff c
    let rtol = if s.max() > 0.0 { RN_SUPPORT_CUTOFF / s.max() } else { 1.0 };
    support_projection(a, rtol)
}

#[derive(Clone, Debug)]
pub struct LebesgueSplit {
    pub ac: CpMap,
    pub sing: CpMap,
    pub phi_support: Projection,
    /// Least `α` with `C_ac ≤ α C_Φ`; `+∞` when no such `α` exists.
    pub alpha_min: f64,
}

fn same_shape(phi: &CpMap, psi: &CpMap) -> Result<()> {
    if phi.dim_in() != psi.dim_in() || phi.dim_out() != psi.dim_out() {
        return Err(Error::Shape(format!(
            "maps {}→{} and {}→{} are not comparable",
            phi.dim_in(),
            phi.dim_out(),
            psi.dim_in(),
            psi.dim_out()
        )));
    }
    Ok(())
}

pub fn rn_pair(phi: &CpMap, psi: &CpMap) -> Result<RnPair> {
    same_shape(phi, psi)?;
    let c = phi.choi().add(psi.choi())?;
    let c_half = psd_sqrt(&c);
    let c_inv_half = frac_power_psd(&c, -0.5)?;
    let a_prime = phi.choi().congruence(c_inv_half.matrix())?;
    let b_prime = psi.choi().congruence(c_inv_half.matrix())?;
    let support = support_projection(&c, RANK_RTOL);
    Ok(RnPair { c_half, a_prime, b_prime, support })
}

fn ac_choi(pair: &RnPair) -> Result<PsdMatrix> {
    let p = pair.phi_support();
    let compressed = pair.b_prime.congruence(p.matrix())?;
    compressed.congruence(pair.c_half.matrix())
}

/// Absolutely continuous part `[Φ]Ψ = lim_n (nΦ : Ψ)`.
pub fn ac_part(phi: &CpMap, psi: &CpMap) -> Result<CpMap> {
    let pair = rn_pair(phi, psi)?;
    CpMap::from_choi_psd(psi.dim_in(), psi.dim_out(), ac_choi(&pair)?)
}

/// `2^k Φ : Ψ` for `k = 1, …, ⌈log₂ n_max⌉`, returning the last iterate.
pub fn ac_part_oracle(phi: &CpMap, psi: &CpMap, n_max: u64) -> Result<CpMap> {
    same_shape(phi, psi)?;
    if n_max < 2 {
        return Err(Error::Domain(format!("n_max must be at least 2, got {n_max}")));
    }
    let k_max = 64 - (n_max - 1).leading_zeros();
    let tol = tol_lim(psi);
    let step = |k: u32| parallel_sum(&phi.choi().scale(2f64.powi(k as i32))?, psi.choi());
    let mut prev = step(1)?;
    let mut diff = f64::INFINITY;
    for k in 2..=k_max {
        let next = step(k)?;
        diff = max_abs(&(next.matrix() - prev.matrix()));
        prev = next;
    }
    if k_max >= 2 && diff > tol {
        return Err(Error::NonConvergence(format!("(nΦ : Ψ) moved by {diff:e} > {tol:e} at n = 2^{k_max}")));
    }
    CpMap::from_choi_psd(psi.dim_in(), psi.dim_out(), prev)
}

pub fn decompose(phi: &CpMap, psi: &CpMap) -> Result<LebesgueSplit> {
    let pair = rn_pair(phi, psi)?;
    let mut ac = ac_choi(&pair)?;
    // an ac part at rounding level is the zero map
    if ac.norm() <= RANK_RTOL * psi.choi().norm() {
        ac = PsdMatrix::zeros(ac.dim());
    }
    let diff = psi.choi().minus(&ac)?;
    let sing = PsdMatrix::new(diff).map_err(|e| match e {
        Error::NotPsd { min_eigenvalue, allowed } => {
            Error::Numerical(format!("singular part has eigenvalue {min_eigenvalue:e} below -{allowed:e}"))
        }
        other => other,
    })?;
    // zero the tiny negative eigenvalues the PSD check tolerated
    let sing = if sing.min_eigenvalue() < 0.0 { PsdMatrix::trusted(sing.map_spectrum(0.0, |l| l)) } else { sing };
    let alpha_min = alpha_min(phi.choi(), &ac);
    let (m, n) = (psi.dim_in(), psi.dim_out());
    Ok(LebesgueSplit {
        ac: CpMap::from_choi_psd(m, n, ac)?,
        sing: CpMap::from_choi_psd(m, n, sing)?,
        phi_support: pair.phi_support(),
        alpha_min,
    })
}

/// `λ_max((C_Φ^{1/2})⁺ C_ac (C_Φ^{1/2})⁺)` if `ran C_ac ⊆ ran C_Φ`, else `+∞`.
fn alpha_min(c_phi: &PsdMatrix, c_ac: &PsdMatrix) -> f64 {
    if c_ac.norm() == 0.0 {
        return 0.0;
    }
    let p = support_projection(c_phi, RANK_RTOL);
    let outside = c_ac.matrix() - p.matrix() * c_ac.matrix();
    if max_abs(&outside) > recon_tol(c_ac.norm()) {
        return f64::INFINITY;
    }
    let inv_half = pinv_psd(&psd_sqrt(c_phi), RANK_RTOL);
    c_ac.congruence(inv_half.matrix()).map(|m| m.norm()).unwrap_or(f64::INFINITY)
}

/// `Φ ⊥ Ψ`, i.e. `‖C_Φ : C_Ψ‖ ≤ tol`.
pub fn is_singular(phi: &CpMap, psi: &CpMap, tol: f64) -> Result<bool> {
    same_shape(phi, psi)?;
    Ok(parallel_sum(phi.choi(), psi.choi())?.norm() <= tol)
}

/// `Ψ ≪ Φ`, i.e. `‖C_Ψ - C_ac‖ ≤ tol`.
pub fn is_abs_continuous(psi: &CpMap, phi: &CpMap, tol: f64) -> Result<bool> {
    let ac = ac_part(phi, psi)?;
    Ok(max_abs(&(psi.choi().matrix() - ac.choi().matrix())) <= tol)
}

/// Range criterion for `Ψ ≪ Φ` in the RN picture: `supp B' ≤ supp A'`.
pub fn support_inclusion(pair: &RnPair) -> bool {
    let pb = pair.psi_support();
    let pa = pair.phi_support();
    let leak = pb.matrix() - pa.matrix() * pb.matrix();
    max_abs(&leak) <= 1e-6
}

/// Range criterion for `Φ ⊥ Ψ` in the RN picture: `P'_Φ P'_Ψ = 0`.
pub fn supports_orthogonal(pair: &RnPair, tol: f64) -> bool {
    let pa = pair.phi_support();
    let pb = pair.psi_support();
    max_abs(&(pa.matrix() * pb.matrix())) <= tol.max(TOL_PSD)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermlinalg::CMatrix;

    fn diag_map(d: &[f64]) -> CpMap {
        crate::cpmaps::zoo::scalar_embedding(&PsdMatrix::from_real_diagonal(d).unwrap()).unwrap()
    }

    fn close(a: &CMatrix, b: &CMatrix, tol: f64) {
        let err = max_abs(&(a - b));
        assert!(err <= tol, "error {err:e}\n{a}\n{b}");
    }

    #[test]
    fn rn_pair_examples() {
        let phi = diag_map(&[2.0, 1.0, 0.0]);
        let pair = rn_pair(&phi, &phi).unwrap();
        close(pair.a_prime.matrix(), &(pair.support.matrix() * crate::hermlinalg::c64(0.5, 0.0)), 1e-14);
        close(pair.b_prime.matrix(), pair.a_prime.matrix(), 0.0);
        let pair = rn_pair(&diag_map(&[1.0, 0.0]), &diag_map(&[0.0, 1.0])).unwrap();
        close(pair.a_prime.matrix(), PsdMatrix::from_real_diagonal(&[1.0, 0.0]).unwrap().matrix(), 1e-15);
        close(pair.b_prime.matrix(), PsdMatrix::from_real_diagonal(&[0.0, 1.0]).unwrap().matrix(), 1e-15);
    }

    #[test]
    fn ac_part_examples() {
        let phi = diag_map(&[2.0, 1.0, 0.5]);
        let half = phi.scale(0.5).unwrap();
        close(ac_part(&phi, &half).unwrap().choi().matrix(), half.choi().matrix(), 1e-13);
        let got = ac_part(&diag_map(&[1.0, 0.0]), &diag_map(&[1.0, 1.0])).unwrap();
        close(got.choi().matrix(), diag_map(&[1.0, 0.0]).choi().matrix(), 1e-14);
        let got = ac_part(&diag_map(&[1.0, 0.0]), &diag_map(&[0.0, 1.0])).unwrap();
        close(got.choi().matrix(), &CMatrix::zeros(2, 2), 0.0);
    }

    #[test]
    fn oracle_examples() {
        let cases = [
            (diag_map(&[2.0, 1.0, 0.5]), diag_map(&[1.0, 0.5, 0.25])),
            (diag_map(&[1.0, 0.0]), diag_map(&[1.0, 1.0])),
            (diag_map(&[1.0, 0.0]), diag_map(&[0.0, 1.0])),
        ];
        for (phi, psi) in &cases {
            let exact = ac_part(phi, psi).unwrap();
            let oracle = ac_part_oracle(phi, psi, 1 << 20).unwrap();
            close(oracle.choi().matrix(), exact.choi().matrix(), tol_lim(psi));
        }
        let phi = diag_map(&[3.0, 1.0]);
        close(ac_part_oracle(&phi, &phi, 1 << 20).unwrap().choi().matrix(), phi.choi().matrix(), tol_lim(&phi));
        // a cap of 4 stops at 4Φ:Φ = (4/5)Φ and fails the Cauchy test
        assert!(matches!(ac_part_oracle(&phi, &phi, 4), Err(Error::NonConvergence(_))));
        assert!(matches!(ac_part_oracle(&phi, &phi, 1), Err(Error::Domain(_))));
    }

    #[test]
    fn decompose_examples() {
        let split = decompose(&diag_map(&[1.0, 0.0]), &diag_map(&[1.0, 1.0])).unwrap();
        close(split.ac.choi().matrix(), diag_map(&[1.0, 0.0]).choi().matrix(), 1e-14);
        close(split.sing.choi().matrix(), diag_map(&[0.0, 1.0]).choi().matrix(), 1e-14);
        assert!((split.alpha_min - 1.0).abs() < 1e-12);

        let phi = diag_map(&[2.0, 1.0]);
        let split = decompose(&phi, &diag_map(&[1.0, 3.0])).unwrap();
        assert!(max_abs(split.sing.choi().matrix()) < 1e-13);
        assert!((split.alpha_min - 3.0).abs() < 1e-12);

        let psi = diag_map(&[0.0, 1.0]);
        let split = decompose(&diag_map(&[1.0, 0.0]), &psi).unwrap();
        assert_eq!(split.alpha_min, 0.0);
        close(split.sing.choi().matrix(), psi.choi().matrix(), 1e-15);
    }

    #[test]
    fn predicate_examples() {
        let v = crate::cpmaps::zoo::identity(2).unwrap();
        let w = crate::cpmaps::zoo::unitary_conj(&CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            crate::hermlinalg::c64(1.0, 0.0),
            crate::hermlinalg::c64(-1.0, 0.0),
        ])))
        .unwrap();
        assert!(is_singular(&v, &w, 1e-12).unwrap());
        assert!(supports_orthogonal(&rn_pair(&v, &w).unwrap(), 1e-12));
        assert!(!is_singular(&v, &v, 1e-12).unwrap());
        assert!(!is_singular(&diag_map(&[1.0, 1.0]), &diag_map(&[0.0, 1.0]), 1e-12).unwrap());

        let phi = diag_map(&[2.0, 1.0]);
        assert!(is_abs_continuous(&phi.scale(1.0 / 3.0).unwrap(), &phi, 1e-12).unwrap());
        assert!(!is_abs_continuous(&diag_map(&[1.0, 1.0]), &diag_map(&[1.0, 0.0]), 1e-12).unwrap());
        assert!(!support_inclusion(&rn_pair(&diag_map(&[1.0, 0.0]), &diag_map(&[1.0, 1.0])).unwrap()));
        assert!(is_abs_continuous(&diag_map(&[0.0, 0.0]), &phi, 1e-12).unwrap());
    }
}

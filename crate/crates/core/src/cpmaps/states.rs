use crate::error::Result;
use crate::hermlinalg::{psd_sqrt, same_dim, PsdMatrix};
use crate::opmeans::geometric_mean;

/// Positive functional `x ↦ Tr(ρ x)` on `M_n`. The trace of `ρ` is not
/// normalized.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityFunctional {
    rho: PsdMatrix,
}

impl DensityFunctional {
    pub fn new(rho: PsdMatrix) -> Result<Self> {
        Ok(Self { rho })
    }

    pub fn rho(&self) -> &PsdMatrix {
        &self.rho
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }
}

/// `Tr(ρ#σ) ≤ Tr(ρ^{1/2} σ^{1/2}) ≤ Tr|ρ^{1/2} σ^{1/2}|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateMeanQuantities {
    pub gm_trace: f64,
    pub sqrt_trace: f64,
    pub fidelity: f64,
}

pub fn state_mean_quantities(rho: &DensityFunctional, sigma: &DensityFunctional) -> Result<StateMeanQuantities> {
    same_dim(rho.dim(), sigma.dim())?;
    let gm_trace = geometric_mean(rho.rho(), sigma.rho())?.trace();
    let r = psd_sqrt(rho.rho());
    let s = psd_sqrt(sigma.rho());
    let sqrt_trace = (r.matrix() * s.matrix()).trace().re;
    let inner = sigma.rho().congruence(r.matrix())?;
    let fidelity = psd_sqrt(&inner).trace();
    Ok(StateMeanQuantities { gm_trace, sqrt_trace, fidelity })
}

//! Kubo–Ando operator means on the PSD cone.
//!
//! The α-power means on singular arguments are computed by reduction to the
//! common support: with `W` an orthonormal basis of `ran A ∩ ran B`,
//! `A #_α B = W ((W* A⁺ W)⁻¹ #_α (W* B⁺ W)⁻¹) W*`, where both compressed
//! arguments are invertible. [`regularized_power_mean`] keeps the
//! `ε`-regularized limit as an independent reference.

mod connection;

use std::fmt;
use std::str::FromStr;

pub use connection::{adjoint_rep, dual_rep, power_rep, test_grid, transpose_rep, Atom, ConnectionRep};

use crate::error::{Error, Result};
use crate::hermlinalg::{
    max_abs, pinv_psd, proj_intersection, same_dim, support_projection, CMatrix, PsdMatrix, RANK_RTOL,
};
use crate::quadrature::gauss_legendre;

/// Quadrature and transform re-fit tolerance.
pub const TOL_QUAD: f64 = 1e-6;

/// Default Gauss–Legendre node count for the logarithmic mean.
pub const DEFAULT_LOG_NODES: usize = 16;

/// `1e-7 · max(1, ‖A‖, ‖B‖)`.
pub fn tol_mean(a: &PsdMatrix, b: &PsdMatrix) -> f64 {
    1e-7 * a.norm().max(b.norm()).max(1.0)
}

#[derive(Clone, Debug, PartialEq)]
pub enum MeanKind {
    Arithmetic,
    Geometric,
    Harmonic,
    Parallel,
    Power(f64),
    Logarithmic,
    Custom(ConnectionRep),
}

impl MeanKind {
    pub fn power(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self::Power(alpha))
    }

    /// Whether `m(A, A) = A`. The parallel sum and unnormalized custom
    /// connections are not means.
    pub fn is_mean(&self) -> bool {
        match self {
            Self::Parallel => false,
            Self::Custom(rep) => (rep.eval(1.0) - 1.0).abs() <= TOL_QUAD,
            _ => true,
        }
    }
}

impl fmt::Display for MeanKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Arithmetic => f.write_str("arith"),
            Self::Geometric => f.write_str("geo"),
            Self::Harmonic => f.write_str("harm"),
            Self::Parallel => f.write_str("parallel"),
            Self::Power(alpha) => write!(f, "power:{alpha}"),
            Self::Logarithmic => f.write_str("log"),
            Self::Custom(rep) => write!(f, "custom:{}", rep.label()),
        }
    }
}

impl FromStr for MeanKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "arith" | "arithmetic" => Ok(Self::Arithmetic),
            "geo" | "geometric" => Ok(Self::Geometric),
            "harm" | "harmonic" => Ok(Self::Harmonic),
            "parallel" => Ok(Self::Parallel),
            "log" | "logarithmic" => Ok(Self::Logarithmic),
            other => {
                let Some(alpha) = other.strip_prefix("power:") else {
                    return Err(Error::InvalidInput(format!(
                        "unknown mean '{other}' (expected arith, geo, harm, parallel, power:<α> or log)"
                    )));
                };
                let alpha: f64 =
                    alpha.parse().map_err(|_| Error::InvalidInput(format!("bad power exponent '{alpha}'")))?;
                Self::power(alpha)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanOptions {
    pub log_nodes: usize,
    pub rank_rtol: f64,
}

impl Default for MeanOptions {
    fn default() -> Self {
        Self { log_nodes: DEFAULT_LOG_NODES, rank_rtol: RANK_RTOL }
    }
}

pub fn mean(kind: &MeanKind, a: &PsdMatrix, b: &PsdMatrix, opts: &MeanOptions) -> Result<PsdMatrix> {
    match kind {
        MeanKind::Arithmetic => arithmetic_mean(a, b),
        MeanKind::Geometric => power_mean_with(a, b, 0.5, opts.rank_rtol),
        MeanKind::Harmonic => harmonic_mean(a, b),
        MeanKind::Parallel => parallel_sum(a, b),
        MeanKind::Power(alpha) => power_mean_with(a, b, *alpha, opts.rank_rtol),
        MeanKind::Logarithmic => log_mean_with(a, b, opts.log_nodes, opts.rank_rtol),
        MeanKind::Custom(rep) => connection_apply(rep, a, b),
    }
}

/// `A : B = A (A + B)⁺ B`, evaluated as `S - S (A + B)⁺ S` with `S` the
/// argument of smaller norm. The two agree in exact arithmetic, but the product
/// form loses about `ε ‖A‖ ‖B‖ / λ_min(A + B)` when the scales differ widely.
pub fn parallel_sum(a: &PsdMatrix, b: &PsdMatrix) -> Result<PsdMatrix> {
    same_dim(a.dim(), b.dim())?;
    let sum = a.add(b)?;
    let inv = pinv_psd(&sum, RANK_RTOL);
    let small = if a.norm() <= b.norm() { a.matrix() } else { b.matrix() };
    let out = small - small * inv.matrix() * small;
    // clear the rounding-level negative eigenvalues the subtraction can leave
    Ok(PsdMatrix::trusted(PsdMatrix::trusted(out).map_spectrum(0.0, |l| l)))
}

pub fn harmonic_mean(a: &PsdMatrix, b: &PsdMatrix) -> Result<PsdMatrix> {
    parallel_sum(a, b)?.scale(2.0)
}

pub fn arithmetic_mean(a: &PsdMatrix, b: &PsdMatrix) -> Result<PsdMatrix> {
    a.add(b)?.scale(0.5)
}

pub fn geometric_mean(a: &PsdMatrix, b: &PsdMatrix) -> Result<PsdMatrix> {
    power_mean(a, b, 0.5)
}

/// `A #_α B`, the mean with representing function `t^α`.
pub fn power_mean(a: &PsdMatrix, b: &PsdMatrix, alpha: f64) -> Result<PsdMatrix> {
    power_mean_with(a, b, alpha, RANK_RTOL)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::Domain(format!("α must lie in [0, 1], got {alpha}")))
    }
}

fn power_mean_with(a: &PsdMatrix, b: &PsdMatrix, alpha: f64, rank_rtol: f64) -> Result<PsdMatrix> {
    check_alpha(alpha)?;
    same_dim(a.dim(), b.dim())?;
    if alpha == 0.0 {
        return Ok(a.clone());
    }
    if alpha == 1.0 {
        return Ok(b.clone());
    }
    if a.is_invertible(rank_rtol) && b.is_invertible(rank_rtol) {
        return PsdMatrix::computed(closed_form(a, b.matrix(), alpha), "power mean");
    }
    let common = proj_intersection(&support_projection(a, rank_rtol), &support_projection(b, rank_rtol))?;
    let w = common.basis();
    if w.ncols() == 0 {
        return Ok(PsdMatrix::zeros(a.dim()));
    }
    let x = compressed_inverse(a, w, rank_rtol);
    let y = compressed_inverse(b, w, rank_rtol);
    let core = closed_form(&x, y.matrix(), alpha);
    PsdMatrix::computed(w * core * w.adjoint(), "power mean")
}

/// `A^{1/2} (A^{-1/2} B A^{-1/2})^α A^{1/2}` for invertible `A`.
fn closed_form(a: &PsdMatrix, b: &CMatrix, alpha: f64) -> CMatrix {
    let s = a.spectrum();
    let half = s.apply(f64::sqrt);
    let inv_half = s.apply(|l| 1.0 / l.sqrt());
    let inner = PsdMatrix::trusted(&inv_half * b * &inv_half);
    // no rank cutoff here: cond(inner) can legitimately exceed 1 / RANK_RTOL
    let powered = inner.map_spectrum(0.0, |l| l.powf(alpha));
    &half * powered * &half
}

/// `(W* A⁺ W)⁻¹`, the shorted operator of `A` on `ran W` expressed in the
/// basis `W`.
fn compressed_inverse(a: &PsdMatrix, w: &CMatrix, rank_rtol: f64) -> PsdMatrix {
    let inv = pinv_psd(a, rank_rtol);
    let m = PsdMatrix::trusted(w.adjoint() * inv.matrix() * w);
    pinv_psd(&m, RANK_RTOL)
}

/// `∫₀¹ A #_s B ds` by Gauss–Legendre with the default node count.
pub fn log_mean(a: &PsdMatrix, b: &PsdMatrix) -> Result<PsdMatrix> {
    log_mean_with(a, b, DEFAULT_LOG_NODES, RANK_RTOL)
}

pub fn log_mean_nodes(a: &PsdMatrix, b: &PsdMatrix, nodes: usize) -> Result<PsdMatrix> {
    log_mean_with(a, b, nodes, RANK_RTOL)
}

fn log_mean_with(a: &PsdMatrix, b: &PsdMatrix, nodes: usize, rank_rtol: f64) -> Result<PsdMatrix> {
    same_dim(a.dim(), b.dim())?;
    let rule = gauss_legendre(nodes)?;
    let mut acc = CMatrix::zeros(a.dim(), a.dim());
    for (&s, &w) in rule.nodes.iter().zip(&rule.weights) {
        acc += power_mean_with(a, b, s, rank_rtol)?.matrix().scale(w);
    }
    Ok(PsdMatrix::trusted(acc))
}

/// `a A + b B + Σ w_k (1+λ_k)/λ_k · ((λ_k A) : B)`.
pub fn connection_apply(rep: &ConnectionRep, a: &PsdMatrix, b: &PsdMatrix) -> Result<PsdMatrix> {
    same_dim(a.dim(), b.dim())?;
    let mut acc = a.matrix().scale(rep.a()) + b.matrix().scale(rep.b());
    for atom in rep.atoms() {
        let p = parallel_sum(&a.scale(atom.lambda)?, b)?;
        acc += p.matrix().scale(atom.weight * (1.0 + atom.lambda) / atom.lambda);
    }
    Ok(PsdMatrix::trusted(acc))
}

/// `lim_{ε↓0} (A+εI) #_α (B+εI)` along `ε = s·4^{-k}`, `k = 6..=16`,
/// `s = max(1, ‖A‖, ‖B‖)`. Iterates are compressed to `supp A ∧ supp B`
/// before the Cauchy test.
///
/// Singular pairs converge like `O(√ε)` in general, so this fails with
/// [`Error::NonConvergence`] unless the pair is close to commuting on the
/// complement of the common support.
pub fn regularized_power_mean(a: &PsdMatrix, b: &PsdMatrix, alpha: f64) -> Result<PsdMatrix> {
    check_alpha(alpha)?;
    same_dim(a.dim(), b.dim())?;
    let n = a.dim();
    let scale = a.norm().max(b.norm()).max(1.0);
    let tol = tol_mean(a, b);
    let shifted = |m: &PsdMatrix, eps: f64| PsdMatrix::trusted(m.matrix() + CMatrix::identity(n, n).scale(eps));
    let at = |k: i32| {
        let eps = scale * 4f64.powi(-k);
        closed_form(&shifted(a, eps), shifted(b, eps).matrix(), alpha)
    };
    let pi = proj_intersection(&support_projection(a, RANK_RTOL), &support_projection(b, RANK_RTOL))?;
    let compress = |g: CMatrix| pi.matrix() * g * pi.matrix();
    let mut prev = compress(at(6));
    for k in 7..=16 {
        let next = compress(at(k));
        if max_abs(&(&next - &prev)) <= tol {
            return Ok(PsdMatrix::trusted(PsdMatrix::trusted(next).map_spectrum(0.0, |l| l)));
        }
        prev = next;
    }
    Err(Error::NonConvergence(format!(
        "regularized #_{alpha} failed its Cauchy test at ε = {:e}",
        scale * 4f64.powi(-16)
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermlinalg::c64;

    fn diag(d: &[f64]) -> PsdMatrix {
        PsdMatrix::from_real_diagonal(d).unwrap()
    }

    fn assert_close(got: &PsdMatrix, want: &PsdMatrix, tol: f64) {
        let err = max_abs(&(got.matrix() - want.matrix()));
        assert!(err <= tol, "error {err:e} > {tol:e}\ngot {}\nwant {}", got.matrix(), want.matrix());
    }

    fn proj(v: &[(f64, f64)]) -> PsdMatrix {
        let col = CMatrix::from_iterator(v.len(), 1, v.iter().map(|&(r, i)| c64(r, i)));
        let norm = col.norm();
        PsdMatrix::outer(&(col / c64(norm, 0.0)))
    }

    fn sample() -> PsdMatrix {
        let x = CMatrix::from_row_slice(
            3,
            3,
            &[
                c64(1.0, 0.0),
                c64(0.2, 0.3),
                c64(0.0, -0.4),
                c64(0.5, 0.0),
                c64(2.0, 0.1),
                c64(0.3, 0.0),
                c64(0.0, 0.0),
                c64(-0.6, 0.2),
                c64(1.2, 0.0),
            ],
        );
        PsdMatrix::trusted(&x * x.adjoint())
    }

    #[test]
    fn parallel_sum_examples() {
        let a = sample();
        assert_close(&parallel_sum(&a, &a).unwrap(), &a.scale(0.5).unwrap(), 1e-12);
        assert_close(&parallel_sum(&diag(&[1.0, 0.0]), &diag(&[1.0, 1.0])).unwrap(), &diag(&[0.5, 0.0]), 1e-14);
        assert_close(&parallel_sum(&diag(&[2.0, 6.0]), &diag(&[2.0, 3.0])).unwrap(), &diag(&[1.0, 2.0]), 1e-14);
        assert!(matches!(parallel_sum(&diag(&[1.0]), &diag(&[1.0, 1.0])), Err(Error::Shape(_))));
    }

    #[test]
    fn harmonic_examples() {
        let a = sample();
        assert_close(&harmonic_mean(&a, &a).unwrap(), &a, 1e-12);
        assert_close(&harmonic_mean(&diag(&[1.0, 2.0]), &diag(&[3.0, 2.0])).unwrap(), &diag(&[1.5, 2.0]), 1e-14);
        // rP ! sQ = 2rs/(r+s) P∧Q with P ≥ Q
        let p = diag(&[1.0, 1.0, 0.0]);
        let q = diag(&[1.0, 0.0, 0.0]);
        let got = harmonic_mean(&p.scale(2.0).unwrap(), &q.scale(3.0).unwrap()).unwrap();
        assert_close(&got, &q.scale(2.4).unwrap(), 1e-13);
    }

    #[test]
    fn arithmetic_examples() {
        let a = sample();
        assert_close(&arithmetic_mean(&a, &a).unwrap(), &a, 1e-14);
        assert_close(&arithmetic_mean(&diag(&[1.0, 3.0]), &diag(&[3.0, 1.0])).unwrap(), &diag(&[2.0, 2.0]), 0.0);
        assert_close(&arithmetic_mean(&PsdMatrix::zeros(3), &a).unwrap(), &a.scale(0.5).unwrap(), 0.0);
    }

    #[test]
    fn geometric_examples() {
        let a = sample();
        assert_close(&geometric_mean(&a, &a).unwrap(), &a, 1e-10);
        let g = geometric_mean(&diag(&[2.0, 1.0]), &diag(&[1.0, 2.0])).unwrap();
        assert_close(&g, &diag(&[2f64.sqrt(), 2f64.sqrt()]), 1e-12);
        let v = proj(&[(0.0, 0.0), (1.0, 0.0)]);
        let w = proj(&[(1.0, 0.0), (0.0, 0.0)]);
        assert_close(&geometric_mean(&v, &w).unwrap(), &PsdMatrix::zeros(2), 1e-14);
    }

    #[test]
    fn geometric_of_scaled_projections() {
        // P = span{e1, e2}, Q = span{e1 + e3, e2}: P∧Q = span{e2}
        let p = diag(&[1.0, 1.0, 0.0]);
        let u = proj(&[(1.0, 0.0), (0.0, 0.0), (1.0, 0.0)]);
        let q = u.add(&diag(&[0.0, 1.0, 0.0])).unwrap();
        let got = geometric_mean(&p.scale(2.0).unwrap(), &q.scale(8.0).unwrap()).unwrap();
        assert_close(&got, &diag(&[0.0, 4.0, 0.0]), 1e-12);
    }

    #[test]
    fn power_examples() {
        let a = sample();
        let b = diag(&[1.0, 2.0, 0.5]);
        assert_eq!(power_mean(&a, &b, 0.0).unwrap(), a);
        assert_eq!(power_mean(&a, &b, 1.0).unwrap(), b);
        assert_close(&power_mean(&diag(&[1.0, 4.0]), &diag(&[4.0, 1.0]), 0.5).unwrap(), &diag(&[2.0, 2.0]), 1e-13);
        assert_close(
            &power_mean(&diag(&[8.0, 1.0]), &diag(&[1.0, 1.0]), 1.0 / 3.0).unwrap(),
            &diag(&[4.0, 1.0]),
            1e-12,
        );
        assert!(matches!(power_mean(&a, &b, 1.5), Err(Error::Domain(_))));
        assert!(matches!(power_mean(&a, &b, -0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn power_singular_commuting_matches_scalar() {
        let a = diag(&[4.0, 0.0, 9.0]);
        let b = diag(&[1.0, 5.0, 0.0]);
        let got = power_mean(&a, &b, 0.25).unwrap();
        assert_close(&got, &diag(&[4f64.powf(0.75), 0.0, 0.0]), 1e-12);
    }

    #[test]
    fn regularized_agrees_on_commuting_singular_pair() {
        let a = diag(&[4.0, 0.0, 9.0]);
        let b = diag(&[1.0, 5.0, 0.0]);
        let reg = regularized_power_mean(&a, &b, 0.5).unwrap();
        assert_close(&reg, &geometric_mean(&a, &b).unwrap(), 1e-6);
    }

    #[test]
    fn log_examples() {
        let a = sample();
        assert_close(&log_mean(&a, &a).unwrap(), &a, 1e-10);
        let e2 = 2f64.exp();
        let got = log_mean(&diag(&[1.0, 1.0]), &diag(&[e2, 1.0])).unwrap();
        assert_close(&got, &diag(&[(e2 - 1.0) / 2.0, 1.0]), TOL_QUAD);
    }

    #[test]
    fn connection_examples() {
        let a = sample();
        let b = diag(&[1.0, 2.0, 0.5]);
        let arith = connection_apply(&ConnectionRep::arithmetic(), &a, &b).unwrap();
        assert_close(&arith, &arithmetic_mean(&a, &b).unwrap(), 1e-14);
        let harm = connection_apply(&ConnectionRep::harmonic(), &a, &b).unwrap();
        assert_close(&harm, &harmonic_mean(&a, &b).unwrap(), 1e-12);
        let rep = power_rep(0.5, 64).unwrap();
        let got = connection_apply(&rep, &diag(&[1.0, 9.0]), &diag(&[9.0, 1.0])).unwrap();
        assert_close(&got, &diag(&[3.0, 3.0]), TOL_QUAD);
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("geo".parse::<MeanKind>().unwrap(), MeanKind::Geometric);
        assert_eq!("power:0.25".parse::<MeanKind>().unwrap(), MeanKind::Power(0.25));
        assert!(matches!("power:2".parse::<MeanKind>(), Err(Error::Domain(_))));
        assert!(matches!("median".parse::<MeanKind>(), Err(Error::InvalidInput(_))));
        assert_eq!(MeanKind::Power(0.25).to_string(), "power:0.25");
    }

    #[test]
    fn dispatch_matches_direct_calls() {
        let a = sample();
        let b = diag(&[1.0, 2.0, 0.5]);
        let opts = MeanOptions::default();
        assert_close(&mean(&MeanKind::Geometric, &a, &b, &opts).unwrap(), &geometric_mean(&a, &b).unwrap(), 0.0);
        assert_close(&mean(&MeanKind::Parallel, &a, &b, &opts).unwrap(), &parallel_sum(&a, &b).unwrap(), 0.0);
    }
}

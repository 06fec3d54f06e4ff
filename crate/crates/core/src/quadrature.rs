//! Gauss–Jacobi and Gauss–Legendre rules on `[0, 1]` via Golub–Welsch.
//!
//! A rule integrates `∫₀¹ (1-u)^a u^b g(u) du ≈ Σ w_k g(u_k)`. The Jacobi
//! recurrence is written so that the `a + b = -1` family, which the `t^α`
//! Löwner measure needs, has no removable `0/0` in its coefficients.

use nalgebra::{DMatrix, SymmetricEigen};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&u, &w)| w * g(u)).sum()
    }
}

/// Gauss rule for the weight `(1-u)^a u^b` on `[0, 1]`, `a, b > -1`.
pub fn gauss_jacobi(n: usize, a: f64, b: f64) -> Result<Rule> {
    if n == 0 {
        return Err(Error::Domain("quadrature needs at least one node".into()));
    }
    if !(a > -1.0 && b > -1.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain(format!("Jacobi exponents must exceed -1, got ({a}, {b})")));
    }
    let s = a + b;
    // Monic recurrence on [-1, 1] for weight (1-x)^a (1+x)^b.
    let diag: Vec<f64> = (0..n)
        .map(|k| {
            if k == 0 {
                (b - a) / (s + 2.0)
            } else {
                let d = 2.0 * k as f64 + s;
                (b * b - a * a) / (d * (d + 2.0))
            }
        })
        .collect();
    let offdiag: Vec<f64> = (1..n)
        .map(|k| {
            let k = k as f64;
            let d = 2.0 * k + s;
            let beta = if k == 1.0 {
                // (1+s) cancels between numerator and denominator
                4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + s).powi(2) * (3.0 + s))
            } else {
                4.0 * k * (k + a) * (k + b) * (k + s) / (d * d * (d + 1.0) * (d - 1.0))
            };
            beta.sqrt()
        })
        .collect();
    let mut jm = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        jm[(k, k)] = diag[k];
        if k + 1 < n {
            jm[(k, k + 1)] = offdiag[k];
            jm[(k + 1, k)] = offdiag[k];
        }
    }
    let eig = SymmetricEigen::try_new(jm, 1e-16, 100_000)
        .ok_or_else(|| Error::NonConvergence("Golub–Welsch eigensolver".into()))?;
    // total mass of (1-x)^a (1+x)^b on [-1, 1]; mapping to [0, 1] divides by 2^(s+1)
    let ln_mu0 = (s + 1.0) * std::f64::consts::LN_2 + ln_gamma(a + 1.0) + ln_gamma(b + 1.0) - ln_gamma(s + 2.0);
    let mass01 = (ln_mu0 - (s + 1.0) * std::f64::consts::LN_2).exp();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let x = eig.eigenvalues[k];
            let v0 = eig.eigenvectors[(0, k)];
            ((1.0 + x) / 2.0, mass01 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    Ok(Rule { nodes: pairs.iter().map(|p| p.0).collect(), weights: pairs.iter().map(|p| p.1).collect() })
}

/// Gauss–Legendre rule on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> Result<Rule> {
    gauss_jacobi(n, 0.0, 0.0)
}

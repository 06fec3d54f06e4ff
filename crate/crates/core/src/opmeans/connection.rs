//! Discrete Löwner representations `f(t) = a + b t + Σ w_k t(1+λ_k)/(t+λ_k)`
//! of operator monotone functions, and the transpose / adjoint / dual
//! transforms between them.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::quadrature::gauss_jacobi;

use super::TOL_QUAD;

/// One point mass of the representing measure.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom {
    pub lambda: f64,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionRep {
    a: f64,
    b: f64,
    atoms: Vec<Atom>,
    label: String,
}

/// Scalar grid `t = 2^k, k = -4..=4` on which transforms are validated.
pub fn test_grid() -> Vec<f64> {
    (-4..=4).map(|k| 2f64.powi(k)).collect()
}

pub(crate) fn kernel(t: f64, lambda: f64) -> f64 {
    t * (1.0 + lambda) / (t + lambda)
}

impl ConnectionRep {
    pub fn new(a: f64, b: f64, atoms: Vec<Atom>, label: impl Into<String>) -> Result<Self> {
        if !(a >= 0.0 && a.is_finite() && b >= 0.0 && b.is_finite()) {
            return Err(Error::Domain(format!("coefficients a, b must be finite and nonnegative, got ({a}, {b})")));
        }
        for atom in &atoms {
            if !(atom.lambda > 0.0 && atom.lambda.is_finite() && atom.weight > 0.0 && atom.weight.is_finite()) {
                return Err(Error::Domain(format!(
                    "atom (λ={}, w={}) must have positive finite location and weight",
                    atom.lambda, atom.weight
                )));
            }
        }
        Ok(Self { a, b, atoms, label: label.into() })
    }

    /// `(A + B) / 2`.
    pub fn arithmetic() -> Self {
        Self { a: 0.5, b: 0.5, atoms: Vec::new(), label: "arith".into() }
    }

    /// `2 t / (1 + t)`: a single unit atom at `λ = 1`.
    pub fn harmonic() -> Self {
        Self { a: 0.0, b: 0.0, atoms: vec![Atom { lambda: 1.0, weight: 1.0 }], label: "harm".into() }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// The representing function evaluated at a scalar `t ≥ 0`.
    pub fn eval(&self, t: f64) -> f64 {
        self.a + self.b * t + self.atoms.iter().map(|at| at.weight * kernel(t, at.lambda)).sum::<f64>()
    }
}

/// Discretization of the measure of `t^α`,
/// `dμ(λ) = (sin απ / π) λ^(α-1) / (1+λ) dλ`.
///
/// With `λ = u/(1-u)` the measure becomes `(sin απ/π) u^(α-1) (1-u)^(-α) du`
/// and the kernel becomes `t / (t(1-u) + u)`, smooth in `u`. The endpoint
/// factors are absorbed into a Gauss–Jacobi rule, so the atoms are exactly
/// the rule's nodes and weights.
pub fn power_rep(alpha: f64, nodes: usize) -> Result<ConnectionRep> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("power_rep needs α in (0, 1), got {alpha}")));
    }
    if nodes < 4 {
        return Err(Error::Domain(format!("power_rep needs at least 4 nodes, got {nodes}")));
    }
    let rule = gauss_jacobi(nodes, -alpha, alpha - 1.0)?;
    let c = (alpha * std::f64::consts::PI).sin() / std::f64::consts::PI;
    let atoms =
        rule.nodes.iter().zip(&rule.weights).map(|(&u, &w)| Atom { lambda: u / (1.0 - u), weight: c * w }).collect();
    ConnectionRep::new(0.0, 0.0, atoms, format!("power:{alpha}"))
}

/// Representation of `t f(1/t)`; realizes `A σ' B = B σ A`.
///
/// Exact: the kernel satisfies `t k(1/t, λ) = k(t, 1/λ)`, so atoms move to
/// reciprocal locations and `a`, `b` swap.
pub fn transpose_rep(rep: &ConnectionRep) -> ConnectionRep {
    let atoms = rep.atoms.iter().rev().map(|at| Atom { lambda: 1.0 / at.lambda, weight: at.weight }).collect();
    ConnectionRep { a: rep.b, b: rep.a, atoms, label: format!("transpose({})", rep.label) }
}

/// Representation of `1 / f(1/t)`, re-fitted numerically.
pub fn adjoint_rep(rep: &ConnectionRep) -> Result<ConnectionRep> {
    for t in fit_grid().into_iter().chain(test_grid()) {
        let v = rep.eval(1.0 / t);
        if v.is_nan() || v <= f64::MIN_POSITIVE {
            return Err(Error::Domain(format!(
                "representing function of '{}' vanishes at t = {} on the fit grid",
                rep.label,
                1.0 / t
            )));
        }
    }
    fit_rep(|t| 1.0 / rep.eval(1.0 / t), format!("adjoint({})", rep.label))
}

/// Representation of `t / f(t)`, the adjoint of the transpose.
pub fn dual_rep(rep: &ConnectionRep) -> Result<ConnectionRep> {
    let fitted = adjoint_rep(&transpose_rep(rep))?;
    Ok(fitted.with_label(format!("dual({})", rep.label)))
}

fn fit_grid() -> Vec<f64> {
    (-48..=48).map(|j| 2f64.powf(j as f64 / 8.0)).collect()
}

fn candidate_lambdas() -> Vec<f64> {
    (-48..=48).map(|j| 2f64.powf(j as f64 / 4.0)).collect()
}

/// Least-squares fit of `target` by a representation with nonnegative
/// coefficients on a fixed log grid of atom locations.
fn fit_rep(target: impl Fn(f64) -> f64, label: String) -> Result<ConnectionRep> {
    let ts = fit_grid();
    let lambdas = candidate_lambdas();
    let cols = 2 + lambdas.len();
    let design = DMatrix::from_fn(ts.len(), cols, |i, j| match j {
        0 => 1.0,
        1 => ts[i],
        _ => kernel(ts[i], lambdas[j - 2]),
    });
    let rhs = DVector::from_iterator(ts.len(), ts.iter().map(|&t| target(t)));
    let coef = nnls(&design, &rhs)?;
    let atoms = lambdas
        .iter()
        .enumerate()
        .filter(|&(j, _)| coef[j + 2] > 0.0)
        .map(|(j, &lambda)| Atom { lambda, weight: coef[j + 2] })
        .collect();
    let rep = ConnectionRep::new(coef[0].max(0.0), coef[1].max(0.0), atoms, label)?;
    for t in test_grid() {
        let want = target(t);
        let err = (rep.eval(t) - want).abs();
        if err > TOL_QUAD * want.abs().max(1.0) {
            return Err(Error::NonConvergence(format!("re-fit of '{}' misses t = {t} by {err:e}", rep.label)));
        }
    }
    Ok(rep)
}

/// Lawson–Hanson active-set solver for `min ‖Ax - b‖` subject to `x ≥ 0`.
pub(crate) fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let n = a.ncols();
    let max_iter = 30 * n.max(1);
    let tol = 10.0 * f64::EPSILON * a.norm() * (a.nrows().max(n) as f64);
    let mut x = DVector::<f64>::zeros(n);
    let mut passive = vec![false; n];

    let solve_passive = |passive: &[bool]| -> Result<DVector<f64>> {
        let idx: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
        let sub = DMatrix::from_fn(a.nrows(), idx.len(), |i, k| a[(i, idx[k])]);
        let sol = sub.svd(true, true).solve(b, 1e-14).map_err(|e| Error::Numerical(format!("NNLS subproblem: {e}")))?;
        let mut z = DVector::<f64>::zeros(n);
        for (k, &j) in idx.iter().enumerate() {
            z[j] = sol[k];
        }
        Ok(z)
    };

    for _ in 0..max_iter {
        let w = a.transpose() * (b - a * &x);
        let next = (0..n).filter(|&j| !passive[j]).max_by(|&p, &q| w[p].total_cmp(&w[q]));
        let Some(j) = next.filter(|&j| w[j] > tol) else {
            return Ok(x);
        };
        passive[j] = true;
        loop {
            let z = solve_passive(&passive)?;
            if (0..n).filter(|&k| passive[k]).all(|k| z[k] > 0.0) {
                x = z;
                break;
            }
            let mut step = f64::INFINITY;
            for k in (0..n).filter(|&k| passive[k] && z[k] <= 0.0) {
                step = step.min(x[k] / (x[k] - z[k]));
            }
            x += (z - &x) * step;
            for k in 0..n {
                if passive[k] && x[k] <= tol {
                    passive[k] = false;
                    x[k] = 0.0;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    Err(Error::NonConvergence("NNLS iteration cap reached".into()))
}

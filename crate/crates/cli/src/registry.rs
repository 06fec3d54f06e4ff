//! Worked examples, each recomputed and checked against its closed form.
//!
//! Parameters are `key=value` pairs. Lists are comma separated, and angles
//! accept `pi` forms such as `pi/4` or `3*pi/8`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use cpmean_core::cpmaps::state_mean_quantities;
use cpmean_core::cpmaps::{index_cp, mean_cp, zoo, CpMap, DensityFunctional};
use cpmean_core::hermlinalg::{c64, max_abs, op_norm, CMatrix, PsdMatrix, RANK_RTOL};
use cpmean_core::lebesgue::decompose;
use cpmean_core::opmeans::{geometric_mean, parallel_sum, MeanKind};
use cpmean_core::sampling;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::commands::Context;
use crate::error::{CliError, Result};
use crate::report::{Check, Output, Report};

type Runner = fn(&Params, &Context) -> Result<Report>;

pub struct Example {
    pub name: &'static str,
    pub summary: &'static str,
    /// Parameter names with their default values.
    pub defaults: &'static [(&'static str, &'static str)],
    run: Runner,
}

pub const REGISTRY: &[Example] = &[
    Example {
        name: "non-unital",
        summary: "id # Ad(diag(1,-1)) = 0, so a mean of unital maps need not be unital",
        defaults: &[],
        run: non_unital,
    },
    Example {
        name: "states",
        summary: "functionals Tr(ρ·) have Choi matrix ρᵀ and mean Tr((ρ#σ)·)",
        defaults: &[("rho", "0.7,0.3"), ("sigma", "0.4,0.6"), ("theta", "0.4")],
        run: states,
    },
    Example {
        name: "quantum-channels",
        summary: "id # Δ = id/d and id ! Δ = 2/(d²+1) id",
        defaults: &[("d", "2")],
        run: quantum_channels,
    },
    Example {
        name: "schur-multiplier",
        summary: "S_A # S_B = S_{A#B}",
        defaults: &[("n", "3"), ("seed", "1")],
        run: schur_multiplier,
    },
    Example {
        name: "adjoint-maps",
        summary: "Ψ_A # Ψ_B = 0 for non-proportional A, B",
        defaults: &[("a", "2,1"), ("b", "1,2")],
        run: adjoint_maps,
    },
    Example {
        name: "ce-tensor",
        summary: "tensor expectations: mean = √(λ_ρ λ_σ) id and its index",
        defaults: &[("rho", "0.75,0.25"), ("sigma", "0.5,0.5")],
        run: ce_tensor,
    },
    Example {
        name: "rotation",
        summary: "diagonal vs rotated expectation on M_2: ½ id unless sin 2θ = 0",
        defaults: &[("theta", "pi/4")],
        run: rotation,
    },
    Example {
        name: "kosaki-fidelity",
        summary: "Tr(ρ#σ) ≤ Tr(ρ^½σ^½) ≤ Tr|ρ^½σ^½|",
        defaults: &[("rho", "0.7,0.3"), ("sigma", "0.4,0.6"), ("theta", "0.4")],
        run: kosaki_fidelity,
    },
    Example {
        name: "ando-recovery",
        summary: "maps C → M_3 recover Ando's decomposition [A]B and A:B",
        defaults: &[],
        run: ando_recovery,
    },
];

pub fn find(name: &str) -> Result<&'static Example> {
    REGISTRY.iter().find(|e| e.name == name).ok_or_else(|| CliError::UnknownExample(name.to_owned()))
}

impl Example {
    /// Runs with `overrides` (`key=value` strings) applied over the defaults.
    pub fn run(&self, overrides: &[String], ctx: &Context) -> Result<Report> {
        let params = Params::new(self, overrides)?;
        let mut report = (self.run)(&params, ctx)?;
        report.command = format!("example {}", self.name);
        for (key, value) in &params.values {
            report.output(&format!("param.{key}"), Output::Text(value.clone()));
        }
        Ok(report)
    }
}

/// Runs every example with its defaults. Sections keep registry order.
pub fn run_all(ctx: &Context) -> Report {
    let sections: Vec<Report> = REGISTRY
        .par_iter()
        .map(|e| {
            e.run(&[], ctx).unwrap_or_else(|err| {
                let mut r = Report::new(format!("example {}", e.name));
                r.output("error", Output::Text(err.to_string()));
                r.check(Check { name: "completed".into(), pass: false, residual: f64::NAN, tolerance: 0.0 });
                r
            })
        })
        .collect();
    let mut report = Report::new("example --all");
    report.output("examples", Output::Number(sections.len() as f64));
    report.output("failed", Output::Number(sections.iter().filter(|s| !s.passed()).count() as f64));
    report.sections = sections;
    report
}

pub struct Params {
    values: BTreeMap<String, String>,
}

impl Params {
    fn new(example: &Example, overrides: &[String]) -> Result<Self> {
        let mut values: BTreeMap<String, String> =
            example.defaults.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        for item in overrides {
            let (key, value) =
                item.split_once('=').ok_or_else(|| CliError::Usage(format!("expected key=value, got `{item}`")))?;
            let key = key.trim();
            if !values.contains_key(key) {
                let known: Vec<&str> = example.defaults.iter().map(|(k, _)| *k).collect();
                return Err(CliError::Usage(format!(
                    "example `{}` has no parameter `{key}` (known: {})",
                    example.name,
                    if known.is_empty() { "none".to_string() } else { known.join(", ") }
                )));
            }
            values.insert(key.to_owned(), value.trim().to_owned());
        }
        Ok(Self { values })
    }

    fn raw(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).expect("parameter declared in defaults")
    }

    fn real(&self, key: &str) -> Result<f64> {
        parse_real(self.raw(key))
            .ok_or_else(|| CliError::Usage(format!("parameter {key}: `{}` is not a number", self.raw(key))))
    }

    fn count(&self, key: &str, lo: usize, hi: usize) -> Result<usize> {
        let v: usize =
            self.raw(key).parse().map_err(|_| CliError::Usage(format!("parameter {key}: expected an integer")))?;
        if !(lo..=hi).contains(&v) {
            return Err(CliError::Usage(format!("parameter {key} must lie in {lo}..={hi}, got {v}")));
        }
        Ok(v)
    }

    fn list(&self, key: &str) -> Result<Vec<f64>> {
        self.raw(key)
            .split(',')
            .map(|s| parse_real(s).ok_or_else(|| CliError::Usage(format!("parameter {key}: `{s}` is not a number"))))
            .collect()
    }

    fn seed(&self, key: &str) -> Result<u64> {
        self.raw(key).parse().map_err(|_| CliError::Usage(format!("parameter {key}: expected an unsigned integer")))
    }
}

/// Finite reals, with `pi` allowed as a factor: `pi`, `pi/4`, `3*pi/8`, `-pi`.
fn parse_real(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Ok(x) = s.parse::<f64>() {
        return x.is_finite().then_some(x);
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim().parse::<f64>().ok()?),
        None => (s, 1.0),
    };
    let factor = match num.strip_suffix("pi")?.trim_end_matches('*').trim() {
        "" | "+" => 1.0,
        "-" => -1.0,
        f => f.parse::<f64>().ok()?,
    };
    let x = factor * PI / den;
    x.is_finite().then_some(x)
}

fn diag(d: &[f64]) -> CMatrix {
    CMatrix::from_fn(d.len(), d.len(), |i, j| if i == j { c64(d[i], 0.0) } else { c64(0.0, 0.0) })
}

fn choi_dist(a: &CpMap, b: &CpMap) -> f64 {
    max_abs(&(a.choi().matrix() - b.choi().matrix()))
}

fn geo(a: &CpMap, b: &CpMap) -> Result<CpMap> {
    Ok(mean_cp(&MeanKind::Geometric, a, b)?)
}

fn psd(m: CMatrix) -> Result<PsdMatrix> {
    Ok(PsdMatrix::from_matrix(m)?)
}

/// `U diag(w) U*` with `U` the rotation by `theta`; weights are normalized.
fn rotated_state(weights: &[f64], theta: f64, what: &str) -> Result<DensityFunctional> {
    if weights.is_empty() || weights.iter().any(|&w| w < 0.0) {
        return Err(CliError::Usage(format!("{what}: weights must be non-negative")));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(CliError::Usage(format!("{what}: weights must not all vanish")));
    }
    let n = weights.len();
    let w: Vec<f64> = weights.iter().map(|x| x / total).collect();
    let mut u = CMatrix::identity(n, n);
    if n >= 2 {
        u.view_mut((0, 0), (2, 2)).copy_from(&zoo::rotation(theta));
    }
    Ok(DensityFunctional::new(psd(&u * diag(&w) * u.adjoint())?)?)
}

fn state_pair(p: &Params) -> Result<(DensityFunctional, DensityFunctional)> {
    let (rho, sigma) = (p.list("rho")?, p.list("sigma")?);
    if rho.len() != sigma.len() {
        return Err(CliError::Usage("rho and sigma need the same number of weights".into()));
    }
    Ok((rotated_state(&rho, 0.0, "rho")?, rotated_state(&sigma, p.real("theta")?, "sigma")?))
}

fn non_unital(_: &Params, _: &Context) -> Result<Report> {
    let mut r = Report::new("");
    let phi = zoo::identity(2)?;
    let psi = zoo::unitary_conj(&diag(&[1.0, -1.0]))?;
    let g = geo(&phi, &psi)?;
    for (label, map) in [("phi", &phi), ("psi", &psi)] {
        let f = map.flags(cpmean_core::cpmaps::TOL_CHANNEL);
        r.check(Check::at_most(format!("{label}_unital"), f.unital_residual, f.tolerance));
    }
    r.check(Check::at_most("mean_is_zero", op_norm(g.choi().matrix()), 1e-8));
    let unit = g.apply(&CMatrix::identity(2, 2))?;
    r.output("mean_unit_residual", Output::Number(max_abs(&(unit - CMatrix::identity(2, 2)))));
    Ok(r)
}

fn states(p: &Params, _: &Context) -> Result<Report> {
    let mut r = Report::new("");
    let (rho, sigma) = state_pair(p)?;
    let (phi, psi) = (zoo::functional(&rho)?, zoo::functional(&sigma)?);
    r.check(Check::at_most("choi_is_transpose", max_abs(&(phi.choi().matrix() - rho.rho().matrix().transpose())), 0.0));
    let g = geo(&phi, &psi)?;
    let rs = geometric_mean(rho.rho(), sigma.rho())?;
    let tol = cpmean_core::opmeans::tol_mean(rho.rho(), sigma.rho());
    r.check(Check::at_most(
        "mean_choi_is_transposed_mean",
        max_abs(&(g.choi().matrix() - rs.matrix().transpose())),
        tol,
    ));
    let n = rho.dim();
    let x = CMatrix::from_fn(n, n, |i, j| c64((i + 2 * j + 1) as f64, i as f64 - j as f64));
    let lhs = g.apply(&x)?[(0, 0)];
    let rhs = (rs.matrix() * &x).trace();
    r.check(Check::at_most("mean_is_trace_against_mean", (lhs - rhs).norm(), tol * max_abs(&x)));
    r.output("mean_density", Output::Matrix(rs.into_matrix()));
    Ok(r)
}

fn quantum_channels(p: &Params, _: &Context) -> Result<Report> {
    let mut r = Report::new("");
    let d = p.count("d", 1, 8)?;
    let (id, dep) = (zoo::identity(d)?, zoo::depolarizing(d)?);
    let g = geo(&id, &dep)?;
    let h = mean_cp(&MeanKind::Harmonic, &id, &dep)?;
    let df = d as f64;
    r.check(Check::at_most("geometric_mean_is_id_over_d", choi_dist(&g, &id.scale(1.0 / df)?), 1e-8));
    r.check(Check::at_most(
        "harmonic_mean_is_2_over_d2_plus_1_id",
        choi_dist(&h, &id.scale(2.0 / (df * df + 1.0))?),
        1e-8,
    ));
    for (label, map) in [("id", &id), ("depolarizing", &dep)] {
        let f = map.flags(cpmean_core::cpmaps::TOL_CHANNEL);
        r.check(Check::at_most(format!("{label}_unital"), f.unital_residual, f.tolerance));
    }
    let dep_index = index_cp(&dep)?.value();
    r.check(Check::at_most("depolarizing_index_is_d2", (dep_index - df * df).abs(), 1e-9 * df * df));
    r.output("geometric_coefficient", Output::Number(1.0 / df));
    r.output("harmonic_coefficient", Output::Number(2.0 / (df * df + 1.0)));
    Ok(r)
}

fn schur_multiplier(p: &Params, _: &Context) -> Result<Report> {
    let mut r = Report::new("");
    let n = p.count("n", 1, 6)?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed("seed")?);
    let a = sampling::psd(&mut rng, n, n);
    let b = sampling::psd(&mut rng, n, n);
    let (sa, sb) = (zoo::schur(&a)?, zoo::schur(&b)?);
    let x = CMatrix::from_fn(n, n, |i, j| c64(1.0 + i as f64, j as f64 - 0.5));
    let direct = a.matrix().component_mul(&x);
    r.check(Check::at_most(
        "schur_action_is_entrywise",
        max_abs(&(sa.apply(&x)? - direct)),
        1e-12 * max_abs(&x) * a.norm().max(1.0),
    ));
    let lhs = geo(&sa, &sb)?;
    let rhs = zoo::schur(&geometric_mean(&a, &b)?)?;
    r.check(Check::at_most(
        "mean_of_multipliers_is_multiplier_of_mean",
        op_norm(&(lhs.choi().matrix() - rhs.choi().matrix())),
        1e-7,
    ));
    Ok(r)
}

fn adjoint_maps(p: &Params, _: &Context) -> Result<Report> {
    let mut r = Report::new("");
    let (a, b) = (p.list("a")?, p.list("b")?);
    if a.len() != b.len() || a.iter().chain(&b).any(|&x| x <= 0.0) {
        return Err(CliError::Usage("a and b must be positive diagonals of equal length".into()));
    }
    let (pa, pb) = (zoo::conjugation(&diag(&a))?, zoo::conjugation(&diag(&b))?);
    let g = geo(&pa, &pb)?;
    let ab: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (x * y).sqrt()).collect();
    let amb = geometric_mean(&psd(diag(&a))?, &psd(diag(&b))?)?;
    r.check(Check::at_most(
        "commuting_mean_is_entrywise",
        max_abs(&(amb.matrix() - diag(&ab))),
        1e-12 * amb.norm().max(1.0),
    ));
    let proportional = a.iter().zip(&b).all(|(x, y)| (x * b[0] - y * a[0]).abs() <= 1e-12 * (x * b[0]).abs());
    let of_mean = zoo::conjugation(&diag(&ab))?;
    if proportional {
        r.check(Check::at_most(
            "mean_is_conjugation_by_mean",
            choi_dist(&g, &of_mean),
            1e-8 * of_mean.choi().norm().max(1.0),
        ));
    } else {
        r.check(Check::at_most("mean_is_zero", op_norm(g.choi().matrix()), 1e-8));
    }
    r.output("proportional", Output::Flag(proportional));
    r.output("conjugation_by_mean_norm", Output::Number(op_norm(of_mean.choi().matrix())));
    Ok(r)
}

fn ce_tensor(p: &Params, _: &Context) -> Result<Report> {
    let mut r = Report::new("");
    let (rho, sigma) = (p.list("rho")?, p.list("sigma")?);
    if rho.len() != sigma.len() || rho.len() > 3 {
        return Err(CliError::Usage("rho and sigma need the same length, at most 3".into()));
    }
    let e1 = zoo::cond_exp_tensor(1, &sigma)?;
    let e2 = zoo::cond_exp_tensor(2, &rho)?;
    let inv_sum = |w: &[f64]| w.iter().map(|x| 1.0 / x).sum::<f64>();
    let (s_rho, s_sigma) = (inv_sum(&rho), inv_sum(&sigma));
    let rel = |got: f64, want: f64| (got - want).abs() / want;
    r.check(Check::at_most("index_of_first_expectation", rel(index_cp(&e1)?.value(), s_sigma), 1e-9));
    r.check(Check::at_most("index_of_second_expectation", rel(index_cp(&e2)?.value(), s_rho), 1e-9));
    let n = rho.len();
    let g = geo(&e1, &e2)?;
    let lambda = (1.0 / (s_rho * s_sigma)).sqrt();
    r.check(Check::at_most("mean_is_multiple_of_id", choi_dist(&g, &zoo::identity(n * n)?.scale(lambda)?), 1e-7));
    let index = index_cp(&g)?.value();
    r.check(Check::at_most("index_of_mean", rel(index, (s_rho * s_sigma).sqrt()), 1e-7));
    r.output("lambda_rho", Output::Number(1.0 / s_rho));
    r.output("lambda_sigma", Output::Number(1.0 / s_sigma));
    r.output("index_of_mean", Output::Number(index));
    Ok(r)
}

fn rotation(p: &Params, _: &Context) -> Result<Report> {
    let mut r = Report::new("");
    let theta = p.real("theta")?;
    let e1 = zoo::cond_exp_diag(2)?;
    let e2 = zoo::cond_exp_rotated(theta)?;
    let g = geo(&e1, &e2)?;
    let s = (2.0 * theta).sin();
    if s.abs() > 1e-3 {
        r.check(Check::at_most("mean_is_half_id", choi_dist(&g, &zoo::identity(2)?.scale(0.5)?), 1e-7));
    } else if s.abs() <= 1e-12 {
        r.check(Check::at_most("mean_is_first_expectation", choi_dist(&g, &e1), 1e-8));
    }
    r.output("sin_2theta", Output::Number(s));
    r.output("mean_choi", Output::Matrix(g.choi().matrix().clone()));
    Ok(r)
}

fn kosaki_fidelity(p: &Params, _: &Context) -> Result<Report> {
    let mut r = Report::new("");
    let (rho, sigma) = state_pair(p)?;
    let q = state_mean_quantities(&rho, &sigma)?;
    r.check(Check::at_least_minus("geometric_below_sqrt", q.sqrt_trace - q.gm_trace, 1e-9));
    r.check(Check::at_least_minus("sqrt_below_fidelity", q.fidelity - q.sqrt_trace, 1e-9));
    let commute = max_abs(&(rho.rho().matrix() * sigma.rho().matrix() - sigma.rho().matrix() * rho.rho().matrix()));
    if commute <= 1e-12 {
        r.check(Check::at_most("commuting_equality", (q.fidelity - q.gm_trace).abs(), 1e-8));
    }
    r.output("trace_geometric_mean", Output::Number(q.gm_trace));
    r.output("trace_sqrt_product", Output::Number(q.sqrt_trace));
    r.output("fidelity", Output::Number(q.fidelity));
    Ok(r)
}

fn ando_recovery(_: &Params, _: &Context) -> Result<Report> {
    let mut r = Report::new("");
    let rows = |v: &[f64]| CMatrix::from_row_slice(3, 3, &v.iter().map(|&x| c64(x, 0.0)).collect::<Vec<_>>());
    let a = psd(diag(&[2.0, 1.0, 0.0]))?;
    let b = psd(rows(&[2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0]))?;
    // shorting B to ran A: B - B e3 e3* B / b33
    let want_ac = rows(&[2.0, 1.0, 0.0, 1.0, 1.5, 0.0, 0.0, 0.0, 0.0]);
    let want_sing = rows(&[0.0, 0.0, 0.0, 0.0, 0.5, 1.0, 0.0, 1.0, 2.0]);
    let split = decompose(&zoo::scalar_embedding(&a)?, &zoo::scalar_embedding(&b)?)?;
    r.check(Check::at_most("ac_part_is_shorted_operator", max_abs(&(split.ac.choi().matrix() - &want_ac)), 1e-6));
    r.check(Check::at_most("singular_part", max_abs(&(split.sing.choi().matrix() - &want_sing)), 1e-6));
    let ps = parallel_sum(&a, &b)?;
    let sum = a.matrix() + b.matrix();
    let direct = a.matrix()
        * sum
            .clone()
            .pseudo_inverse(RANK_RTOL * op_norm(&sum))
            .map_err(|e| cpmean_core::Error::Numerical(e.to_string()))?
        * b.matrix();
    r.check(Check::at_most("parallel_sum_is_product_form", max_abs(&(ps.matrix() - direct)), 1e-9));
    let ps_sing = parallel_sum(&a, split.sing.choi())?;
    r.check(Check::at_most("singular_part_is_singular", ps_sing.norm(), 1e-8 * b.norm().max(1.0)));
    r.output("alpha_min", Output::Number(split.alpha_min));
    r.output("ac", Output::Matrix(split.ac.choi().matrix().clone()));
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles() {
        assert_eq!(parse_real("0.5"), Some(0.5));
        assert_eq!(parse_real("pi"), Some(PI));
        assert_eq!(parse_real("pi/4"), Some(PI / 4.0));
        assert_eq!(parse_real("3*pi/8"), Some(3.0 * PI / 8.0));
        assert_eq!(parse_real("-pi/2"), Some(-PI / 2.0));
        assert_eq!(parse_real("nan"), None);
        assert_eq!(parse_real("pie"), None);
    }

    #[test]
    fn every_example_passes_with_defaults() {
        let ctx = Context::default();
        for e in REGISTRY {
            let report = e.run(&[], &ctx).unwrap();
            assert!(report.passed(), "{}", report.to_text());
        }
    }

    #[test]
    fn overrides_are_validated() {
        let ctx = Context::default();
        let rot = find("rotation").unwrap();
        assert!(rot.run(&["theta=0".into()], &ctx).unwrap().passed());
        assert!(rot.run(&["angle=1".into()], &ctx).is_err());
        assert!(rot.run(&["theta".into()], &ctx).is_err());
        assert!(find("quantum-channels").unwrap().run(&["d=3".into()], &ctx).unwrap().passed());
        assert!(find("nope").is_err());
    }
}

use std::path::{Path, PathBuf};

use cpmean_core::cpmaps::{index_cp, leq_cp, mean_cp_with, CpIndex, CpMap, TOL_CHANNEL};
use cpmean_core::hermlinalg::{c64, eigh, max_abs, CMatrix, HermitianMatrix, TOL_PSD};
use cpmean_core::lebesgue::{ac_part_oracle, decompose, is_abs_continuous, is_singular, tol_lim};
use cpmean_core::opmeans::{
    arithmetic_mean, geometric_mean, harmonic_mean, parallel_sum, MeanKind, MeanOptions, DEFAULT_LOG_NODES,
};

use crate::doc::{load_channel, save_channel, Loaded};
use crate::error::{CliError, Result};
use crate::report::{Check, Output, Report};

/// Settings shared by every command.
#[derive(Clone, Copy, Debug)]
pub struct Context {
    /// PSD tolerance for order and verify.
    pub tol: f64,
    /// Quadrature nodes for the logarithmic mean.
    pub nodes: usize,
}

impl Default for Context {
    fn default() -> Self {
        Self { tol: TOL_PSD, nodes: DEFAULT_LOG_NODES }
    }
}

fn load(report: &mut Report, role: &str, path: &Path) -> Result<CpMap> {
    let Loaded { map, name, sha256 } = load_channel(path)?;
    report.input(role, &path.display().to_string(), name, sha256);
    Ok(map)
}

fn same_shape(a: &CpMap, b: &CpMap) -> Result<()> {
    if a.dim_in() != b.dim_in() || a.dim_out() != b.dim_out() {
        return Err(CliError::Usage(format!(
            "maps {}→{} and {}→{} have different shapes",
            a.dim_in(),
            a.dim_out(),
            b.dim_in(),
            b.dim_out()
        )));
    }
    Ok(())
}

fn min_eig(m: CMatrix) -> Result<f64> {
    Ok(eigh(&HermitianMatrix::new(m)?)?.min())
}

/// Smallest eigenvalue of `[[A, X], [X, B]]`.
fn block_min_eig(a: &CMatrix, x: &CMatrix, b: &CMatrix) -> Result<f64> {
    let d = a.nrows();
    let mut block = CMatrix::zeros(2 * d, 2 * d);
    block.view_mut((0, 0), (d, d)).copy_from(a);
    block.view_mut((0, d), (d, d)).copy_from(x);
    block.view_mut((d, 0), (d, d)).copy_from(x);
    block.view_mut((d, d), (d, d)).copy_from(b);
    min_eig(block)
}

/// Least-squares `c` in `C ≈ c·C_id` and the residual of that fit.
fn identity_fit(map: &CpMap) -> (f64, f64) {
    let d = map.dim_in();
    let c = map.choi().matrix();
    let mut v = CMatrix::zeros(d * d, 1);
    for i in 0..d {
        v[(i * d + i, 0)] = c64(1.0, 0.0);
    }
    let coeff = (v.adjoint() * c * &v)[(0, 0)].re / (d * d) as f64;
    let residual = max_abs(&(c - &v * v.adjoint() * c64(coeff, 0.0)));
    (coeff, residual)
}

pub fn mean(ctx: &Context, kind: &str, a: &Path, b: &Path, out: Option<&Path>) -> Result<Report> {
    let kind: MeanKind = kind.parse()?;
    let mut r = Report::new("mean");
    let phi = load(&mut r, "a", a)?;
    let psi = load(&mut r, "b", b)?;
    same_shape(&phi, &psi)?;
    let opts = MeanOptions { log_nodes: ctx.nodes, ..MeanOptions::default() };
    let theta = mean_cp_with(&kind, &phi, &psi, &opts)?;
    let (ca, cb) = (phi.choi(), psi.choi());
    let scale = ca.norm().max(cb.norm()).max(1.0);

    if kind == MeanKind::Geometric {
        let lowest = block_min_eig(ca.matrix(), theta.choi().matrix(), cb.matrix())?;
        r.check(Check::at_least_minus("geo_certificate", lowest, TOL_PSD * 2.0 * scale));
    }
    let am = arithmetic_mean(ca, cb)?;
    let gm = geometric_mean(ca, cb)?;
    let hm = harmonic_mean(ca, cb)?;
    let chain_tol = 1e-7 * scale;
    r.check(Check::at_least_minus("arithmetic_minus_geometric", min_eig(am.matrix() - gm.matrix())?, chain_tol));
    r.check(Check::at_least_minus("geometric_minus_harmonic", min_eig(gm.matrix() - hm.matrix())?, chain_tol));

    r.output("kind", Output::Text(kind.to_string()));
    r.output("dim_in", Output::Number(theta.dim_in() as f64));
    r.output("dim_out", Output::Number(theta.dim_out() as f64));
    if theta.dim_in() == theta.dim_out() {
        let (coeff, residual) = identity_fit(&theta);
        let tol = 1e-8 * theta.choi().norm().max(1.0);
        r.output("multiple_of_identity", Output::Flag(residual <= tol));
        r.output("identity_coefficient", Output::Number(coeff));
    }
    r.output("choi", Output::Matrix(theta.choi().matrix().clone()));
    if let Some(path) = out {
        save_channel(&theta, path, Some(kind.to_string()))?;
        r.output("written", Output::Text(path.display().to_string()));
    }
    Ok(r)
}

pub fn order(ctx: &Context, a: &Path, b: &Path) -> Result<Report> {
    let mut r = Report::new("order");
    let phi = load(&mut r, "a", a)?;
    let psi = load(&mut r, "b", b)?;
    same_shape(&phi, &psi)?;
    let le = leq_cp(&phi, &psi, ctx.tol)?;
    let ge = leq_cp(&psi, &phi, ctx.tol)?;
    let relation = match (le, ge) {
        (true, true) => "equal",
        (true, false) => "≤cp",
        (false, true) => "≥cp",
        (false, false) => "incomparable",
    };
    r.output("relation", Output::Text(relation.into()));
    r.output("min_eig_b_minus_a", Output::Number(min_eig(psi.choi().matrix() - phi.choi().matrix())?));
    r.output("min_eig_a_minus_b", Output::Number(min_eig(phi.choi().matrix() - psi.choi().matrix())?));
    r.output("tolerance", Output::Number(ctx.tol));
    Ok(r)
}

pub fn index(a: &Path) -> Result<Report> {
    let mut r = Report::new("index");
    let phi = load(&mut r, "a", a)?;
    let idx = index_cp(&phi)?;
    r.output("finite", Output::Flag(idx.is_finite()));
    let text = match idx {
        CpIndex::Finite(v) => v.to_string(),
        CpIndex::Infinite => "infinite".to_string(),
    };
    r.output("index", Output::Text(text));
    Ok(r)
}

pub fn verify(ctx: &Context, a: &Path) -> Result<Report> {
    let mut r = Report::new("verify");
    let phi = load(&mut r, "a", a)?;
    let flags = phi.flags(TOL_CHANNEL);
    let lowest = phi.choi().min_eigenvalue();
    let cp = lowest >= -ctx.tol * phi.choi().norm().max(1.0);
    r.output("completely_positive", Output::Flag(cp));
    r.output("unital", Output::Flag(flags.is_unital));
    r.output("trace_preserving", Output::Flag(flags.is_trace_preserving));
    r.output("choi_min_eigenvalue", Output::Number(lowest));
    r.output("unital_residual", Output::Number(flags.unital_residual));
    r.output("trace_residual", Output::Number(flags.trace_residual));
    r.output("channel_tolerance", Output::Number(flags.tolerance));
    r.output("kraus_rank", Output::Number(phi.choi().rank(cpmean_core::hermlinalg::RANK_RTOL) as f64));
    Ok(r)
}

/// `PREFIX.ac.json` and `PREFIX.sing.json`.
pub fn split_paths(prefix: &Path) -> (PathBuf, PathBuf) {
    let with = |suffix: &str| {
        let mut s = prefix.as_os_str().to_owned();
        s.push(suffix);
        PathBuf::from(s)
    };
    (with(".ac.json"), with(".sing.json"))
}

pub fn lebesgue(phi_path: &Path, psi_path: &Path, out_prefix: Option<&Path>) -> Result<Report> {
    const ORACLE_N: u64 = 1 << 20;
    let mut r = Report::new("lebesgue");
    let phi = load(&mut r, "phi", phi_path)?;
    let psi = load(&mut r, "psi", psi_path)?;
    same_shape(&phi, &psi)?;
    let split = decompose(&phi, &psi)?;
    let scale = psi.choi().norm().max(1.0);

    let sum = split.ac.choi().matrix() + split.sing.choi().matrix();
    r.check(Check::at_most("additivity", max_abs(&(sum - psi.choi().matrix())), 1e-9 * scale));
    let leak = parallel_sum(phi.choi(), split.sing.choi())?.norm();
    r.check(Check::at_most("singular_part_is_singular", leak, 1e-8 * scale));

    r.output("alpha_min", Output::Number(split.alpha_min));
    r.output("singular", Output::Flag(is_singular(&phi, &psi, 1e-8 * scale)?));
    r.output("absolutely_continuous", Output::Flag(is_abs_continuous(&psi, &phi, tol_lim(&psi))?));
    match ac_part_oracle(&phi, &psi, ORACLE_N) {
        Ok(oracle) => {
            r.output("oracle_converged", Output::Flag(true));
            r.output("oracle_residual", Output::Number(max_abs(&(oracle.choi().matrix() - split.ac.choi().matrix()))));
        }
        Err(cpmean_core::Error::NonConvergence(_)) => {
            r.output("oracle_converged", Output::Flag(false));
            r.output("oracle_residual", Output::Number(f64::NAN));
        }
        Err(e) => return Err(e.into()),
    }
    r.output("ac", Output::Matrix(split.ac.choi().matrix().clone()));
    r.output("sing", Output::Matrix(split.sing.choi().matrix().clone()));
    if let Some(prefix) = out_prefix {
        let (ac_path, sing_path) = split_paths(prefix);
        save_channel(&split.ac, &ac_path, Some("ac".into()))?;
        save_channel(&split.sing, &sing_path, Some("sing".into()))?;
        r.output("written", Output::Text(format!("{}, {}", ac_path.display(), sing_path.display())));
    }
    Ok(r)
}

//! Command-line front-end for `cpmean-core`.
//!
//! Exit codes: 0 when every check passes, 2 for input and usage errors, 3
//! for numeric failures and failed checks.

pub mod commands;
pub mod doc;
pub mod error;
pub mod registry;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::commands::Context;
use crate::error::{CliError, Result};
use crate::report::{Format, Report};

#[derive(Debug, Parser)]
#[command(name = "cpmean", version, about = "Operator means, CP order and Lebesgue decompositions of CP maps")]
pub struct Cli {
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// PSD tolerance for `order` and `verify`.
    #[arg(long, global = true, env = "CPMEAN_DEFAULT_TOL")]
    pub tol: Option<f64>,
    /// Quadrature nodes for the logarithmic mean.
    #[arg(long, global = true, default_value_t = cpmean_core::opmeans::DEFAULT_LOG_NODES)]
    pub nodes: usize,
    /// Also write the JSON report to this file.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mean of two maps: geo, arith, harm, parallel, power:<α> or log.
    Mean {
        #[arg(long)]
        kind: String,
        a: PathBuf,
        b: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Compare two maps in the CP order.
    Order { a: PathBuf, b: PathBuf },
    /// Index inf{λ > 0 : λΦ - id ≥cp 0}.
    Index { a: PathBuf },
    /// CP, unital and trace-preserving flags.
    Verify { a: PathBuf },
    /// Split PSI into parts absolutely continuous and singular to PHI.
    Lebesgue {
        phi: PathBuf,
        psi: PathBuf,
        /// Writes PREFIX.ac.json and PREFIX.sing.json.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run a worked example, optionally with key=value parameters.
    Example {
        name: Option<String>,
        params: Vec<String>,
        #[arg(long, conflicts_with_all = ["name", "list"])]
        all: bool,
        #[arg(long, conflicts_with = "name")]
        list: bool,
    },
}

fn context(cli: &Cli) -> Result<Context> {
    let mut ctx = Context { nodes: cli.nodes, ..Context::default() };
    if let Some(tol) = cli.tol {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(CliError::Usage(format!("--tol must be a positive number, got {tol}")));
        }
        ctx.tol = tol;
    }
    if cli.nodes == 0 {
        return Err(CliError::Usage("--nodes must be positive".into()));
    }
    Ok(ctx)
}

fn listing() -> Report {
    let mut r = Report::new("example --list");
    for e in registry::REGISTRY {
        let params: Vec<String> = e.defaults.iter().map(|(k, v)| format!("{k}={v}")).collect();
        r.output(e.name, report::Output::Text(format!("{} [{}]", e.summary, params.join(" "))));
    }
    r
}

pub fn execute(cli: &Cli) -> Result<Report> {
    let ctx = context(cli)?;
    match &cli.command {
        Command::Mean { kind, a, b, out } => commands::mean(&ctx, kind, a, b, out.as_deref()),
        Command::Order { a, b } => commands::order(&ctx, a, b),
        Command::Index { a } => commands::index(a),
        Command::Verify { a } => commands::verify(&ctx, a),
        Command::Lebesgue { phi, psi, out } => commands::lebesgue(phi, psi, out.as_deref()),
        Command::Example { all: true, .. } => Ok(registry::run_all(&ctx)),
        Command::Example { list: true, .. } => Ok(listing()),
        Command::Example { name: Some(name), params, .. } => registry::find(name)?.run(params, &ctx),
        Command::Example { name: None, .. } => Err(CliError::Usage("give an example name, --all or --list".into())),
    }
}

/// Parses `args`, runs the command, prints the report and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(report) => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(report.render(cli.format).as_bytes());
            if let Some(path) = &cli.report {
                if let Err(source) = std::fs::write(path, report.render(Format::Json)) {
                    eprintln!("error: {}", CliError::Write { path: path.clone(), source });
                    return 2;
                }
            }
            if report.passed() {
                0
            } else {
                3
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

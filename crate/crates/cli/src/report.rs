//! Command reports, rendered as text or JSON.

use std::fmt::Write as _;

use clap::ValueEnum;
use cpmean_core::hermlinalg::CMatrix;
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::doc::{matrix_value, number};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Clone, Debug)]
pub struct Input {
    pub role: String,
    pub path: String,
    pub name: Option<String>,
    pub sha256: String,
}

#[derive(Clone, Debug)]
pub enum Output {
    Number(f64),
    Text(String),
    Flag(bool),
    Matrix(CMatrix),
}

#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub residual: f64,
    pub tolerance: f64,
}

impl Check {
    /// Passes when `residual ≤ tolerance`.
    pub fn at_most(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Self { name: name.into(), pass: residual <= tolerance, residual, tolerance }
    }

    /// Passes when `residual ≥ -tolerance`; used for smallest eigenvalues.
    pub fn at_least_minus(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Self { name: name.into(), pass: residual >= -tolerance, residual, tolerance }
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub command: String,
    pub inputs: Vec<Input>,
    pub outputs: Vec<(String, Output)>,
    pub checks: Vec<Check>,
    /// Nested reports, one per example for `example --all`.
    pub sections: Vec<Report>,
}

fn scalar(x: f64) -> Value {
    if x.is_finite() {
        number(x)
    } else if x.is_nan() {
        Value::String("nan".into())
    } else if x > 0.0 {
        Value::String("inf".into())
    } else {
        Value::String("-inf".into())
    }
}

fn complex_text(z: Complex64) -> String {
    let clean = |x: f64| if x.abs() < 5e-13 { 0.0 } else { x };
    let (re, im) = (clean(z.re), clean(z.im));
    if im == 0.0 {
        format!("{re:.6}")
    } else {
        format!("{re:.6}{im:+.6}i")
    }
}

impl Report {
    pub fn new(command: impl Into<String>) -> Self {
        Self {
            command: command.into(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            checks: Vec::new(),
            sections: Vec::new(),
        }
    }

    pub fn input(&mut self, role: &str, path: &str, name: Option<String>, sha256: String) {
        self.inputs.push(Input { role: role.into(), path: path.into(), name, sha256 });
    }

    pub fn output(&mut self, name: &str, value: Output) {
        self.outputs.push((name.into(), value));
    }

    pub fn check(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass) && self.sections.iter().all(Report::passed)
    }

    pub fn to_json(&self) -> Value {
        let inputs: Vec<Value> = self
            .inputs
            .iter()
            .map(|i| json!({"role": i.role, "path": i.path, "name": i.name, "sha256": i.sha256}))
            .collect();
        let outputs: Vec<Value> = self
            .outputs
            .iter()
            .map(|(name, value)| {
                let (kind, v) = match value {
                    Output::Number(x) => ("number", scalar(*x)),
                    Output::Text(s) => ("text", Value::String(s.clone())),
                    Output::Flag(b) => ("flag", Value::Bool(*b)),
                    Output::Matrix(m) => ("matrix", matrix_value(m)),
                };
                json!({"name": name, "kind": kind, "value": v})
            })
            .collect();
        let checks: Vec<Value> = self
            .checks
            .iter()
            .map(|c| json!({"name": c.name, "pass": c.pass, "residual": scalar(c.residual), "tolerance": scalar(c.tolerance)}))
            .collect();
        json!({
            "command": self.command,
            "passed": self.passed(),
            "inputs": inputs,
            "outputs": outputs,
            "checks": checks,
            "sections": self.sections.iter().map(Report::to_json).collect::<Vec<_>>(),
        })
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        self.write_text(&mut s, "");
        s
    }

    fn write_text(&self, s: &mut String, indent: &str) {
        let verdict = if self.passed() { "ok" } else { "FAILED" };
        let _ = writeln!(s, "{indent}{} [{verdict}]", self.command);
        for i in &self.inputs {
            let name = i.name.as_deref().map(|n| format!(" ({n})")).unwrap_or_default();
            let _ = writeln!(
                s,
                "{indent}  input {}: {}{name} sha256:{}",
                i.role,
                i.path,
                &i.sha256[..12.min(i.sha256.len())]
            );
        }
        for (name, value) in &self.outputs {
            match value {
                Output::Number(x) => {
                    let _ = writeln!(s, "{indent}  {name} = {x}");
                }
                Output::Text(t) => {
                    let _ = writeln!(s, "{indent}  {name} = {t}");
                }
                Output::Flag(b) => {
                    let _ = writeln!(s, "{indent}  {name} = {b}");
                }
                Output::Matrix(m) => {
                    let _ = writeln!(s, "{indent}  {name} ({}x{}):", m.nrows(), m.ncols());
                    for i in 0..m.nrows() {
                        let row: Vec<String> = (0..m.ncols()).map(|j| complex_text(m[(i, j)])).collect();
                        let _ = writeln!(s, "{indent}    [{}]", row.join(", "));
                    }
                }
            }
        }
        for c in &self.checks {
            let mark = if c.pass { "PASS" } else { "FAIL" };
            let _ = writeln!(s, "{indent}  {mark} {}: residual {:e}, tolerance {:e}", c.name, c.residual, c.tolerance);
        }
        let nested = format!("{indent}  ");
        for section in &self.sections {
            section.write_text(s, &nested);
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.to_text(),
            Format::Json => serde_json::to_string_pretty(&self.to_json()).expect("reports serialize") + "\n",
        }
    }
}

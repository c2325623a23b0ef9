//! Report assembly and emission.

use std::io::Write;
use std::path::Path;

use contestlab_core::continuum::ConvergenceRow;
use contestlab_core::design::BudgetOptimum;
use contestlab_core::verify::{GapRow, MonteCarloEstimate};
use serde::Serialize;

use crate::config::{Format, Tolerances};
use crate::error::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub tolerances: Tolerances,
    pub seed: u64,
    pub version: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: &'static str,
    /// SHA-256 of the canonical config, excluding output path and format.
    pub inputs_digest: String,
    pub results: Results,
    pub meta: Meta,
}

#[derive(Debug, Clone, Serialize)]
pub struct TypeRow {
    pub k: usize,
    pub prob: f64,
    pub lower: f64,
    pub upper: f64,
    pub utility: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveResult {
    pub b: Vec<f64>,
    pub u: Vec<f64>,
    pub types: Vec<TypeRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TypeEffort {
    pub k: usize,
    pub prob: f64,
    pub effort: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EffortResult {
    pub expected_effort: f64,
    /// `Σ α_m v_m`, present for linear costs.
    pub closed_form: Option<f64>,
    /// `E[c(X)]`, present for a common base cost.
    pub expected_cost: Option<f64>,
    pub per_type: Vec<TypeEffort>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AlphaRow {
    pub m: usize,
    pub alpha: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareRow {
    pub m: usize,
    pub m_prime: usize,
    pub linear_effect: f64,
    pub classification: String,
    pub top_type_condition: bool,
    pub single_crossing: bool,
    pub utility_effects: Vec<f64>,
    pub numeric_effect: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyResult {
    pub rows: Vec<GapRow>,
    pub max_gap: f64,
    pub max_residual: f64,
    /// `max_gap <= tol_gap · v_N`.
    pub passed: bool,
    pub expected_effort: f64,
    pub monte_carlo: MonteCarloEstimate,
    /// Quadrature effort lies within the Monte Carlo half-width.
    pub monte_carlo_consistent: bool,
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Results {
    Solve(SolveResult),
    Effort(EffortResult),
    Alpha { alpha: Vec<AlphaRow> },
    Compare { rows: Vec<CompareRow> },
    Optimize(BudgetOptimum),
    Verify(VerifyResult),
    Converge { rows: Vec<ConvergenceRow> },
}

/// `x` with 12 significant digits, trailing zeros removed.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: String| {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    if (-4..12).contains(&exp) {
        trim(format!("{:.*}", (11 - exp) as usize, x))
    } else {
        format!("{}e{exp}", trim(mantissa.to_string()))
    }
}

fn row(cells: &[String]) -> String {
    let mut line = cells.join(",");
    line.push('\n');
    line
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is serializable");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let f = |x: f64| fmt_sig(x);
        let mut out = String::new();
        match &self.results {
            Results::Solve(r) => {
                out += &row(&["k", "prob", "lower", "upper", "utility"].map(String::from));
                for t in &r.types {
                    out += &row(&[t.k.to_string(), f(t.prob), f(t.lower), f(t.upper), f(t.utility)]);
                }
            }
            Results::Effort(r) => {
                out += &row(&["k", "prob", "effort"].map(String::from));
                for t in &r.per_type {
                    out += &row(&[t.k.to_string(), f(t.prob), f(t.effort)]);
                }
                out += &row(&["all".into(), "1".into(), f(r.expected_effort)]);
            }
            Results::Alpha { alpha } => {
                out += &row(&["m", "alpha"].map(String::from));
                for a in alpha {
                    out += &row(&[a.m.to_string(), f(a.alpha)]);
                }
            }
            Results::Compare { rows } => {
                out += &row(&["m", "m_prime", "linear_effect", "classification"].map(String::from));
                for r in rows {
                    out +=
                        &row(&[r.m.to_string(), r.m_prime.to_string(), f(r.linear_effect), r.classification.clone()]);
                }
            }
            Results::Optimize(r) => {
                let n = r.prizes.len();
                let mut header: Vec<String> = ["label", "value", "selected"].map(String::from).to_vec();
                header.extend((0..n).map(|m| format!("v_{m}")));
                out += &row(&header);
                let mut emit = |label: &str, value: f64, prizes: &[f64], selected: bool| {
                    let mut cells = vec![label.to_string(), f(value), selected.to_string()];
                    cells.extend(prizes.iter().map(|&p| f(p)));
                    out += &row(&cells);
                };
                let mut chosen = false;
                for v in &r.vertices {
                    let selected = !chosen && v.label == r.label;
                    chosen |= selected;
                    emit(&v.label, v.value, &v.prizes, selected);
                }
                if !chosen {
                    emit(&r.label, r.value, &r.prizes, true);
                }
            }
            Results::Verify(r) => {
                out += &row(&["k", "gap", "argmax", "residual"].map(String::from));
                for g in &r.rows {
                    out += &row(&[g.k.to_string(), f(g.gap), f(g.argmax), f(g.residual)]);
                }
            }
            Results::Converge { rows } => {
                out += &row(&["n", "sup_gap"].map(String::from));
                for r in rows {
                    out += &row(&[r.n.to_string(), f(r.sup_gap)]);
                }
            }
        }
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }
}

/// Writes `report` to `path` through a temporary file and rename, or to
/// standard output when `path` is `None`.
pub fn emit_report(report: &Report, format: Format, path: Option<&Path>) -> Result<(), CliError> {
    let body = report.render(format);
    let io = |p: &Path, e: std::io::Error| CliError::Io(format!("{}: {e}", p.display()));
    match path {
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(body.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Io(format!("stdout: {e}")))
        }
        Some(path) => {
            let dir = match path.parent() {
                Some(d) if !d.as_os_str().is_empty() => d,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io(dir, e))?;
            tmp.write_all(body.as_bytes()).map_err(|e| io(path, e))?;
            tmp.as_file().sync_all().map_err(|e| io(path, e))?;
            tmp.persist(path).map_err(|e| io(path, e.error))?;
            Ok(())
        }
    }
}

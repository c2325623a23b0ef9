//! Sectioned key-value run configuration.
//!
//! ```text
//! [environment]
//! n = 2
//! kinds = linear
//! thetas = 2, 1
//! probs = 0.5, 0.5
//!
//! [contest]
//! prizes = 0, 0, 1
//!
//! [command]
//! name = solve
//! ```
//!
//! The same sections and keys are accepted as a JSON object of objects.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::Path;

use contestlab_core::continuum::{ContinuumEnvironment, TypeDistribution};
use contestlab_core::costs::{ContestEnvironment, CostFunction, MonotoneCubic, Violation};
use contestlab_core::kernels::Contest;
use serde::Serialize;

use crate::error::CliError;

pub const SECTIONS: [&str; 4] = ["environment", "contest", "command", "output"];

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    value: String,
    line: Option<usize>,
}

/// Raw sections before schema checks, with the line each key came from.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Document {
    sections: BTreeMap<String, BTreeMap<String, Entry>>,
}

impl Document {
    pub fn parse_text(text: &str) -> Result<Self, CliError> {
        let mut doc = Document::default();
        let mut current: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| CliError::Parse {
                        line,
                        message: format!("unterminated section header `{content}`"),
                    })?
                    .trim();
                if !SECTIONS.contains(&name) {
                    return Err(CliError::schema(name, Some(line), "unknown section"));
                }
                if doc.sections.contains_key(name) {
                    return Err(CliError::Parse { line, message: format!("section [{name}] appears twice") });
                }
                doc.sections.insert(name.to_string(), BTreeMap::new());
                current = Some(name.to_string());
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| CliError::Parse { line, message: format!("expected `key = value`, got `{content}`") })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(CliError::Parse { line, message: "empty key".into() });
            }
            let section = current
                .as_ref()
                .ok_or_else(|| CliError::Parse { line, message: format!("`{key}` appears before any section") })?;
            let entries = doc.sections.get_mut(section).expect("section registered");
            if entries.contains_key(key) {
                return Err(CliError::Parse { line, message: format!("`{key}` set twice in [{section}]") });
            }
            entries.insert(key.to_string(), Entry { value: value.trim().to_string(), line: Some(line) });
        }
        Ok(doc)
    }

    pub fn parse_json(text: &str) -> Result<Self, CliError> {
        let root: serde_json::Value =
            serde_json::from_str(text).map_err(|e| CliError::Parse { line: e.line(), message: e.to_string() })?;
        let root = root
            .as_object()
            .ok_or_else(|| CliError::Parse { line: 1, message: "top level must be an object".into() })?;
        let mut doc = Document::default();
        for (name, body) in root {
            if !SECTIONS.contains(&name.as_str()) {
                return Err(CliError::schema(name, None, "unknown section"));
            }
            let body = body.as_object().ok_or_else(|| CliError::schema(name, None, "section must be an object"))?;
            let mut entries = BTreeMap::new();
            for (key, value) in body {
                let value = json_scalar(value).ok_or_else(|| CliError::schema(key, None, "unsupported value"))?;
                entries.insert(key.clone(), Entry { value, line: None });
            }
            doc.sections.insert(name.clone(), entries);
        }
        Ok(doc)
    }

    /// Line of the first definition of `field` in any section.
    pub fn line_of(&self, field: &str) -> Option<usize> {
        self.sections.values().find_map(|s| s.get(field).and_then(|e| e.line))
    }

    fn section<'a>(&'a self, name: &'a str) -> Section<'a> {
        Section { name, entries: self.sections.get(name) }
    }
}

/// Flattens JSON values to the text syntax: arrays become comma lists and
/// `[x, c]` pairs become `x:c`.
fn json_scalar(value: &serde_json::Value) -> Option<String> {
    use serde_json::Value;
    match value {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Null => Some("-".into()),
        Value::Array(items) => {
            let parts: Option<Vec<String>> = items
                .iter()
                .map(|item| match item {
                    Value::Array(pair) if pair.len() == 2 => {
                        Some(format!("{}:{}", json_scalar(&pair[0])?, json_scalar(&pair[1])?))
                    }
                    Value::Array(_) | Value::Object(_) => None,
                    other => json_scalar(other),
                })
                .collect();
            Some(parts?.join(", "))
        }
        Value::Object(_) => None,
    }
}

struct Section<'a> {
    name: &'a str,
    entries: Option<&'a BTreeMap<String, Entry>>,
}

impl<'a> Section<'a> {
    fn get(&self, key: &str) -> Option<&'a Entry> {
        self.entries.and_then(|e| e.get(key))
    }

    fn require(&self, key: &str) -> Result<&'a Entry, CliError> {
        self.get(key).ok_or_else(|| CliError::schema(key, None, format!("missing required key in [{}]", self.name)))
    }

    fn reject_unknown(&self, allowed: &[&str]) -> Result<(), CliError> {
        for (key, entry) in self.entries.into_iter().flatten() {
            let known = allowed.contains(&key.as_str()) || (self.name == "environment" && key.starts_with("table."));
            if !known {
                return Err(CliError::schema(key, entry.line, format!("unknown key in [{}]", self.name)));
            }
        }
        Ok(())
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str, what: &str) -> Result<Option<T>, CliError> {
        self.get(key).map(|e| scalar(key, e, what)).transpose()
    }

    fn parsed_or<T: std::str::FromStr>(&self, key: &str, what: &str, default: T) -> Result<T, CliError> {
        Ok(self.parsed(key, what)?.unwrap_or(default))
    }
}

fn scalar<T: std::str::FromStr>(key: &str, entry: &Entry, what: &str) -> Result<T, CliError> {
    entry
        .value
        .parse()
        .map_err(|_| CliError::schema(key, entry.line, format!("expected {what}, got `{}`", entry.value)))
}

fn list(entry: &Entry) -> Vec<&str> {
    if entry.value.is_empty() {
        return Vec::new();
    }
    entry.value.split(',').map(str::trim).collect()
}

fn number_list<T: std::str::FromStr>(key: &str, entry: &Entry, what: &str) -> Result<Vec<T>, CliError> {
    list(entry)
        .into_iter()
        .map(|item| {
            item.parse()
                .map_err(|_| CliError::schema(key, entry.line, format!("expected a list of {what}, got `{item}`")))
        })
        .collect()
}

fn pair_list(key: &str, entry: &Entry) -> Result<Vec<(f64, f64)>, CliError> {
    list(entry)
        .into_iter()
        .map(|item| {
            let bad = || CliError::schema(key, entry.line, format!("expected `x:y` pairs, got `{item}`"));
            let (x, y) = item.split_once(':').ok_or_else(bad)?;
            Ok((x.trim().parse().map_err(|_| bad())?, y.trim().parse().map_err(|_| bad())?))
        })
        .collect()
}

/// Broadcasts a one-element list to `k` entries.
fn broadcast<'a>(key: &str, entry: &'a Entry, k: usize) -> Result<Vec<&'a str>, CliError> {
    let items = list(entry);
    match items.len() {
        1 => Ok(vec![items[0]; k]),
        len if len == k => Ok(items),
        len => Err(CliError::schema(key, entry.line, format!("expected 1 or {k} values, got {len}"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CostKind {
    Linear,
    Power,
    Tabulated,
}

impl CostKind {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "linear" => Some(CostKind::Linear),
            "power" => Some(CostKind::Power),
            "tabulated" => Some(CostKind::Tabulated),
            _ => None,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            CostKind::Linear => "linear",
            CostKind::Power => "power",
            CostKind::Tabulated => "tabulated",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypeConfig {
    pub kind: CostKind,
    pub theta: f64,
    pub exponent: Option<f64>,
    pub table: Option<Vec<(f64, f64)>>,
    pub prob: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionKind {
    Uniform,
    TruncatedPower,
    Tabulated,
}

impl DistributionKind {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "uniform" => Some(DistributionKind::Uniform),
            "truncated_power" => Some(DistributionKind::TruncatedPower),
            "tabulated" => Some(DistributionKind::Tabulated),
            _ => None,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            DistributionKind::Uniform => "uniform",
            DistributionKind::TruncatedPower => "truncated_power",
            DistributionKind::Tabulated => "tabulated",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuumConfig {
    pub distribution: DistributionKind,
    pub theta_low: f64,
    pub theta_high: f64,
    pub exponent: Option<f64>,
    pub table: Option<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Population {
    Types(Vec<TypeConfig>),
    Continuum(ContinuumConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvironmentConfig {
    pub n: usize,
    pub population: Population,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ContestConfig {
    Prizes(Vec<f64>),
    Budget(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Vertex,
    VertexPlusSearch,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum CommandConfig {
    Solve,
    Effort,
    Alpha,
    /// `None` compares every pair `m > m'`.
    Compare {
        pair: Option<(usize, usize)>,
    },
    Optimize {
        mode: Mode,
        restarts: usize,
        max_evals: usize,
    },
    Verify {
        grid_size: usize,
        samples: usize,
    },
    Converge {
        n_list: Vec<usize>,
        x_points: usize,
    },
}

impl CommandConfig {
    pub fn name(&self) -> &'static str {
        match self {
            CommandConfig::Solve => "solve",
            CommandConfig::Effort => "effort",
            CommandConfig::Alpha => "alpha",
            CommandConfig::Compare { .. } => "compare",
            CommandConfig::Optimize { .. } => "optimize",
            CommandConfig::Verify { .. } => "verify",
            CommandConfig::Converge { .. } => "converge",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "json" => Some(Format::Json),
            "csv" => Some(Format::Csv),
            _ => None,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Best-response gap allowed per unit of top prize.
    pub gap: f64,
    /// Design ties per unit of budget.
    pub tie: f64,
    /// Finite-difference step per unit of top prize.
    pub fd_step: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { gap: 1e-6, tie: contestlab_core::design::TIE_TOL, fd_step: contestlab_core::competition::FD_STEP_REL }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputConfig {
    pub format: Format,
    /// `None` or `-` writes to standard output.
    pub path: Option<String>,
    pub seed: u64,
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub environment: EnvironmentConfig,
    pub contest: ContestConfig,
    pub command: CommandConfig,
    pub output: OutputConfig,
}

const ENV_KEYS: [&str; 10] = [
    "n",
    "kinds",
    "thetas",
    "exponents",
    "probs",
    "distribution",
    "theta_low",
    "theta_high",
    "dist_exponent",
    "dist_table",
];

fn environment_from(doc: &Document) -> Result<EnvironmentConfig, CliError> {
    let sec = doc.section("environment");
    if sec.entries.is_none() {
        return Err(CliError::schema("environment", None, "missing section"));
    }
    sec.reject_unknown(&ENV_KEYS)?;
    let n_entry = sec.require("n")?;
    let n: usize = scalar("n", n_entry, "a positive integer")?;
    if n == 0 {
        return Err(CliError::schema("n", n_entry.line, "need at least one opponent"));
    }
    let population = match (sec.get("thetas"), sec.get("distribution")) {
        (Some(_), Some(d)) => {
            return Err(CliError::schema("distribution", d.line, "give either `thetas` or `distribution`, not both"))
        }
        (None, None) => return Err(CliError::schema("thetas", None, "missing `thetas` (or `distribution`)")),
        (Some(thetas), None) => Population::Types(types_from(&sec, thetas)?),
        (None, Some(dist)) => Population::Continuum(continuum_from(&sec, dist)?),
    };
    Ok(EnvironmentConfig { n, population })
}

fn types_from(sec: &Section<'_>, thetas_entry: &Entry) -> Result<Vec<TypeConfig>, CliError> {
    for key in ["theta_low", "theta_high", "dist_exponent", "dist_table"] {
        if let Some(e) = sec.get(key) {
            return Err(CliError::schema(key, e.line, "only valid with `distribution`"));
        }
    }
    let thetas: Vec<f64> = number_list("thetas", thetas_entry, "numbers")?;
    let k = thetas.len();
    if k == 0 {
        return Err(CliError::schema("thetas", thetas_entry.line, "need at least one type"));
    }
    let probs_entry = sec.require("probs")?;
    let probs: Vec<f64> = number_list("probs", probs_entry, "numbers")?;
    if probs.len() != k {
        return Err(CliError::schema("probs", probs_entry.line, format!("expected {k} values, got {}", probs.len())));
    }
    let kinds: Vec<CostKind> = match sec.get("kinds") {
        None => vec![CostKind::Linear; k],
        Some(e) => broadcast("kinds", e, k)?
            .into_iter()
            .map(|s| {
                CostKind::parse(s).ok_or_else(|| {
                    CliError::schema("kinds", e.line, format!("unknown kind `{s}` (linear, power, tabulated)"))
                })
            })
            .collect::<Result<_, _>>()?,
    };
    let exponents: Vec<Option<f64>> = match sec.get("exponents") {
        None => vec![None; k],
        Some(e) => broadcast("exponents", e, k)?
            .into_iter()
            .map(|s| match s {
                "-" | "" => Ok(None),
                s => s
                    .parse()
                    .map(Some)
                    .map_err(|_| CliError::schema("exponents", e.line, format!("expected a number or `-`, got `{s}`"))),
            })
            .collect::<Result<_, _>>()?,
    };
    let mut types = Vec::with_capacity(k);
    for i in 0..k {
        let table_key = format!("table.{}", i + 1);
        let table = sec.get(&table_key).map(|e| pair_list(&table_key, e)).transpose()?;
        let kinds_line = sec.get("kinds").and_then(|e| e.line);
        match kinds[i] {
            CostKind::Power if exponents[i].is_none() => {
                return Err(CliError::schema(
                    "exponents",
                    kinds_line,
                    format!("type {} is power but has no exponent", i + 1),
                ))
            }
            CostKind::Linear | CostKind::Tabulated if exponents[i].is_some() => {
                let line = sec.get("exponents").and_then(|e| e.line);
                return Err(CliError::schema("exponents", line, format!("type {} takes no exponent; use `-`", i + 1)));
            }
            CostKind::Tabulated if table.is_none() => {
                return Err(CliError::schema(
                    &table_key,
                    kinds_line,
                    format!("type {} is tabulated but has no table", i + 1),
                ))
            }
            CostKind::Linear | CostKind::Power if table.is_some() => {
                let line = sec.get(&table_key).and_then(|e| e.line);
                return Err(CliError::schema(&table_key, line, format!("type {} is not tabulated", i + 1)));
            }
            _ => {}
        }
        types.push(TypeConfig { kind: kinds[i], theta: thetas[i], exponent: exponents[i], table, prob: probs[i] });
    }
    if let Some((key, e)) = sec.entries.into_iter().flatten().find(|(key, _)| {
        key.strip_prefix("table.").is_some_and(|idx| idx.parse::<usize>().map_or(true, |i| i == 0 || i > k))
    }) {
        return Err(CliError::schema(key, e.line, format!("table index must lie in 1..={k}")));
    }
    Ok(types)
}

fn continuum_from(sec: &Section<'_>, dist_entry: &Entry) -> Result<ContinuumConfig, CliError> {
    for key in ["kinds", "exponents", "probs"] {
        if let Some(e) = sec.get(key) {
            return Err(CliError::schema(key, e.line, "not valid with `distribution`"));
        }
    }
    if let Some((key, e)) = sec.entries.into_iter().flatten().find(|(k, _)| k.starts_with("table.")) {
        return Err(CliError::schema(key, e.line, "not valid with `distribution`"));
    }
    let distribution = DistributionKind::parse(&dist_entry.value).ok_or_else(|| {
        CliError::schema(
            "distribution",
            dist_entry.line,
            format!("unknown distribution `{}` (uniform, truncated_power, tabulated)", dist_entry.value),
        )
    })?;
    let theta_low = scalar("theta_low", sec.require("theta_low")?, "a number")?;
    let theta_high = scalar("theta_high", sec.require("theta_high")?, "a number")?;
    let exponent = sec.parsed("dist_exponent", "a number")?;
    let table = sec.get("dist_table").map(|e| pair_list("dist_table", e)).transpose()?;
    let line = dist_entry.line;
    match distribution {
        DistributionKind::TruncatedPower if exponent.is_none() => {
            return Err(CliError::schema("dist_exponent", line, "truncated_power needs `dist_exponent`"))
        }
        DistributionKind::Tabulated if table.is_none() => {
            return Err(CliError::schema("dist_table", line, "tabulated distribution needs `dist_table`"))
        }
        _ => {}
    }
    if distribution != DistributionKind::TruncatedPower && exponent.is_some() {
        return Err(CliError::schema(
            "dist_exponent",
            sec.get("dist_exponent").and_then(|e| e.line),
            "only valid for truncated_power",
        ));
    }
    if distribution != DistributionKind::Tabulated && table.is_some() {
        return Err(CliError::schema(
            "dist_table",
            sec.get("dist_table").and_then(|e| e.line),
            "only valid for tabulated",
        ));
    }
    Ok(ContinuumConfig { distribution, theta_low, theta_high, exponent, table })
}

fn contest_from(doc: &Document) -> Result<ContestConfig, CliError> {
    let sec = doc.section("contest");
    if sec.entries.is_none() {
        return Err(CliError::schema("contest", None, "missing section"));
    }
    sec.reject_unknown(&["prizes", "budget"])?;
    match (sec.get("prizes"), sec.get("budget")) {
        (Some(p), None) => Ok(ContestConfig::Prizes(number_list("prizes", p, "numbers")?)),
        (None, Some(b)) => Ok(ContestConfig::Budget(scalar("budget", b, "a number")?)),
        (Some(_), Some(b)) => Err(CliError::schema("budget", b.line, "give either `prizes` or `budget`, not both")),
        (None, None) => Err(CliError::schema("prizes", None, "missing `prizes` (or `budget`)")),
    }
}

fn command_from(doc: &Document) -> Result<CommandConfig, CliError> {
    let sec = doc.section("command");
    if sec.entries.is_none() {
        return Err(CliError::schema("command", None, "missing section"));
    }
    let name_entry = sec.require("name")?;
    let (command, allowed): (CommandConfig, &[&str]) = match name_entry.value.as_str() {
        "solve" => (CommandConfig::Solve, &["name"]),
        "effort" => (CommandConfig::Effort, &["name"]),
        "alpha" => (CommandConfig::Alpha, &["name"]),
        "compare" => {
            let pair = match (sec.parsed::<usize>("m", "an integer")?, sec.parsed::<usize>("m_prime", "an integer")?) {
                (Some(m), Some(mp)) => Some((m, mp)),
                (None, None) => None,
                (Some(_), None) => return Err(CliError::schema("m_prime", None, "`m` needs `m_prime`")),
                (None, Some(_)) => return Err(CliError::schema("m", None, "`m_prime` needs `m`")),
            };
            (CommandConfig::Compare { pair }, &["name", "m", "m_prime"])
        }
        "optimize" => {
            let mode = match sec.get("mode") {
                None => Mode::Vertex,
                Some(e) => match e.value.as_str() {
                    "vertex" => Mode::Vertex,
                    "vertex_plus_search" => Mode::VertexPlusSearch,
                    other => {
                        return Err(CliError::schema(
                            "mode",
                            e.line,
                            format!("unknown mode `{other}` (vertex, vertex_plus_search)"),
                        ))
                    }
                },
            };
            let restarts = sec.parsed_or("restarts", "an integer", 8)?;
            let max_evals = sec.parsed_or("max_evals", "an integer", 10_000)?;
            (CommandConfig::Optimize { mode, restarts, max_evals }, &["name", "mode", "restarts", "max_evals"])
        }
        "verify" => {
            let grid_size = sec.parsed_or("grid_size", "an integer", 1000)?;
            let samples = sec.parsed_or("samples", "an integer", 100_000)?;
            (CommandConfig::Verify { grid_size, samples }, &["name", "grid_size", "samples"])
        }
        "converge" => {
            let n_list = match sec.get("n_list") {
                Some(e) => number_list("n_list", e, "integers")?,
                None => vec![4, 16, 64, 256],
            };
            let x_points = sec.parsed_or("x_points", "an integer", 201)?;
            (CommandConfig::Converge { n_list, x_points }, &["name", "n_list", "x_points"])
        }
        other => {
            return Err(CliError::schema(
                "name",
                name_entry.line,
                format!("unknown command `{other}` (solve, effort, alpha, compare, optimize, verify, converge)"),
            ))
        }
    };
    sec.reject_unknown(allowed)?;
    Ok(command)
}

fn output_from(doc: &Document) -> Result<OutputConfig, CliError> {
    let sec = doc.section("output");
    sec.reject_unknown(&["format", "path", "seed", "tol_gap", "tol_tie", "fd_step"])?;
    let format = match sec.get("format") {
        None => Format::Json,
        Some(e) => Format::parse(&e.value)
            .ok_or_else(|| CliError::schema("format", e.line, format!("unknown format `{}` (json, csv)", e.value)))?,
    };
    let path = sec.get("path").map(|e| e.value.clone()).filter(|p| p != "-" && !p.is_empty());
    let defaults = Tolerances::default();
    let tolerances = Tolerances {
        gap: sec.parsed_or("tol_gap", "a number", defaults.gap)?,
        tie: sec.parsed_or("tol_tie", "a number", defaults.tie)?,
        fd_step: sec.parsed_or("fd_step", "a number", defaults.fd_step)?,
    };
    for (key, value) in [("tol_gap", tolerances.gap), ("tol_tie", tolerances.tie), ("fd_step", tolerances.fd_step)] {
        if !(value.is_finite() && value >= 0.0) {
            return Err(CliError::schema(key, sec.get(key).and_then(|e| e.line), "must be finite and nonnegative"));
        }
    }
    Ok(OutputConfig { format, path, seed: sec.parsed_or("seed", "an unsigned integer", 0)?, tolerances })
}

impl RunConfig {
    /// Schema checks only; see [`load_config`] for the full pipeline.
    pub fn from_document(doc: &Document) -> Result<Self, CliError> {
        let environment = environment_from(doc)?;
        let contest = contest_from(doc)?;
        let command = command_from(doc)?;
        let output = output_from(doc)?;
        let config = RunConfig { environment, contest, command, output };
        config.check_compatibility()?;
        Ok(config)
    }

    fn check_compatibility(&self) -> Result<(), CliError> {
        let n = self.environment.n;
        let command = self.command.name();
        let continuum = matches!(self.environment.population, Population::Continuum(_));
        match (&self.command, continuum) {
            (CommandConfig::Converge { .. }, false) => {
                return Err(CliError::schema("distribution", None, "converge needs a continuum `distribution`"))
            }
            (CommandConfig::Converge { n_list, x_points }, true) => {
                if n_list.is_empty() || n_list.contains(&0) || n_list.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(CliError::schema("n_list", None, "must be positive and strictly increasing"));
                }
                if *x_points < 2 {
                    return Err(CliError::schema("x_points", None, "need at least 2 points"));
                }
            }
            (_, true) => return Err(CliError::schema("thetas", None, format!("{command} needs finite `thetas`"))),
            _ => {}
        }
        match (&self.command, &self.contest) {
            (CommandConfig::Optimize { .. }, ContestConfig::Prizes(_)) => {
                return Err(CliError::schema("budget", None, "optimize needs `budget`"))
            }
            (CommandConfig::Optimize { restarts, max_evals, mode }, ContestConfig::Budget(_)) => {
                if *mode == Mode::VertexPlusSearch && (*restarts == 0 || *max_evals < *restarts) {
                    return Err(CliError::schema("max_evals", None, "need restarts >= 1 and max_evals >= restarts"));
                }
            }
            (_, ContestConfig::Budget(_)) => {
                return Err(CliError::schema("prizes", None, format!("{command} needs `prizes`")))
            }
            (_, ContestConfig::Prizes(p)) if p.len() != n + 1 => {
                return Err(CliError::schema(
                    "prizes",
                    None,
                    format!("expected N + 1 = {} prizes, got {}", n + 1, p.len()),
                ))
            }
            _ => {}
        }
        if let (CommandConfig::Compare { pair: Some((m, mp)) }, false) = (&self.command, continuum) {
            if !(*mp >= 1 && m > mp && *m <= n) {
                return Err(CliError::schema("m", None, format!("need 1 <= m_prime < m <= {n}")));
            }
        }
        if let CommandConfig::Verify { grid_size, samples } = self.command {
            if grid_size < contestlab_core::verify::MIN_GRID {
                return Err(CliError::schema(
                    "grid_size",
                    None,
                    format!("must be at least {}", contestlab_core::verify::MIN_GRID),
                ));
            }
            if samples < contestlab_core::verify::MIN_SAMPLES {
                return Err(CliError::schema(
                    "samples",
                    None,
                    format!("must be at least {}", contestlab_core::verify::MIN_SAMPLES),
                ));
            }
        }
        if let Population::Types(types) = &self.environment.population {
            let linear = types.iter().all(|t| t.kind == CostKind::Linear);
            if matches!(self.command, CommandConfig::Alpha) && !linear {
                return Err(CliError::schema("kinds", None, "alpha needs linear costs"));
            }
        }
        Ok(())
    }

    /// The canonical text form; parsing it yields an equal config.
    pub fn to_canonical(&self) -> String {
        let mut out = String::new();
        let join = |xs: &[f64]| xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        let pairs = |xs: &[(f64, f64)]| xs.iter().map(|(x, y)| format!("{x}:{y}")).collect::<Vec<_>>().join(", ");
        out.push_str("[environment]\n");
        let _ = writeln!(out, "n = {}", self.environment.n);
        match &self.environment.population {
            Population::Types(types) => {
                let kinds: Vec<&str> = types.iter().map(|t| t.kind.as_str()).collect();
                let thetas: Vec<f64> = types.iter().map(|t| t.theta).collect();
                let exps: Vec<String> =
                    types.iter().map(|t| t.exponent.map_or("-".into(), |e| e.to_string())).collect();
                let probs: Vec<f64> = types.iter().map(|t| t.prob).collect();
                let _ = writeln!(out, "kinds = {}", kinds.join(", "));
                let _ = writeln!(out, "thetas = {}", join(&thetas));
                let _ = writeln!(out, "exponents = {}", exps.join(", "));
                let _ = writeln!(out, "probs = {}", join(&probs));
                for (i, t) in types.iter().enumerate() {
                    if let Some(table) = &t.table {
                        let _ = writeln!(out, "table.{} = {}", i + 1, pairs(table));
                    }
                }
            }
            Population::Continuum(c) => {
                let _ = writeln!(out, "distribution = {}", c.distribution.as_str());
                let _ = writeln!(out, "theta_low = {}", c.theta_low);
                let _ = writeln!(out, "theta_high = {}", c.theta_high);
                if let Some(e) = c.exponent {
                    let _ = writeln!(out, "dist_exponent = {e}");
                }
                if let Some(table) = &c.table {
                    let _ = writeln!(out, "dist_table = {}", pairs(table));
                }
            }
        }
        out.push_str("\n[contest]\n");
        match &self.contest {
            ContestConfig::Prizes(p) => {
                let _ = writeln!(out, "prizes = {}", join(p));
            }
            ContestConfig::Budget(b) => {
                let _ = writeln!(out, "budget = {b}");
            }
        }
        out.push_str("\n[command]\n");
        let _ = writeln!(out, "name = {}", self.command.name());
        match &self.command {
            CommandConfig::Compare { pair: Some((m, mp)) } => {
                let _ = writeln!(out, "m = {m}\nm_prime = {mp}");
            }
            CommandConfig::Optimize { mode, restarts, max_evals } => {
                let mode = match mode {
                    Mode::Vertex => "vertex",
                    Mode::VertexPlusSearch => "vertex_plus_search",
                };
                let _ = writeln!(out, "mode = {mode}\nrestarts = {restarts}\nmax_evals = {max_evals}");
            }
            CommandConfig::Verify { grid_size, samples } => {
                let _ = writeln!(out, "grid_size = {grid_size}\nsamples = {samples}");
            }
            CommandConfig::Converge { n_list, x_points } => {
                let ns: Vec<String> = n_list.iter().map(|n| n.to_string()).collect();
                let _ = writeln!(out, "n_list = {}\nx_points = {x_points}", ns.join(", "));
            }
            _ => {}
        }
        out.push_str("\n[output]\n");
        let _ = writeln!(out, "format = {}", self.output.format.as_str());
        if let Some(path) = &self.output.path {
            let _ = writeln!(out, "path = {path}");
        }
        let t = &self.output.tolerances;
        let _ = writeln!(out, "seed = {}", self.output.seed);
        let _ = writeln!(out, "tol_gap = {}\ntol_tie = {}\nfd_step = {}", t.gap, t.tie, t.fd_step);
        out
    }
}

/// Core objects built from a config.
#[derive(Debug, Clone)]
pub enum Model {
    Finite { env: ContestEnvironment, contest: Option<Contest>, budget: Option<f64> },
    Continuum { env: ContinuumEnvironment, contest: Contest },
}

fn cost_of(i: usize, t: &TypeConfig) -> Result<CostFunction, CliError> {
    let built = match t.kind {
        CostKind::Linear => CostFunction::linear(t.theta),
        CostKind::Power => CostFunction::power(t.theta, t.exponent.unwrap_or(1.0)),
        CostKind::Tabulated => CostFunction::tabulated(t.theta, t.table.as_deref().unwrap_or(&[])),
    };
    built.map_err(|e| {
        let field = match t.kind {
            CostKind::Tabulated => format!("table.{}", i + 1),
            _ if !(t.theta > 0.0 && t.theta.is_finite()) => "thetas".into(),
            CostKind::Power => "exponents".into(),
            CostKind::Linear => "thetas".into(),
        };
        CliError::validation(&field, None, format!("type {}: {e}", i + 1))
    })
}

fn violation_field(v: &Violation) -> &'static str {
    match v {
        Violation::NonPositiveProbability { .. } | Violation::ProbabilitySum { .. } => "probs",
        Violation::Ordering { .. } => "thetas",
        Violation::ContestMismatch { .. } => "prizes",
    }
}

impl RunConfig {
    /// Builds and validates the environment and contest.
    pub fn build(&self) -> Result<Model, CliError> {
        let prizes = match &self.contest {
            ContestConfig::Prizes(p) => {
                Some(Contest::new(p.clone()).map_err(|e| CliError::validation("prizes", None, e.to_string()))?)
            }
            ContestConfig::Budget(b) => {
                if !(b.is_finite() && *b > 0.0) {
                    return Err(CliError::validation("budget", None, "budget must be positive"));
                }
                None
            }
        };
        let n = self.environment.n;
        match &self.environment.population {
            Population::Types(types) => {
                let costs = types.iter().enumerate().map(|(i, t)| cost_of(i, t)).collect::<Result<Vec<_>, _>>()?;
                let probs: Vec<f64> = types.iter().map(|t| t.prob).collect();
                let env = ContestEnvironment::new(n, costs, probs)
                    .map_err(|e| CliError::validation("probs", None, e.to_string()))?;
                let budget = match self.contest {
                    ContestConfig::Budget(b) => Some(b),
                    ContestConfig::Prizes(_) => None,
                };
                let reference = match (&prizes, budget) {
                    (Some(c), _) => Some(c.clone()),
                    (None, Some(b)) => Contest::winner_takes_all(n, b).ok(),
                    (None, None) => None,
                };
                let report = env.validate(reference.as_ref());
                if let Some(v) = report.first_violation() {
                    return Err(CliError::validation(violation_field(v), None, v.to_string()));
                }
                if matches!(self.command, CommandConfig::Compare { .. }) && !env.is_parametric() {
                    return Err(CliError::schema(
                        "kinds",
                        None,
                        "compare needs a common base cost (same kind and exponent)",
                    ));
                }
                Ok(Model::Finite { env, contest: prizes, budget })
            }
            Population::Continuum(c) => {
                let dist = match c.distribution {
                    DistributionKind::Uniform => TypeDistribution::Uniform,
                    DistributionKind::TruncatedPower => {
                        TypeDistribution::TruncatedPower { exponent: c.exponent.unwrap_or(1.0) }
                    }
                    DistributionKind::Tabulated => {
                        let (xs, ys): (Vec<f64>, Vec<f64>) = c.table.clone().unwrap_or_default().into_iter().unzip();
                        let table = MonotoneCubic::new(xs, ys)
                            .map_err(|e| CliError::validation("dist_table", None, e.to_string()))?;
                        TypeDistribution::Tabulated { table }
                    }
                };
                let env = ContinuumEnvironment::new(n, c.theta_low, c.theta_high, dist)
                    .map_err(|e| CliError::validation("distribution", None, e.to_string()))?;
                let contest = prizes.expect("compatibility check requires prizes");
                Ok(Model::Continuum { env, contest })
            }
        }
    }
}

/// Parses text or JSON (by `.json` extension or a leading `{`).
pub fn parse_config(text: &str, json: bool) -> Result<RunConfig, CliError> {
    let json = json || text.trim_start().starts_with('{');
    let doc = if json { Document::parse_json(text)? } else { Document::parse_text(text)? };
    let lookup = |field: &str| doc.line_of(field);
    let config = RunConfig::from_document(&doc).map_err(|e| e.with_line(lookup))?;
    config.build().map_err(|e| e.with_line(lookup))?;
    Ok(config)
}

/// Reads, schema-checks and validates a config file.
pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let json = path.extension().is_some_and(|ext| ext.eq_ignore_ascii_case("json"));
    parse_config(&text, json)
}

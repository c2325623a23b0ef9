//! Command dispatch.

use contestlab_core::competition::{classify_at, CompetitionQuery};
use contestlab_core::continuum::{convergence_report, default_x_grid};
use contestlab_core::design::{optimize_budget, SearchMode, SearchOptions};
use contestlab_core::effort::{alpha_coefficients, expected_cost, expected_effort, expected_effort_per_type};
use contestlab_core::equilibrium::solve;
use contestlab_core::verify::verify;
use sha2::{Digest, Sha256};

use crate::config::{CommandConfig, Mode, Model, RunConfig};
use crate::error::CliError;
use crate::report::{
    fmt_sig, AlphaRow, CompareRow, EffortResult, Meta, Report, Results, SolveResult, TypeEffort, TypeRow, VerifyResult,
};

/// Effort grid for convergence spans `[0, X_SPAN · B]`.
const X_SPAN: f64 = 1.1;

/// A finished run: the report, a one-line summary, and whether every check passed.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    pub summary: String,
    pub passed: bool,
}

/// SHA-256 of the canonical config with the output path and format cleared,
/// so the digest depends only on what determines the results.
pub fn inputs_digest(config: &RunConfig) -> String {
    let mut inputs = config.clone();
    inputs.output.path = None;
    inputs.output.format = crate::config::Format::Json;
    hex::encode(Sha256::digest(inputs.to_canonical().as_bytes()))
}

pub fn run(config: &RunConfig, jobs: usize) -> Result<Outcome, CliError> {
    let model = config.build()?;
    let jobs = jobs.max(1);
    let tol = config.output.tolerances;
    let seed = config.output.seed;
    let mut passed = true;
    let (results, summary) = match (&config.command, model) {
        (CommandConfig::Converge { n_list, x_points }, Model::Continuum { env, contest }) => {
            let grid = default_x_grid(&env, &contest, *x_points, X_SPAN)?;
            let rows = convergence_report(&env, &contest, n_list, &grid, jobs)?;
            let last = rows.last().expect("n_list is nonempty");
            let summary = format!("sup_gap(n = {}) = {}", last.n, fmt_sig(last.sup_gap));
            (Results::Converge { rows }, summary)
        }
        (CommandConfig::Optimize { mode, restarts, max_evals }, Model::Finite { env, budget: Some(budget), .. }) => {
            let options =
                SearchOptions { restarts: *restarts, max_evaluations: *max_evals, seed, jobs, tie_tolerance: tol.tie };
            let mode = match mode {
                Mode::Vertex => SearchMode::Vertex,
                Mode::VertexPlusSearch => SearchMode::VertexPlusSearch,
            };
            let opt = optimize_budget(&env, budget, mode, &options)?;
            let summary =
                format!("{} with E[X] = {}{}", opt.label, fmt_sig(opt.value), if opt.tie { " (tie)" } else { "" });
            (Results::Optimize(opt), summary)
        }
        (command, Model::Finite { env, contest: Some(contest), .. }) => match command {
            CommandConfig::Solve => {
                let eqm = solve(&env, &contest)?;
                let types = (1..=env.k())
                    .map(|k| {
                        let (lower, upper) = eqm.support(k);
                        TypeRow { k, prob: env.prob(k), lower, upper, utility: eqm.utility(k) }
                    })
                    .collect();
                let summary = format!("b_K = {}", fmt_sig(eqm.boundaries()[env.k()]));
                let result = SolveResult { b: eqm.boundaries().to_vec(), u: eqm.utilities().to_vec(), types };
                (Results::Solve(result), summary)
            }
            CommandConfig::Effort => {
                let eqm = solve(&env, &contest)?;
                let per_type = (1..=env.k())
                    .map(|k| Ok(TypeEffort { k, prob: env.prob(k), effort: expected_effort_per_type(&eqm, k)? }))
                    .collect::<Result<_, CliError>>()?;
                let total = expected_effort(&eqm);
                let closed_form = alpha_coefficients(&env).ok().map(|a| a.apply(&contest)).transpose()?;
                let cost = if env.is_parametric() { Some(expected_cost(&env, &contest)?) } else { None };
                let result = EffortResult { expected_effort: total, closed_form, expected_cost: cost, per_type };
                (Results::Effort(result), format!("E[X] = {}", fmt_sig(total)))
            }
            CommandConfig::Alpha => {
                let alpha = alpha_coefficients(&env)?;
                let rows: Vec<AlphaRow> = (1..=env.n_others()).map(|m| AlphaRow { m, alpha: alpha.get(m) }).collect();
                let summary = format!("alpha_N = {}", fmt_sig(rows.last().expect("N >= 1").alpha));
                (Results::Alpha { alpha: rows }, summary)
            }
            CommandConfig::Compare { pair } => {
                let n = env.n_others();
                let queries = match pair {
                    Some((m, mp)) => vec![CompetitionQuery::new(*m, *mp, n)?],
                    None => CompetitionQuery::all(n),
                };
                let step = tol.fd_step * contest.top_prize();
                let rows = queries
                    .into_iter()
                    .map(|q| {
                        let r = classify_at(&env, &contest, q, step)?;
                        Ok(CompareRow {
                            m: q.m,
                            m_prime: q.m_prime,
                            linear_effect: r.linear_effect,
                            classification: r.classification.to_string(),
                            top_type_condition: r.top_type_condition,
                            single_crossing: r.single_crossing,
                            utility_effects: r.utility_effects,
                            numeric_effect: r.numeric_effect,
                        })
                    })
                    .collect::<Result<Vec<_>, CliError>>()?;
                let inconclusive = rows.iter().filter(|r| r.classification == "inconclusive").count();
                let summary = format!("{} pairs, {inconclusive} inconclusive", rows.len());
                (Results::Compare { rows }, summary)
            }
            CommandConfig::Verify { grid_size, samples } => {
                let eqm = solve(&env, &contest)?;
                let rep = verify(&eqm, *grid_size, *samples, seed, jobs)?;
                let scale = contest.top_prize();
                let effort = expected_effort(&eqm);
                let max_gap = rep.max_gap();
                passed = max_gap <= tol.gap * scale;
                let mc = rep.monte_carlo;
                let result = VerifyResult {
                    max_gap,
                    max_residual: rep.max_residual(),
                    passed,
                    expected_effort: effort,
                    monte_carlo_consistent: (mc.mean - effort).abs() <= mc.half_width,
                    monte_carlo: mc,
                    rows: rep.rows,
                };
                let summary = format!(
                    "max gap = {} ({}), MC mean = {} ± {}",
                    fmt_sig(max_gap),
                    if passed { "pass" } else { "FAIL" },
                    fmt_sig(mc.mean),
                    fmt_sig(mc.half_width)
                );
                (Results::Verify(result), summary)
            }
            CommandConfig::Optimize { .. } | CommandConfig::Converge { .. } => unreachable!("handled above"),
        },
        _ => unreachable!("compatibility checked at load"),
    };
    let report = Report {
        command: config.command.name(),
        inputs_digest: inputs_digest(config),
        results,
        meta: Meta { tolerances: tol, seed, version: env!("CARGO_PKG_VERSION") },
    };
    Ok(Outcome { report, summary, passed })
}

//! Allocating a prize budget `V` across ranks to maximize expected effort.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::costs::ContestEnvironment;
use crate::effort::expected_effort;
use crate::equilibrium::solve;
use crate::error::{arg_err, Result};
use crate::kernels::Contest;

/// Relative tolerance (times `V`) under which two objective values tie.
pub const TIE_TOL: f64 = 1e-9;

/// Contests with `0 = v_0 <= ... <= v_N` and `Σ v_m <= V`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeasibleSet {
    pub n: usize,
    pub budget: f64,
}

impl FeasibleSet {
    pub fn new(n: usize, budget: f64) -> Result<Self> {
        if n == 0 {
            return arg_err("N must be positive");
        }
        if !(budget.is_finite() && budget > 0.0) {
            return arg_err(format!("budget must be positive, got {budget}"));
        }
        Ok(Self { n, budget })
    }

    pub fn contains(&self, prizes: &[f64]) -> bool {
        let tol = 1e-12 * self.budget;
        prizes.len() == self.n + 1
            && prizes[0] == 0.0
            && prizes.windows(2).all(|w| w[1] >= w[0])
            && prizes.iter().sum::<f64>() <= self.budget + tol
    }

    /// Maps budget shares of the increments `d_j = v_j - v_{j-1}` to prizes.
    /// `shares[0]` is unspent budget; `shares[j]` funds `d_j` on the
    /// `N - j + 1` prizes it raises.
    fn prizes_from_shares(&self, shares: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut prizes = vec![0.0; n + 1];
        let mut level = 0.0;
        for j in 1..=n {
            level += shares[j] * self.budget / (n - j + 1) as f64;
            prizes[j] = level;
        }
        prizes
    }
}

/// Extreme points of the feasible set: the zero vector and, for
/// `j = 1..N`, `V / (N - j + 1)` on each of the top `N - j + 1` prizes.
pub fn enumerate_vertices(n: usize, budget: f64) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; n + 1]];
    for j in 1..=n {
        let share = budget / (n - j + 1) as f64;
        out.push((0..=n).map(|m| if m >= j { share } else { 0.0 }).collect());
    }
    out
}

fn vertex_label(n: usize, j: usize) -> String {
    match j {
        0 => "zero".into(),
        j if j == n => "winner_takes_all".into(),
        1 => "equal_split".into(),
        j => format!("top_{}_equal", n - j + 1),
    }
}

/// Expected effort of a feasible prize vector; the zero vector gives zero.
pub fn evaluate(env: &ContestEnvironment, prizes: &[f64]) -> Result<f64> {
    if prizes.iter().all(|v| *v == 0.0) {
        return Ok(0.0);
    }
    let contest = Contest::new(prizes.to_vec())?;
    Ok(expected_effort(&solve(env, &contest)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    Vertex,
    VertexPlusSearch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchOptions {
    pub restarts: usize,
    pub max_evaluations: usize,
    pub seed: u64,
    /// Worker threads for the restarts.
    pub jobs: usize,
    /// Values within `tie_tolerance · V` count as equal.
    pub tie_tolerance: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { restarts: 8, max_evaluations: 10_000, seed: 0, jobs: 1, tie_tolerance: TIE_TOL }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VertexValue {
    pub label: String,
    pub prizes: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetOptimum {
    pub prizes: Vec<f64>,
    pub value: f64,
    /// Vertex name when the optimum is a vertex, otherwise `"interior"`.
    pub label: String,
    /// More than one candidate attains the best value within `tie_tolerance · V`.
    pub tie: bool,
    /// Labels of the vertices within `tie_tolerance · V` of the best value.
    pub tied_vertices: Vec<String>,
    pub vertices: Vec<VertexValue>,
    pub evaluations: usize,
}

/// Maximizes expected effort over the feasible set.
///
/// `Vertex` mode is exact when the objective is linear in the prizes
/// (linear costs). `VertexPlusSearch` additionally runs coordinate ascent
/// over budget shares from random starts and keeps the best point found.
pub fn optimize_budget(
    env: &ContestEnvironment,
    budget: f64,
    mode: SearchMode,
    options: &SearchOptions,
) -> Result<BudgetOptimum> {
    let set = FeasibleSet::new(env.n_others(), budget)?;
    if !(options.tie_tolerance >= 0.0 && options.tie_tolerance.is_finite()) {
        return arg_err("tie tolerance must be finite and nonnegative");
    }
    let n = set.n;
    let mut vertices = Vec::with_capacity(n + 1);
    for (j, prizes) in enumerate_vertices(n, budget).into_iter().enumerate() {
        let value = evaluate(env, &prizes)?;
        vertices.push(VertexValue { label: vertex_label(n, j), prizes, value });
    }
    let mut evaluations = vertices.len();
    let best_vertex =
        vertices.iter().enumerate().fold(0, |best, (i, v)| if v.value > vertices[best].value { i } else { best });
    let mut prizes = vertices[best_vertex].prizes.clone();
    let mut value = vertices[best_vertex].value;
    let mut label = vertices[best_vertex].label.clone();

    if mode == SearchMode::VertexPlusSearch {
        let (found, found_value, used) = local_search(env, &set, options)?;
        evaluations += used;
        if found_value > value + options.tie_tolerance * budget {
            label = vertices
                .iter()
                .find(|v| v.prizes.iter().zip(&found).all(|(a, b)| (a - b).abs() <= options.tie_tolerance * budget))
                .map(|v| v.label.clone())
                .unwrap_or_else(|| "interior".into());
            prizes = found;
            value = found_value;
        }
    }

    let tied_vertices: Vec<String> = vertices
        .iter()
        .filter(|v| (v.value - value).abs() <= options.tie_tolerance * budget)
        .map(|v| v.label.clone())
        .collect();
    Ok(BudgetOptimum { prizes, value, label, tie: tied_vertices.len() > 1, tied_vertices, vertices, evaluations })
}

/// Best prizes, their value, and evaluations spent.
type SearchRun = (Vec<f64>, f64, usize);

fn local_search(env: &ContestEnvironment, set: &FeasibleSet, options: &SearchOptions) -> Result<SearchRun> {
    let restarts = options.restarts.max(1);
    let cap = (options.max_evaluations / restarts).max(1);
    let jobs = options.jobs.clamp(1, restarts);
    let run = |r: usize| -> Result<(Vec<f64>, f64, usize)> {
        let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
        rng.set_stream(r as u64);
        coordinate_ascent(env, set, &mut rng, cap)
    };
    let results: Vec<Result<SearchRun>> = if jobs == 1 {
        (0..restarts).map(run).collect()
    } else {
        let mut slots: Vec<Option<Result<SearchRun>>> = (0..restarts).map(|_| None).collect();
        std::thread::scope(|scope| {
            let chunk = restarts.div_ceil(jobs);
            for (c, part) in slots.chunks_mut(chunk).enumerate() {
                let run = &run;
                scope.spawn(move || {
                    for (i, slot) in part.iter_mut().enumerate() {
                        *slot = Some(run(c * chunk + i));
                    }
                });
            }
        });
        slots.into_iter().map(|s| s.expect("worker filled slot")).collect()
    };
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut used = 0;
    for res in results {
        let (prizes, value, evals) = res?;
        used += evals;
        if best.as_ref().is_none_or(|(_, b)| value > *b) {
            best = Some((prizes, value));
        }
    }
    let (prizes, value) = best.expect("at least one restart");
    Ok((prizes, value, used))
}

// Pairwise mass transfers between budget shares with a halving step.
fn coordinate_ascent(
    env: &ContestEnvironment,
    set: &FeasibleSet,
    rng: &mut ChaCha8Rng,
    cap: usize,
) -> Result<(Vec<f64>, f64, usize)> {
    let n = set.n;
    let mut shares = vec![0.0; n + 1];
    let draws: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let total: f64 = draws.iter().sum();
    for j in 1..=n {
        shares[j] = draws[j - 1] / total;
    }
    let mut best = evaluate(env, &set.prizes_from_shares(&shares))?;
    let mut evals = 1;
    let mut step: f64 = 0.25;
    while evals < cap && step > 1e-10 {
        let mut improved = false;
        'sweep: for to in 0..=n {
            for from in 0..=n {
                if to == from || shares[from] <= 0.0 {
                    continue;
                }
                if evals >= cap {
                    break 'sweep;
                }
                let delta = step.min(shares[from]);
                let mut trial = shares.clone();
                trial[from] -= delta;
                trial[to] += delta;
                let value = evaluate(env, &set.prizes_from_shares(&trial))?;
                evals += 1;
                if value > best {
                    best = value;
                    shares = trial;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok((set.prizes_from_shares(&shares), best, evals))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vertices_small() {
        let v = enumerate_vertices(2, 1.0);
        assert_eq!(v, vec![vec![0.0, 0.0, 0.0], vec![0.0, 0.5, 0.5], vec![0.0, 0.0, 1.0]]);
        let v = enumerate_vertices(3, 1.0);
        assert!(v.contains(&vec![0.0, 0.0, 0.0, 1.0]));
        assert!(v.contains(&vec![0.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]));
        let set = FeasibleSet::new(5, 2.0).unwrap();
        for p in enumerate_vertices(5, 2.0) {
            let s: f64 = p.iter().sum();
            assert!(s == 0.0 || (s - 2.0).abs() < 1e-12);
            assert!(set.contains(&p));
        }
    }

    #[test]
    fn shares_map_into_feasible_set() {
        let set = FeasibleSet::new(3, 1.0).unwrap();
        let p = set.prizes_from_shares(&[0.1, 0.3, 0.2, 0.4]);
        assert!(set.contains(&p));
        assert!((p.iter().sum::<f64>() - 0.9).abs() < 1e-12);
    }

    #[test]
    fn linear_binary_picks_winner_takes_all() {
        let env = ContestEnvironment::linear(3, &[2.0, 1.0], &[0.4, 0.6]).unwrap();
        let opt = optimize_budget(&env, 1.0, SearchMode::Vertex, &SearchOptions::default()).unwrap();
        assert_eq!(opt.label, "winner_takes_all");
        assert_eq!(opt.prizes, vec![0.0, 0.0, 0.0, 1.0]);
        assert!(!opt.tie);
    }

    #[test]
    fn complete_information_cases() {
        let sq = ContestEnvironment::power(3, &[1.0], 2.0, &[1.0]).unwrap();
        let opt = optimize_budget(&sq, 1.0, SearchMode::Vertex, &SearchOptions::default()).unwrap();
        assert_eq!(opt.label, "equal_split");

        let lin = ContestEnvironment::linear(3, &[1.0], &[1.0]).unwrap();
        let opt = optimize_budget(&lin, 1.0, SearchMode::Vertex, &SearchOptions::default()).unwrap();
        assert!(opt.tie);
        assert_eq!(opt.tied_vertices.len(), 3);
    }

    #[test]
    fn search_is_deterministic() {
        let env = ContestEnvironment::power(2, &[2.0, 1.0], 2.0, &[0.5, 0.5]).unwrap();
        let opts = SearchOptions { restarts: 4, max_evaluations: 400, seed: 7, jobs: 1, ..SearchOptions::default() };
        let a = optimize_budget(&env, 1.0, SearchMode::VertexPlusSearch, &opts).unwrap();
        let b = optimize_budget(&env, 1.0, SearchMode::VertexPlusSearch, &SearchOptions { jobs: 3, ..opts }).unwrap();
        assert_eq!(a, b);
        assert!(a.evaluations <= 400 + 3);
    }

    #[test]
    fn rejects_bad_budget() {
        let env = ContestEnvironment::linear(2, &[1.0], &[1.0]).unwrap();
        assert!(optimize_budget(&env, 0.0, SearchMode::Vertex, &SearchOptions::default()).is_err());
    }
}

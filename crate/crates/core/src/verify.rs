//! Independent checks of a solved equilibrium.
//!
//! A type-`k` agent deviating to effort `x` against the equilibrium earns
//! `π_v(F(x)) - c_k(x)`. No deviation may beat `u_k`, and every effort on
//! the type's own support must earn exactly `u_k`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::equilibrium::Equilibrium;
use crate::error::{arg_err, Result};

/// Samples per Monte Carlo block; each block has its own RNG stream.
const MC_BLOCK: usize = 1 << 16;
pub const MIN_GRID: usize = 100;
pub const MIN_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapRow {
    pub k: usize,
    /// `max_x π_v(F(x)) - c_k(x) - u_k` over `[0, 1.5 b_K]`.
    pub gap: f64,
    pub argmax: f64,
    /// `max |π_v(F(x)) - c_k(x) - u_k|` over `[b_{k-1}, b_k]`.
    pub residual: f64,
}

/// Deviation payoff of type `k` at `x`, net of its equilibrium utility.
pub fn deviation_payoff(eqm: &Equilibrium, k: usize, x: f64) -> f64 {
    eqm.contest().expected_prize(eqm.exante_cdf(x)) - eqm.env().cost(k).eval(x) - eqm.utility(k)
}

pub fn best_response_gap(eqm: &Equilibrium, k: usize, grid_size: usize) -> Result<GapRow> {
    if k == 0 || k > eqm.k() {
        return arg_err(format!("type index {k} outside 1..={}", eqm.k()));
    }
    if grid_size < MIN_GRID {
        return arg_err(format!("grid size must be at least {MIN_GRID}"));
    }
    let top = 1.5 * eqm.boundaries()[eqm.k()];
    let (lo, hi) = eqm.support(k);
    let mut gap = f64::NEG_INFINITY;
    let mut argmax = 0.0;
    let probe = (0..grid_size).map(|i| top * i as f64 / (grid_size - 1) as f64).chain([lo, hi]);
    for x in probe {
        let payoff = deviation_payoff(eqm, k, x);
        if payoff > gap {
            gap = payoff;
            argmax = x;
        }
    }
    let residual = (0..grid_size)
        .map(|i| lo + (hi - lo) * i as f64 / (grid_size - 1) as f64)
        .map(|x| deviation_payoff(eqm, k, x).abs())
        .fold(0.0, f64::max);
    Ok(GapRow { k, gap, argmax, residual })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    /// Three standard errors.
    pub half_width: f64,
    pub n_samples: usize,
    pub seed: u64,
}

#[derive(Clone, Copy, Default)]
struct Moments {
    count: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1.0;
        let d = x - self.mean;
        self.mean += d / self.count;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.count == 0.0 {
            return other;
        }
        let count = self.count + other.count;
        let d = other.mean - self.mean;
        Moments {
            count,
            mean: self.mean + d * other.count / count,
            m2: self.m2 + other.m2 + d * d * self.count * other.count / count,
        }
    }
}

fn run_block(eqm: &Equilibrium, seed: u64, block: usize, len: usize) -> Moments {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block as u64);
    let env = eqm.env();
    let mut m = Moments::default();
    for _ in 0..len {
        let k = env.type_index(rng.gen::<f64>());
        let u: f64 = rng.gen();
        m.push(eqm.sample_unchecked(k, u));
    }
    m
}

/// Draws a type by `p`, then an effort by inverse transform, `n_samples`
/// times. Output depends only on `seed`, not on `jobs`.
pub fn monte_carlo_effort(eqm: &Equilibrium, n_samples: usize, seed: u64, jobs: usize) -> Result<MonteCarloEstimate> {
    if n_samples < MIN_SAMPLES {
        return arg_err(format!("need at least {MIN_SAMPLES} samples"));
    }
    let blocks: Vec<(usize, usize)> =
        (0..n_samples.div_ceil(MC_BLOCK)).map(|b| (b, MC_BLOCK.min(n_samples - b * MC_BLOCK))).collect();
    let jobs = jobs.clamp(1, blocks.len());
    let mut parts = vec![Moments::default(); blocks.len()];
    if jobs == 1 {
        for (slot, &(b, len)) in parts.iter_mut().zip(&blocks) {
            *slot = run_block(eqm, seed, b, len);
        }
    } else {
        let chunk = blocks.len().div_ceil(jobs);
        std::thread::scope(|scope| {
            for (slots, work) in parts.chunks_mut(chunk).zip(blocks.chunks(chunk)) {
                scope.spawn(move || {
                    for (slot, &(b, len)) in slots.iter_mut().zip(work) {
                        *slot = run_block(eqm, seed, b, len);
                    }
                });
            }
        });
    }
    let total = parts.into_iter().fold(Moments::default(), Moments::merge);
    let variance = total.m2 / (total.count - 1.0);
    let std_error = (variance / total.count).sqrt();
    Ok(MonteCarloEstimate { mean: total.mean, std_error, half_width: 3.0 * std_error, n_samples, seed })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub rows: Vec<GapRow>,
    pub monte_carlo: MonteCarloEstimate,
    pub seed: u64,
}

impl VerificationReport {
    pub fn max_gap(&self) -> f64 {
        self.rows.iter().map(|r| r.gap).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_residual(&self) -> f64 {
        self.rows.iter().map(|r| r.residual).fold(0.0, f64::max)
    }
}

/// Best-response gaps for every type plus a Monte Carlo effort estimate.
pub fn verify(
    eqm: &Equilibrium,
    grid_size: usize,
    n_samples: usize,
    seed: u64,
    jobs: usize,
) -> Result<VerificationReport> {
    let rows = (1..=eqm.k()).map(|k| best_response_gap(eqm, k, grid_size)).collect::<Result<Vec<_>>>()?;
    let monte_carlo = monte_carlo_effort(eqm, n_samples, seed, jobs)?;
    Ok(VerificationReport { rows, monte_carlo, seed })
}

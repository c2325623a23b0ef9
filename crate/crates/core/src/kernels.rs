//! Binomial order-statistic kernels and the expected-prize function.
//!
//! `H^N_m(t)` is the probability of beating exactly `m` of `N` opponents
//! when each is beaten independently with probability `t`. The expected
//! prize of such an agent is `π_v(t) = Σ_m v_m H^N_m(t)`.

use std::sync::OnceLock;

use serde::Serialize;

use crate::costs::ContestEnvironment;
use crate::error::{arg_err, ContestError, Result};
use crate::roots::{bisect_increasing, TOL_ROOT};

const LN_FACT_TABLE: usize = 1025;

fn ln_factorial(n: usize) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = vec![0.0; LN_FACT_TABLE];
        for i in 1..LN_FACT_TABLE {
            t[i] = t[i - 1] + (i as f64).ln();
        }
        t
    });
    if n < LN_FACT_TABLE {
        table[n]
    } else {
        table[LN_FACT_TABLE - 1] + (LN_FACT_TABLE..=n).map(|i| (i as f64).ln()).sum::<f64>()
    }
}

/// `ln C(n, m)`.
pub fn ln_choose(n: usize, m: usize) -> f64 {
    ln_factorial(n) - ln_factorial(m) - ln_factorial(n - m)
}

// Unchecked pmf; callers guarantee m <= n and t in [0, 1].
#[inline]
pub(crate) fn pmf(n: usize, m: usize, t: f64) -> f64 {
    let coef = if m == 0 || m == n { 1.0 } else { ln_choose(n, m).exp() };
    coef * t.powi(m as i32) * (1.0 - t).powi((n - m) as i32)
}

#[inline]
pub(crate) fn tail_at_least(n: usize, m: usize, t: f64) -> f64 {
    if m == 0 {
        return 1.0;
    }
    if m > n {
        return 0.0;
    }
    (m..=n).map(|i| pmf(n, i, t)).sum()
}

fn check_args(n: usize, m: usize, t: f64) -> Result<()> {
    if n == 0 {
        return arg_err("number of opponents must be positive");
    }
    if m > n {
        return arg_err(format!("rank {m} exceeds N = {n}"));
    }
    check_probability(t)
}

fn check_probability(t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return arg_err(format!("probability {t} outside [0, 1]"));
    }
    Ok(())
}

/// `H^N_m(t) = C(N, m) t^m (1-t)^(N-m)`.
pub fn binom_pmf(n: usize, m: usize, t: f64) -> Result<f64> {
    check_args(n, m, t)?;
    Ok(pmf(n, m, t))
}

/// Which tail of the binomial distribution to sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tail {
    AtMost,
    AtLeast,
}

/// `H^N_{≤m}(t)` or `H^N_{≥m}(t)`.
pub fn binom_tail(n: usize, m: usize, t: f64, side: Tail) -> Result<f64> {
    check_args(n, m, t)?;
    Ok(match side {
        Tail::AtLeast => tail_at_least(n, m, t),
        Tail::AtMost if m == n => 1.0,
        Tail::AtMost => (0..=m).map(|i| pmf(n, i, t)).sum(),
    })
}

/// A rank-order prize vector `v_0 <= v_1 <= ... <= v_N`, stored with `v_0 = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Contest {
    prizes: Vec<f64>,
}

impl Contest {
    /// Builds a contest, subtracting `v_0` from every prize.
    pub fn new(prizes: Vec<f64>) -> Result<Self> {
        if prizes.len() < 2 {
            return arg_err("a contest needs at least two prizes (N >= 1)");
        }
        if prizes.iter().any(|v| !v.is_finite()) {
            return arg_err("prizes must be finite");
        }
        if let Some(m) = prizes.windows(2).position(|w| w[1] < w[0]) {
            return arg_err(format!("prizes must be nondecreasing (v_{} > v_{})", m, m + 1));
        }
        let base = prizes[0];
        let prizes: Vec<f64> = prizes.into_iter().map(|v| v - base).collect();
        if *prizes.last().unwrap() <= 0.0 {
            return arg_err("top prize must exceed the bottom prize");
        }
        Ok(Self { prizes })
    }

    /// `(0, ..., 0, V)`.
    pub fn winner_takes_all(n: usize, budget: f64) -> Result<Self> {
        let mut prizes = vec![0.0; n + 1];
        prizes[n] = budget;
        Self::new(prizes)
    }

    /// `(0, V/N, ..., V/N)`.
    pub fn equal_split(n: usize, budget: f64) -> Result<Self> {
        if n == 0 {
            return arg_err("N must be positive");
        }
        let mut prizes = vec![budget / n as f64; n + 1];
        prizes[0] = 0.0;
        Self::new(prizes)
    }

    pub fn prizes(&self) -> &[f64] {
        &self.prizes
    }

    /// Number of opponents `N` (the contest has `N + 1` prizes).
    pub fn n(&self) -> usize {
        self.prizes.len() - 1
    }

    pub fn top_prize(&self) -> f64 {
        self.prizes[self.n()]
    }

    /// `Σ_m v_m`.
    pub fn total_budget(&self) -> f64 {
        self.prizes.iter().sum()
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.prizes.iter().map(|v| v * factor).collect())
    }

    /// `π_v(t)`; `t` is assumed to lie in `[0, 1]`.
    pub fn expected_prize(&self, t: f64) -> f64 {
        let n = self.n();
        self.prizes.iter().enumerate().skip(1).filter(|(_, v)| **v != 0.0).map(|(m, v)| v * pmf(n, m, t)).sum()
    }

    /// `π_v'(t) = N Σ_{m<N} (v_{m+1} - v_m) H^{N-1}_m(t)`.
    pub fn expected_prize_derivative(&self, t: f64) -> f64 {
        let n = self.n();
        let sum: f64 = self
            .prizes
            .windows(2)
            .enumerate()
            .filter(|(_, w)| w[1] > w[0])
            .map(|(m, w)| (w[1] - w[0]) * pmf(n - 1, m, t))
            .sum();
        n as f64 * sum
    }

    /// `π_v^{-1}(y)`, with `y` clamped to `[0, v_N]`.
    pub fn expected_prize_inverse(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        if y >= self.top_prize() {
            return 1.0;
        }
        bisect_increasing(|t| self.expected_prize(t), y, 0.0, 1.0, TOL_ROOT)
    }

    /// `∫_a^b π_v(t) dt`, exactly, through `d/dt H^{N+1}_{≥m+1} = (N+1) H^N_m`.
    pub fn prize_integral(&self, a: f64, b: f64) -> f64 {
        let n = self.n();
        let sum: f64 = self
            .prizes
            .iter()
            .enumerate()
            .skip(1)
            .map(|(m, v)| v * (tail_at_least(n + 1, m + 1, b) - tail_at_least(n + 1, m + 1, a)))
            .sum();
        sum / (n + 1) as f64
    }
}

/// `π_v(t)` with argument validation.
pub fn prize_expectation(contest: &Contest, t: f64) -> Result<f64> {
    check_probability(t)?;
    Ok(contest.expected_prize(t))
}

/// `π_v'(t)` with argument validation.
pub fn prize_expectation_derivative(contest: &Contest, t: f64) -> Result<f64> {
    check_probability(t)?;
    Ok(contest.expected_prize_derivative(t))
}

/// Solves `π_v(t) = y` on `[0, 1]` by bisection.
pub fn prize_expectation_inverse(contest: &Contest, y: f64) -> Result<f64> {
    let top = contest.top_prize();
    if !(0.0..=top).contains(&y) {
        return Err(ContestError::Domain { value: y, lower: 0.0, upper: top });
    }
    Ok(contest.expected_prize_inverse(y))
}

/// `∫_{P_{k-1}}^{P_k} π_v(t) dt` for type `k` (1-based).
pub fn type_prize_integral(env: &ContestEnvironment, contest: &Contest, k: usize) -> Result<f64> {
    if k == 0 || k > env.k() {
        return arg_err(format!("type index {k} outside 1..={}", env.k()));
    }
    if contest.n() != env.n_others() {
        return arg_err("contest and environment disagree on N");
    }
    let p = env.cumulative();
    Ok(contest.prize_integral(p[k - 1], p[k]))
}

/// Lorenz comparison: `v` is more competitive than `w` when every prefix sum
/// of `v` is at most that of `w`, with equal totals.
pub fn is_more_competitive(v: &Contest, w: &Contest) -> Result<bool> {
    if v.n() != w.n() {
        return arg_err(format!("contests have different N ({} vs {})", v.n(), w.n()));
    }
    let scale = v.total_budget().abs().max(w.total_budget().abs()).max(f64::MIN_POSITIVE);
    let eps = 1e-12 * scale;
    let mut sv = 0.0;
    let mut sw = 0.0;
    for (a, b) in v.prizes().iter().zip(w.prizes()) {
        sv += a;
        sw += b;
        if sv > sw + eps {
            return Ok(false);
        }
    }
    Ok((sv - sw).abs() <= eps)
}

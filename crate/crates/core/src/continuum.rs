//! Continuum-type limit under linear costs.
//!
//! With marginal costs `θ ~ G` on `[θ_lo, θ_hi]`, the symmetric equilibrium
//! is the pure strategy `X(θ) = ∫_θ^{θ_hi} π_v'(1 - G(t)) g(t) / t dt`.
//! Finite environments built from quantiles of `G` approach it.

use serde::Serialize;

use crate::costs::{ContestEnvironment, MonotoneCubic};
use crate::equilibrium::solve;
use crate::error::{arg_err, ContestError, Result};
use crate::kernels::Contest;
use crate::quadrature::integrate;
use crate::roots::bisect_decreasing;

const STRATEGY_TOL: f64 = 1e-12;

/// Shape of the marginal-cost distribution on `[θ_lo, θ_hi]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TypeDistribution {
    Uniform,
    /// `G(θ) = ((θ - θ_lo) / (θ_hi - θ_lo))^a`.
    TruncatedPower {
        exponent: f64,
    },
    /// Monotone interpolation through `(θ_i, G_i)` spanning the support.
    Tabulated {
        table: MonotoneCubic,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuumEnvironment {
    n_others: usize,
    lower: f64,
    upper: f64,
    distribution: TypeDistribution,
}

impl ContinuumEnvironment {
    pub fn new(n_others: usize, lower: f64, upper: f64, distribution: TypeDistribution) -> Result<Self> {
        if n_others == 0 {
            return arg_err("need at least one opponent (N >= 1)");
        }
        if !(lower > 0.0 && upper > lower && upper.is_finite()) {
            return arg_err(format!("support must satisfy 0 < θ_lo < θ_hi, got [{lower}, {upper}]"));
        }
        match &distribution {
            TypeDistribution::Uniform => {}
            TypeDistribution::TruncatedPower { exponent } => {
                if !(exponent.is_finite() && *exponent > 0.0) {
                    return arg_err("distribution exponent must be positive");
                }
            }
            TypeDistribution::Tabulated { table } => {
                let (xs, ys) = (table.xs(), table.ys());
                let ends_ok = xs[0] == lower && xs[xs.len() - 1] == upper;
                if !ends_ok || ys[0] != 0.0 || ys[ys.len() - 1] != 1.0 {
                    return arg_err("tabulated CDF must run from (θ_lo, 0) to (θ_hi, 1)");
                }
            }
        }
        Ok(Self { n_others, lower, upper, distribution })
    }

    pub fn uniform(n_others: usize, lower: f64, upper: f64) -> Result<Self> {
        Self::new(n_others, lower, upper, TypeDistribution::Uniform)
    }

    pub fn n_others(&self) -> usize {
        self.n_others
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lower, self.upper)
    }

    pub fn distribution(&self) -> &TypeDistribution {
        &self.distribution
    }

    fn unit(&self, theta: f64) -> f64 {
        ((theta - self.lower) / (self.upper - self.lower)).clamp(0.0, 1.0)
    }

    /// `G(θ)`, clamped outside the support.
    pub fn cdf(&self, theta: f64) -> f64 {
        match &self.distribution {
            TypeDistribution::Uniform => self.unit(theta),
            TypeDistribution::TruncatedPower { exponent } => self.unit(theta).powf(*exponent),
            TypeDistribution::Tabulated { table } => table.eval(theta.clamp(self.lower, self.upper)).clamp(0.0, 1.0),
        }
    }

    /// `g(θ)` on the support.
    pub fn density(&self, theta: f64) -> f64 {
        let width = self.upper - self.lower;
        match &self.distribution {
            TypeDistribution::Uniform => 1.0 / width,
            TypeDistribution::TruncatedPower { exponent } => exponent * self.unit(theta).powf(exponent - 1.0) / width,
            TypeDistribution::Tabulated { table } => table.derivative(theta).max(0.0),
        }
    }

    /// `G^{-1}(q)` for `q` in `[0, 1]`.
    pub fn quantile(&self, q: f64) -> f64 {
        let q = q.clamp(0.0, 1.0);
        let width = self.upper - self.lower;
        match &self.distribution {
            TypeDistribution::Uniform => self.lower + width * q,
            TypeDistribution::TruncatedPower { exponent } => self.lower + width * q.powf(1.0 / exponent),
            TypeDistribution::Tabulated { table } => table.inverse(q).clamp(self.lower, self.upper),
        }
    }

    fn breakpoints(&self, from: f64) -> Vec<f64> {
        let mut pts = vec![from];
        if let TypeDistribution::Tabulated { table } = &self.distribution {
            pts.extend(table.xs().iter().copied().filter(|&x| x > from && x < self.upper));
        }
        pts.push(self.upper);
        pts
    }
}

fn check_contest(cenv: &ContinuumEnvironment, contest: &Contest) -> Result<()> {
    if contest.n() != cenv.n_others {
        return arg_err(format!("contest has N = {} but the environment has N = {}", contest.n(), cenv.n_others));
    }
    Ok(())
}

fn strategy(cenv: &ContinuumEnvironment, contest: &Contest, theta: f64) -> f64 {
    let integrand = |t: f64| contest.expected_prize_derivative(1.0 - cenv.cdf(t)) * cenv.density(t) / t;
    cenv.breakpoints(theta).windows(2).map(|w| integrate(integrand, w[0], w[1], STRATEGY_TOL)).sum()
}

/// `X(θ)`, the continuum equilibrium effort of marginal cost `θ`.
pub fn continuum_strategy(cenv: &ContinuumEnvironment, contest: &Contest, theta: f64) -> Result<f64> {
    check_contest(cenv, contest)?;
    if !(cenv.lower..=cenv.upper).contains(&theta) {
        return arg_err(format!("θ = {theta} outside [{}, {}]", cenv.lower, cenv.upper));
    }
    Ok(strategy(cenv, contest, theta))
}

/// `F(x) = 1 - G(θ(x))` on `[0, B]` with `B = X(θ_lo)`.
pub fn continuum_effort_cdf(cenv: &ContinuumEnvironment, contest: &Contest, x: f64) -> Result<f64> {
    check_contest(cenv, contest)?;
    let top = strategy(cenv, contest, cenv.lower);
    Ok(cdf_with_top(cenv, contest, x, top))
}

fn cdf_with_top(cenv: &ContinuumEnvironment, contest: &Contest, x: f64, top: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= top {
        return 1.0;
    }
    let tol = 1e-13 * cenv.upper;
    let theta = bisect_decreasing(|t| strategy(cenv, contest, t), x, cenv.lower, cenv.upper, tol);
    1.0 - cenv.cdf(theta)
}

/// `n` equally likely linear types at the quantile midpoints `(2k-1)/(2n)`,
/// ordered least efficient (largest `θ`) first.
pub fn discretize(cenv: &ContinuumEnvironment, n: usize) -> Result<ContestEnvironment> {
    if n == 0 {
        return arg_err("need at least one atom");
    }
    let thetas: Vec<f64> = (1..=n).map(|k| cenv.quantile((2 * (n - k) + 1) as f64 / (2 * n) as f64)).collect();
    ContestEnvironment::linear(cenv.n_others, &thetas, &vec![1.0 / n as f64; n])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub sup_gap: f64,
}

/// `n` solves each with attached context.
fn with_n<T>(n: usize, r: Result<T>) -> Result<T> {
    r.map_err(|e| ContestError::Numeric { k: None, message: format!("n = {n}: {e}") })
}

/// `[0, span · B]` in `points` equal steps.
pub fn default_x_grid(cenv: &ContinuumEnvironment, contest: &Contest, points: usize, span: f64) -> Result<Vec<f64>> {
    check_contest(cenv, contest)?;
    let top = strategy(cenv, contest, cenv.lower) * span;
    let points = points.max(2);
    Ok((0..points).map(|i| top * i as f64 / (points - 1) as f64).collect())
}

/// `sup_x |F^n(x) - F(x)|` over `x_grid` for each `n` in `n_list`.
pub fn convergence_report(
    cenv: &ContinuumEnvironment,
    contest: &Contest,
    n_list: &[usize],
    x_grid: &[f64],
    jobs: usize,
) -> Result<Vec<ConvergenceRow>> {
    check_contest(cenv, contest)?;
    if n_list.is_empty() {
        return arg_err("n_list must not be empty");
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return arg_err("n_list must be strictly increasing");
    }
    let top = strategy(cenv, contest, cenv.lower);
    let target: Vec<f64> = x_grid.iter().map(|&x| cdf_with_top(cenv, contest, x, top)).collect();
    let row = |n: usize| -> Result<ConvergenceRow> {
        let env = with_n(n, discretize(cenv, n))?;
        let eqm = with_n(n, solve(&env, contest))?;
        let sup_gap = x_grid.iter().zip(&target).map(|(&x, f)| (eqm.exante_cdf(x) - f).abs()).fold(0.0, f64::max);
        Ok(ConvergenceRow { n, sup_gap })
    };
    let jobs = jobs.clamp(1, n_list.len());
    if jobs == 1 {
        return n_list.iter().map(|&n| row(n)).collect();
    }
    let mut slots: Vec<Option<Result<ConvergenceRow>>> = vec![None; n_list.len()];
    let chunk = n_list.len().div_ceil(jobs);
    std::thread::scope(|scope| {
        for (part, ns) in slots.chunks_mut(chunk).zip(n_list.chunks(chunk)) {
            let row = &row;
            scope.spawn(move || {
                for (slot, &n) in part.iter_mut().zip(ns) {
                    *slot = Some(row(n));
                }
            });
        }
    });
    slots.into_iter().map(|s| s.expect("worker filled slot")).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryLimit {
    pub n: usize,
    /// `k(n)` with `θ^n_{k(n)} > θ >= θ^n_{k(n)+1}`.
    pub k: usize,
    pub boundary: f64,
    pub target: f64,
}

impl BoundaryLimit {
    pub fn gap(&self) -> f64 {
        (self.boundary - self.target).abs()
    }
}

/// The finite boundary `b^n_{k(n)}` bracketing `θ`, against `X(θ)`.
pub fn boundary_limit(cenv: &ContinuumEnvironment, contest: &Contest, theta: f64, n: usize) -> Result<BoundaryLimit> {
    let target = continuum_strategy(cenv, contest, theta)?;
    let env = discretize(cenv, n)?;
    let eqm = with_n(n, solve(&env, contest))?;
    let k = env.thetas().iter().filter(|&&t| t > theta).count();
    Ok(BoundaryLimit { n, k, boundary: eqm.boundaries()[k], target })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (ContinuumEnvironment, Contest) {
        (ContinuumEnvironment::uniform(1, 1.0, 2.0).unwrap(), Contest::new(vec![0.0, 1.0]).unwrap())
    }

    #[test]
    fn strategy_examples() {
        let (c, v) = setup();
        assert_eq!(continuum_strategy(&c, &v, 2.0).unwrap(), 0.0);
        assert!((continuum_strategy(&c, &v, 1.0).unwrap() - 2f64.ln()).abs() < 1e-12);
        assert!((continuum_strategy(&c, &v, 1.5).unwrap() - (4.0f64 / 3.0).ln()).abs() < 1e-12);
        assert!(continuum_strategy(&c, &v, 0.5).is_err());
        assert!(continuum_strategy(&c, &Contest::new(vec![0.0, 0.0, 1.0]).unwrap(), 1.5).is_err());
    }

    #[test]
    fn strategy_is_decreasing() {
        let c = ContinuumEnvironment::new(3, 1.0, 3.0, TypeDistribution::TruncatedPower { exponent: 0.7 }).unwrap();
        let v = Contest::new(vec![0.0, 0.1, 0.3, 1.0]).unwrap();
        let mut prev = f64::INFINITY;
        for i in 0..=40 {
            let x = continuum_strategy(&c, &v, 1.0 + 0.05 * i as f64).unwrap();
            assert!(x < prev || (i == 40 && x == 0.0));
            prev = x;
        }
    }

    #[test]
    fn cdf_examples() {
        let (c, v) = setup();
        assert_eq!(continuum_effort_cdf(&c, &v, 0.0).unwrap(), 0.0);
        assert_eq!(continuum_effort_cdf(&c, &v, 2f64.ln()).unwrap(), 1.0);
        let want = 2.0 - 2.0 * (-0.2f64).exp();
        assert!((continuum_effort_cdf(&c, &v, 0.2).unwrap() - want).abs() < 1e-10);
    }

    #[test]
    fn discretize_examples() {
        let (c, _) = setup();
        let env = discretize(&c, 2).unwrap();
        assert_eq!(env.thetas(), vec![1.75, 1.25]);
        assert_eq!(env.probs(), &[0.5, 0.5]);
        let one = discretize(&c, 1).unwrap();
        assert_eq!(one.thetas(), vec![1.5]);
        let many = discretize(&c, 37).unwrap();
        assert!((many.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(many.is_parametric());
    }

    #[test]
    fn tabulated_distribution_matches_uniform() {
        let xs: Vec<f64> = (0..=10).map(|i| 1.0 + 0.1 * i as f64).collect();
        let ys: Vec<f64> = (0..=10).map(|i| 0.1 * i as f64).collect();
        let table = MonotoneCubic::new(xs, ys).unwrap();
        let tab = ContinuumEnvironment::new(1, 1.0, 2.0, TypeDistribution::Tabulated { table }).unwrap();
        let (uni, v) = setup();
        for th in [1.0, 1.33, 1.5, 1.9] {
            let a = continuum_strategy(&tab, &v, th).unwrap();
            let b = continuum_strategy(&uni, &v, th).unwrap();
            assert!((a - b).abs() < 1e-10);
        }
        assert!(ContinuumEnvironment::new(
            1,
            1.0,
            3.0,
            TypeDistribution::Tabulated { table: MonotoneCubic::new(vec![1.0, 2.0], vec![0.0, 1.0]).unwrap() }
        )
        .is_err());
    }

    #[test]
    fn convergence_rejects_bad_lists() {
        let (c, v) = setup();
        assert!(convergence_report(&c, &v, &[], &[0.1], 1).is_err());
        assert!(convergence_report(&c, &v, &[4, 4], &[0.1], 1).is_err());
    }

    #[test]
    fn cdf_saturates_outside_support() {
        let (c, v) = setup();
        let b = 2f64.ln();
        let grid: Vec<f64> = (0..20).map(|i| b * (1.1 + 0.1 * i as f64)).collect();
        let rows = convergence_report(&c, &v, &[4, 16], &grid, 2).unwrap();
        assert!(rows.iter().all(|r| r.sup_gap == 0.0));
        let neg = convergence_report(&c, &v, &[4], &[-1.0, -0.1, 0.0], 1).unwrap();
        assert_eq!(neg[0].sup_gap, 0.0);
    }
}

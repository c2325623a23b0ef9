//! Effort cost functions and the contest environment.
//!
//! Every cost is written `c(x) = θ · base(x)` where `base` is linear, a
//! power `x^a`, or a tabulated monotone curve.

use std::fmt;

use serde::Serialize;

use crate::error::{arg_err, ContestError, Result};
use crate::kernels::Contest;
use crate::roots::bisect_increasing;

/// Tolerance on `Σ p_k = 1`.
pub const PROB_SUM_TOL: f64 = 1e-12;
/// Number of points in the geometric grid used for derivative ordering.
pub const ORDERING_GRID_POINTS: usize = 256;
/// Upper end of the ordering grid when no contest is supplied.
pub const DEFAULT_ORDERING_XMAX: f64 = 10.0;

/// Monotone piecewise-cubic Hermite interpolant (Fritsch–Carlson slopes).
///
/// Beyond the last knot the curve continues linearly with the last secant
/// slope; below the first knot it continues with the first secant slope.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    /// `xs` strictly increasing, `ys` nondecreasing, at least two points.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return arg_err("a table needs at least two (x, y) points of equal length");
        }
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return arg_err("table entries must be finite");
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return arg_err("table abscissae must be strictly increasing");
        }
        if ys.windows(2).any(|w| w[1] < w[0]) {
            return arg_err("table values must be nondecreasing");
        }
        let n = xs.len();
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
        let mut slopes = vec![0.0; n];
        slopes[0] = delta[0];
        slopes[n - 1] = delta[n - 2];
        for i in 1..n - 1 {
            let (d0, d1) = (delta[i - 1], delta[i]);
            if d0 <= 0.0 || d1 <= 0.0 {
                slopes[i] = 0.0;
            } else {
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                slopes[i] = (w1 + w2) / (w1 / d0 + w2 / d1);
            }
        }
        Ok(Self { xs, ys, slopes })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    fn segment(&self, x: f64) -> usize {
        let n = self.xs.len();
        match self.xs.partition_point(|&xi| xi <= x) {
            0 => 0,
            i if i >= n => n - 2,
            i => i - 1,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0] + self.slopes[0] * (x - self.xs[0]);
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1] + self.slopes[n - 1] * (x - self.xs[n - 1]);
        }
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let s = (x - self.xs[i]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.ys[i] + h10 * h * self.slopes[i] + h01 * self.ys[i + 1] + h11 * h * self.slopes[i + 1]
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.slopes[0];
        }
        if x >= self.xs[n - 1] {
            return self.slopes[n - 1];
        }
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let s = (x - self.xs[i]) / h;
        let s2 = s * s;
        let d00 = 6.0 * s2 - 6.0 * s;
        let d10 = 3.0 * s2 - 4.0 * s + 1.0;
        let d01 = -6.0 * s2 + 6.0 * s;
        let d11 = 3.0 * s2 - 2.0 * s;
        (d00 * self.ys[i] + d01 * self.ys[i + 1]) / h + d10 * self.slopes[i] + d11 * self.slopes[i + 1]
    }

    /// Smallest `x` with `eval(x) = y` (the curve is nondecreasing).
    pub fn inverse(&self, y: f64) -> f64 {
        let n = self.xs.len();
        if y <= self.ys[0] {
            return if self.slopes[0] > 0.0 { self.xs[0] + (y - self.ys[0]) / self.slopes[0] } else { self.xs[0] };
        }
        if y > self.ys[n - 1] {
            let s = self.slopes[n - 1];
            return if s > 0.0 { self.xs[n - 1] + (y - self.ys[n - 1]) / s } else { self.xs[n - 1] };
        }
        let i = self.ys.partition_point(|&yi| yi < y).clamp(1, n - 1);
        let (lo, hi) = (self.xs[i - 1], self.xs[i]);
        bisect_increasing(|x| self.eval(x), y, lo, hi, 1e-15 * hi.abs().max(1.0))
    }

    fn secants(&self) -> impl Iterator<Item = f64> + '_ {
        self.xs.windows(2).zip(self.ys.windows(2)).map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0]))
    }
}

/// Shape of the base cost `c` in `c_k = θ_k · c`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaseCost {
    Linear,
    Power { exponent: f64 },
    Tabulated { table: MonotoneCubic },
}

impl BaseCost {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            BaseCost::Linear => x,
            BaseCost::Power { exponent } => x.powf(*exponent),
            BaseCost::Tabulated { table } => table.eval(x),
        }
    }

    pub fn inverse(&self, y: f64) -> f64 {
        match self {
            BaseCost::Linear => y,
            BaseCost::Power { exponent } => y.powf(1.0 / exponent),
            BaseCost::Tabulated { table } => table.inverse(y),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            BaseCost::Linear => 1.0,
            BaseCost::Power { exponent } => exponent * x.powf(exponent - 1.0),
            BaseCost::Tabulated { table } => table.derivative(x),
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, BaseCost::Linear)
    }

    pub fn is_concave(&self) -> bool {
        match self {
            BaseCost::Linear => true,
            BaseCost::Power { exponent } => *exponent <= 1.0,
            BaseCost::Tabulated { table } => {
                let s: Vec<f64> = table.secants().collect();
                s.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12))
            }
        }
    }

    pub fn is_convex(&self) -> bool {
        match self {
            BaseCost::Linear => true,
            BaseCost::Power { exponent } => *exponent >= 1.0,
            BaseCost::Tabulated { table } => {
                let s: Vec<f64> = table.secants().collect();
                s.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12))
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BaseCost::Linear => "linear",
            BaseCost::Power { .. } => "power",
            BaseCost::Tabulated { .. } => "tabulated",
        }
    }
}

/// One type: `c(x) = θ · base(x)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostFunction {
    theta: f64,
    base: BaseCost,
}

impl CostFunction {
    pub fn linear(theta: f64) -> Result<Self> {
        Self::new(theta, BaseCost::Linear)
    }

    /// `θ · x^a`; an exponent of exactly one is stored as linear.
    pub fn power(theta: f64, exponent: f64) -> Result<Self> {
        if !(exponent.is_finite() && exponent > 0.0) {
            return arg_err(format!("power exponent must be positive, got {exponent}"));
        }
        if exponent == 1.0 {
            return Self::linear(theta);
        }
        Self::new(theta, BaseCost::Power { exponent })
    }

    /// `θ` times a monotone interpolation through `points`, which must start
    /// at `(0, 0)` and be strictly increasing in both coordinates.
    pub fn tabulated(theta: f64, points: &[(f64, f64)]) -> Result<Self> {
        let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().copied().unzip();
        if xs.first() != Some(&0.0) || ys.first() != Some(&0.0) {
            return arg_err("tabulated cost must start at (0, 0)");
        }
        if ys.windows(2).any(|w| w[1] <= w[0]) {
            return arg_err("tabulated cost values must be strictly increasing");
        }
        Self::new(theta, BaseCost::Tabulated { table: MonotoneCubic::new(xs, ys)? })
    }

    pub fn new(theta: f64, base: BaseCost) -> Result<Self> {
        if !(theta.is_finite() && theta > 0.0) {
            return arg_err(format!("cost scale θ must be positive, got {theta}"));
        }
        Ok(Self { theta, base })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn base(&self) -> &BaseCost {
        &self.base
    }

    /// `c(x)` for `x >= 0`.
    pub fn eval(&self, x: f64) -> f64 {
        self.theta * self.base.eval(x)
    }

    /// `g(y) = c^{-1}(y)` for `y >= 0`.
    pub fn inverse(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        self.base.inverse(y / self.theta)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.theta * self.base.derivative(x)
    }

    pub fn is_concave(&self) -> bool {
        self.base.is_concave()
    }

    pub fn is_convex(&self) -> bool {
        self.base.is_convex()
    }
}

/// `c(x)`, rejecting negative effort.
pub fn cost_eval(cf: &CostFunction, x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return arg_err(format!("effort must be nonnegative, got {x}"));
    }
    Ok(cf.eval(x))
}

/// `c^{-1}(y)`, rejecting negative values.
pub fn cost_inverse(cf: &CostFunction, y: f64) -> Result<f64> {
    if y.is_nan() || y < 0.0 {
        return arg_err(format!("cost level must be nonnegative, got {y}"));
    }
    Ok(cf.inverse(y))
}

/// `(N + 1, {c_1, ..., c_K}, p)`; types are ordered least efficient first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContestEnvironment {
    n_others: usize,
    types: Vec<CostFunction>,
    probs: Vec<f64>,
    cumulative: Vec<f64>,
}

impl ContestEnvironment {
    /// Structural checks only; see [`validate_environment`] for the
    /// probability and ordering conditions.
    pub fn new(n_others: usize, types: Vec<CostFunction>, probs: Vec<f64>) -> Result<Self> {
        if n_others == 0 {
            return arg_err("need at least one opponent (N >= 1)");
        }
        if types.is_empty() {
            return arg_err("need at least one type");
        }
        if types.len() != probs.len() {
            return arg_err(format!("{} types but {} probabilities", types.len(), probs.len()));
        }
        if probs.iter().any(|p| !p.is_finite()) {
            return arg_err("probabilities must be finite");
        }
        let mut cumulative = Vec::with_capacity(probs.len() + 1);
        let mut acc = 0.0;
        cumulative.push(0.0);
        for p in &probs {
            acc += p;
            cumulative.push(acc);
        }
        if (acc - 1.0).abs() <= PROB_SUM_TOL {
            for c in cumulative.iter_mut() {
                *c = c.min(1.0);
            }
            *cumulative.last_mut().unwrap() = 1.0;
        }
        Ok(Self { n_others, types, probs, cumulative })
    }

    pub fn linear(n_others: usize, thetas: &[f64], probs: &[f64]) -> Result<Self> {
        let types = thetas.iter().map(|&t| CostFunction::linear(t)).collect::<Result<_>>()?;
        Self::new(n_others, types, probs.to_vec())
    }

    pub fn power(n_others: usize, thetas: &[f64], exponent: f64, probs: &[f64]) -> Result<Self> {
        let types = thetas.iter().map(|&t| CostFunction::power(t, exponent)).collect::<Result<_>>()?;
        Self::new(n_others, types, probs.to_vec())
    }

    pub fn parametric_with(n_others: usize, thetas: &[f64], base: &BaseCost, probs: &[f64]) -> Result<Self> {
        let types = thetas.iter().map(|&t| CostFunction::new(t, base.clone())).collect::<Result<_>>()?;
        Self::new(n_others, types, probs.to_vec())
    }

    /// `N`, the number of opponents each agent faces.
    pub fn n_others(&self) -> usize {
        self.n_others
    }

    /// `K`, the number of types.
    pub fn k(&self) -> usize {
        self.types.len()
    }

    pub fn types(&self) -> &[CostFunction] {
        &self.types
    }

    /// Cost function of type `k` (1-based).
    pub fn cost(&self, k: usize) -> &CostFunction {
        &self.types[k - 1]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `p_k` for 1-based `k`.
    pub fn prob(&self, k: usize) -> f64 {
        self.probs[k - 1]
    }

    /// `P_0 = 0, P_1, ..., P_K = 1`.
    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn thetas(&self) -> Vec<f64> {
        self.types.iter().map(CostFunction::theta).collect()
    }

    fn common_base(&self) -> Option<&BaseCost> {
        let first = self.types[0].base();
        self.types.iter().all(|c| c.base() == first).then_some(first)
    }

    /// `Some` when all types share one base cost and `θ_1 > ... > θ_K`.
    pub fn parametric(&self) -> Option<(&BaseCost, Vec<f64>)> {
        let base = self.common_base()?;
        let thetas = self.thetas();
        thetas.windows(2).all(|w| w[0] > w[1]).then_some((base, thetas))
    }

    pub fn is_parametric(&self) -> bool {
        self.parametric().is_some()
    }

    pub(crate) fn require_parametric(&self, what: &str) -> Result<(&BaseCost, Vec<f64>)> {
        self.parametric().ok_or_else(|| {
            ContestError::Capability(format!(
                "{what} requires a parametric type-space (common base, θ strictly decreasing)"
            ))
        })
    }

    pub(crate) fn require_linear(&self, what: &str) -> Result<Vec<f64>> {
        let (base, thetas) = self.require_parametric(what)?;
        if !base.is_linear() {
            return Err(ContestError::Capability(format!("{what} requires linear costs")));
        }
        Ok(thetas)
    }

    /// `k(t) = max{k : P_{k-1} <= t}`, capped at `K`.
    pub fn type_index(&self, t: f64) -> usize {
        let k = self.cumulative[..self.k()].partition_point(|&p| p <= t);
        k.clamp(1, self.k())
    }

    pub fn validate(&self, contest: Option<&Contest>) -> ValidationReport {
        validate_environment(self, contest)
    }
}

/// First failing condition found while validating an environment.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    NonPositiveProbability {
        k: usize,
        p: f64,
    },
    ProbabilitySum {
        sum: f64,
    },
    /// `c_k'(x) > c_{k+1}'(x)` fails; `x` is absent for the analytic check.
    Ordering {
        k: usize,
        x: Option<f64>,
    },
    ContestMismatch {
        contest_n: usize,
        env_n: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonPositiveProbability { k, p } => write!(f, "probs: p_{k} = {p} is not positive"),
            Violation::ProbabilitySum { sum } => write!(f, "probs: probabilities sum to {sum}, not 1"),
            Violation::Ordering { k, x: Some(x) } => {
                write!(f, "types: ordering c_{k}' > c_{}' fails at x = {x}", k + 1)
            }
            Violation::Ordering { k, x: None } => {
                write!(f, "types: θ_{k} > θ_{} fails for a common base cost", k + 1)
            }
            Violation::ContestMismatch { contest_n, env_n } => {
                write!(f, "contest has N = {contest_n} but the environment has N = {env_n}")
            }
        }
    }
}

/// How derivative ordering was checked.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum OrderingCheck {
    /// Common base: ordering reduces to `θ_1 > ... > θ_K`.
    Analytic,
    /// Central finite-difference slopes on a geometric grid.
    Grid { points: usize, x_min: f64, x_max: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub ordering_check: OrderingCheck,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first_violation(&self) -> Option<&Violation> {
        self.violations.first()
    }

    pub fn into_result(self) -> Result<()> {
        match self.violations.first() {
            None => Ok(()),
            Some(v) => Err(ContestError::Validation(v.to_string())),
        }
    }
}

/// Checks the probability simplex and the derivative ordering of the types.
///
/// With a contest in scope the ordering grid spans `(0, g_1(v_N)]`, the
/// largest effort any equilibrium can ask of the least efficient type.
pub fn validate_environment(env: &ContestEnvironment, contest: Option<&Contest>) -> ValidationReport {
    let mut violations = Vec::new();
    for (i, &p) in env.probs.iter().enumerate() {
        if p.is_nan() || p <= 0.0 {
            violations.push(Violation::NonPositiveProbability { k: i + 1, p });
        }
    }
    let sum: f64 = env.probs.iter().sum();
    if (sum - 1.0).abs() > PROB_SUM_TOL {
        violations.push(Violation::ProbabilitySum { sum });
    }
    if let Some(c) = contest {
        if c.n() != env.n_others {
            violations.push(Violation::ContestMismatch { contest_n: c.n(), env_n: env.n_others });
        }
    }

    let ordering_check = if env.common_base().is_some() {
        let thetas = env.thetas();
        if let Some(i) = thetas.windows(2).position(|w| w[0] <= w[1]) {
            violations.push(Violation::Ordering { k: i + 1, x: None });
        }
        OrderingCheck::Analytic
    } else {
        let x_max = contest
            .map(|c| env.types[0].inverse(c.top_prize()))
            .filter(|x| x.is_finite() && *x > 0.0)
            .unwrap_or(DEFAULT_ORDERING_XMAX);
        let x_min = x_max * 1e-6;
        let ratio = (x_max / x_min).powf(1.0 / (ORDERING_GRID_POINTS - 1) as f64);
        'grid: for i in 0..ORDERING_GRID_POINTS {
            let x = if i == ORDERING_GRID_POINTS - 1 { x_max } else { x_min * ratio.powi(i as i32) };
            let h = 1e-6 * x;
            let slope = |c: &CostFunction| (c.eval(x + h) - c.eval(x - h)) / (2.0 * h);
            for (k, pair) in env.types.windows(2).enumerate() {
                if slope(&pair[0]) <= slope(&pair[1]) {
                    violations.push(Violation::Ordering { k: k + 1, x: Some(x) });
                    break 'grid;
                }
            }
        }
        OrderingCheck::Grid { points: ORDERING_GRID_POINTS, x_min, x_max }
    };
    ValidationReport { violations, ordering_check }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_examples() {
        let lin = CostFunction::linear(2.0).unwrap();
        assert_eq!(cost_eval(&lin, 0.125).unwrap(), 0.25);
        assert_eq!(cost_eval(&lin, 0.0).unwrap(), 0.0);
        let sq = CostFunction::power(1.0, 2.0).unwrap();
        assert_eq!(cost_eval(&sq, 0.5).unwrap(), 0.25);
        assert!(cost_eval(&sq, -1.0).is_err());
    }

    #[test]
    fn inverse_examples() {
        let lin = CostFunction::linear(2.0).unwrap();
        assert_eq!(cost_inverse(&lin, 0.25).unwrap(), 0.125);
        assert_eq!(cost_inverse(&lin, 0.0).unwrap(), 0.0);
        let sq = CostFunction::power(1.0, 2.0).unwrap();
        assert_eq!(cost_inverse(&sq, 0.25).unwrap(), 0.5);
        assert!(cost_inverse(&sq, -0.5).is_err());
    }

    #[test]
    fn constructor_errors() {
        assert!(CostFunction::linear(0.0).is_err());
        assert!(CostFunction::power(1.0, -2.0).is_err());
        assert!(CostFunction::tabulated(1.0, &[(0.1, 0.0), (1.0, 1.0)]).is_err());
        assert!(CostFunction::tabulated(1.0, &[(0.0, 0.0), (1.0, 1.0), (2.0, 1.0)]).is_err());
        assert_eq!(CostFunction::power(3.0, 1.0).unwrap(), CostFunction::linear(3.0).unwrap());
    }

    #[test]
    fn tabulated_interpolates_and_extrapolates() {
        let pts = [(0.0, 0.0), (1.0, 1.0), (2.0, 4.0), (3.0, 9.0)];
        let c = CostFunction::tabulated(1.0, &pts).unwrap();
        for &(x, y) in &pts {
            assert!((c.eval(x) - y).abs() < 1e-14);
        }
        // linear extrapolation at the last secant slope (5)
        assert!((c.eval(4.0) - 14.0).abs() < 1e-12);
        let mut prev = 0.0;
        for i in 1..=400 {
            let x = i as f64 * 0.01;
            let y = c.eval(x);
            assert!(y > prev);
            prev = y;
            assert!((c.inverse(y) - x).abs() < 1e-10);
        }
        assert!(c.is_convex());
        assert!(!c.is_concave());
    }

    #[test]
    fn shape_flags_for_power() {
        assert!(CostFunction::power(1.0, 0.5).unwrap().is_concave());
        assert!(!CostFunction::power(1.0, 0.5).unwrap().is_convex());
        assert!(CostFunction::power(1.0, 2.0).unwrap().is_convex());
        let lin = CostFunction::linear(1.0).unwrap();
        assert!(lin.is_concave() && lin.is_convex());
    }

    #[test]
    fn second_differences_match_flags() {
        for a in [0.3, 0.5, 1.0, 1.5, 2.0, 3.0] {
            let c = CostFunction::power(1.7, a).unwrap();
            let h = 0.01;
            let mut signs = Vec::new();
            for i in 1..200 {
                let x = 0.05 + i as f64 * 0.02;
                let d2 = c.eval(x + h) - 2.0 * c.eval(x) + c.eval(x - h);
                signs.push(d2);
            }
            if c.is_convex() {
                assert!(signs.iter().all(|d| *d >= -1e-12), "a = {a}");
            }
            if c.is_concave() {
                assert!(signs.iter().all(|d| *d <= 1e-12), "a = {a}");
            }
        }
    }

    #[test]
    fn validation_examples() {
        let ok = ContestEnvironment::linear(2, &[2.0, 1.0], &[0.5, 0.5]).unwrap();
        let r = validate_environment(&ok, None);
        assert!(r.passed());
        assert_eq!(r.ordering_check, OrderingCheck::Analytic);

        let tied = ContestEnvironment::linear(2, &[1.0, 1.0], &[0.5, 0.5]).unwrap();
        let r = validate_environment(&tied, None);
        assert!(matches!(r.first_violation(), Some(Violation::Ordering { k: 1, x: None })));

        let short = ContestEnvironment::linear(2, &[2.0, 1.0], &[0.5, 0.4]).unwrap();
        let r = validate_environment(&short, None);
        assert!(matches!(r.first_violation(), Some(Violation::ProbabilitySum { .. })));
        assert!(r.first_violation().unwrap().to_string().contains("probs"));
    }

    #[test]
    fn mixed_families_use_the_grid() {
        // 2x against x^2 crosses at x = 1
        let env = ContestEnvironment::new(
            2,
            vec![CostFunction::linear(2.0).unwrap(), CostFunction::power(1.0, 2.0).unwrap()],
            vec![0.5, 0.5],
        )
        .unwrap();
        let r = validate_environment(&env, None);
        assert!(matches!(r.ordering_check, OrderingCheck::Grid { points: 256, .. }));
        match r.first_violation() {
            Some(Violation::Ordering { k: 1, x: Some(x) }) => assert!(*x >= 1.0 && *x < 1.1),
            other => panic!("unexpected {other:?}"),
        }
        // restricted to small efforts by the contest, the ordering holds
        let contest = Contest::new(vec![0.0, 0.0, 1.0]).unwrap();
        assert!(validate_environment(&env, Some(&contest)).passed());
        assert!(!env.is_parametric());
    }

    #[test]
    fn parametric_detection() {
        let env = ContestEnvironment::power(3, &[3.0, 2.0, 1.0], 2.0, &[0.2, 0.3, 0.5]).unwrap();
        let (base, thetas) = env.parametric().unwrap();
        assert_eq!(base, &BaseCost::Power { exponent: 2.0 });
        assert_eq!(thetas, vec![3.0, 2.0, 1.0]);
        assert_eq!(env.cumulative()[3], 1.0);
    }

    #[test]
    fn type_index_is_maximal() {
        let env = ContestEnvironment::linear(2, &[2.0, 1.0], &[0.5, 0.5]).unwrap();
        assert_eq!(env.type_index(0.0), 1);
        assert_eq!(env.type_index(0.5), 2);
        assert_eq!(env.type_index(0.49), 1);
        assert_eq!(env.type_index(1.0), 2);
    }

    #[test]
    fn inverse_roundtrip_grid() {
        let costs = [
            CostFunction::linear(1.3).unwrap(),
            CostFunction::power(0.7, 0.5).unwrap(),
            CostFunction::power(2.0, 2.5).unwrap(),
            CostFunction::tabulated(1.5, &[(0.0, 0.0), (0.5, 0.2), (1.0, 1.1), (2.0, 1.5)]).unwrap(),
        ];
        for c in &costs {
            for i in 0..=300 {
                let x = i as f64 * 0.01;
                assert!((c.inverse(c.eval(x)) - x).abs() <= 1e-9, "{c:?} at {x}");
            }
        }
    }
}

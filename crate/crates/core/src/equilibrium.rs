//! The symmetric Bayes-Nash equilibrium.
//!
//! Type `k` mixes over `[b_{k-1}, b_k]` and earns utility `u_k`. Starting
//! from `b_0 = 0`, `u_1 = 0`, indifference at both ends of each interval
//! fixes the next utility and boundary in turn:
//!
//! ```text
//! u_k = π_v(P_{k-1}) - c_k(b_{k-1})
//! b_k = g_k(π_v(P_k) - u_k)
//! ```
//!
//! Type indices are 1-based throughout, matching `b_0, ..., b_K`.

use serde::Serialize;

use crate::costs::ContestEnvironment;
use crate::error::{arg_err, ContestError, Result};
use crate::kernels::Contest;

/// Absolute tolerance (value units) for closed-form versus iterative checks.
pub const TOL_EQM: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Equilibrium {
    env: ContestEnvironment,
    contest: Contest,
    boundaries: Vec<f64>,
    utilities: Vec<f64>,
}

impl Equilibrium {
    /// Assembles an equilibrium from raw parts without solving or checking.
    ///
    /// Intended for feeding deliberately wrong candidates to the verifier.
    pub fn from_parts(
        env: ContestEnvironment,
        contest: Contest,
        boundaries: Vec<f64>,
        utilities: Vec<f64>,
    ) -> Result<Self> {
        if boundaries.len() != env.k() + 1 || utilities.len() != env.k() {
            return arg_err("need K + 1 boundaries and K utilities");
        }
        Ok(Self { env, contest, boundaries, utilities })
    }

    pub fn env(&self) -> &ContestEnvironment {
        &self.env
    }

    pub fn contest(&self) -> &Contest {
        &self.contest
    }

    /// `b_0 = 0, b_1, ..., b_K`.
    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    /// `u_1, ..., u_K` (index `k - 1`).
    pub fn utilities(&self) -> &[f64] {
        &self.utilities
    }

    pub fn utility(&self, k: usize) -> f64 {
        self.utilities[k - 1]
    }

    /// Support `[b_{k-1}, b_k]` of type `k`.
    pub fn support(&self, k: usize) -> (f64, f64) {
        (self.boundaries[k - 1], self.boundaries[k])
    }

    pub fn k(&self) -> usize {
        self.env.k()
    }

    fn check_k(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.k() {
            return arg_err(format!("type index {k} outside 1..={}", self.k()));
        }
        Ok(())
    }

    /// `F_k(x)`, clamped to 0 below `b_{k-1}` and 1 above `b_k`.
    pub fn type_cdf(&self, k: usize, x: f64) -> Result<f64> {
        self.check_k(k)?;
        Ok(self.type_cdf_unchecked(k, x))
    }

    pub(crate) fn type_cdf_unchecked(&self, k: usize, x: f64) -> f64 {
        let (lo, hi) = self.support(k);
        if x <= lo {
            return 0.0;
        }
        if x >= hi {
            return 1.0;
        }
        let p = self.env.cumulative();
        let t = self.contest.expected_prize_inverse(self.env.cost(k).eval(x) + self.utility(k));
        ((t - p[k - 1]) / self.env.prob(k)).clamp(0.0, 1.0)
    }

    /// `F(x) = Σ_k p_k F_k(x)`: `P_{k-1} + p_k F_k(x)` on segment `k`.
    pub fn exante_cdf(&self, x: f64) -> f64 {
        let b = &self.boundaries;
        let kk = self.k();
        if x <= 0.0 {
            return 0.0;
        }
        if x >= b[kk] {
            return 1.0;
        }
        // b_{k-1} <= x < b_k
        let k = b[..kk].partition_point(|&bj| bj <= x).clamp(1, kk);
        let p = self.env.cumulative();
        p[k - 1] + self.env.prob(k) * self.type_cdf_unchecked(k, x)
    }

    /// Inverse-transform draw from `F_k`: `g_k(π_v(P_{k-1} + p_k U) - u_k)`.
    pub fn sample(&self, k: usize, unit_draw: f64) -> Result<f64> {
        self.check_k(k)?;
        if !(0.0..=1.0).contains(&unit_draw) {
            return arg_err(format!("unit draw {unit_draw} outside [0, 1]"));
        }
        Ok(self.sample_unchecked(k, unit_draw))
    }

    pub(crate) fn sample_unchecked(&self, k: usize, unit_draw: f64) -> f64 {
        let (lo, hi) = self.support(k);
        if unit_draw <= 0.0 {
            return lo;
        }
        if unit_draw >= 1.0 {
            return hi;
        }
        let t = self.env.cumulative()[k - 1] + self.env.prob(k) * unit_draw;
        self.effort_at(k, t).clamp(lo, hi)
    }

    /// Effort of type `k` at win probability `t`: `g_k(π_v(t) - u_k)`.
    pub(crate) fn effort_at(&self, k: usize, t: f64) -> f64 {
        let level = (self.contest.expected_prize(t) - self.utility(k)).max(0.0);
        self.env.cost(k).inverse(level)
    }
}

/// Solves for boundaries and utilities by forward recursion over types.
pub fn solve(env: &ContestEnvironment, contest: &Contest) -> Result<Equilibrium> {
    env.validate(Some(contest)).into_result()?;
    let kk = env.k();
    let p = env.cumulative();
    let mut boundaries = Vec::with_capacity(kk + 1);
    let mut utilities = Vec::with_capacity(kk);
    boundaries.push(0.0);
    for k in 1..=kk {
        let cost = env.cost(k);
        let prev = boundaries[k - 1];
        let u = if k == 1 { 0.0 } else { contest.expected_prize(p[k - 1]) - cost.eval(prev) };
        let level = contest.expected_prize(p[k]) - u;
        let b = cost.inverse(level);
        if !b.is_finite() {
            return Err(ContestError::Numeric {
                k: Some(k),
                message: format!("cost inversion at level {level} failed"),
            });
        }
        if b <= prev {
            return Err(ContestError::Numeric {
                k: Some(k),
                message: format!("boundary {b} does not exceed the previous boundary {prev}"),
            });
        }
        utilities.push(u);
        boundaries.push(b);
    }
    Ok(Equilibrium { env: env.clone(), contest: contest.clone(), boundaries, utilities })
}

fn check_contest(env: &ContestEnvironment, contest: &Contest) -> Result<()> {
    if contest.n() != env.n_others() {
        return arg_err(format!("contest has N = {} but the environment has N = {}", contest.n(), env.n_others()));
    }
    Ok(())
}

/// `u_k = θ_k Σ_{j<k} π_v(P_j) (1/θ_{j+1} - 1/θ_j)` for parametric environments.
pub fn utilities_closed_form(env: &ContestEnvironment, contest: &Contest) -> Result<Vec<f64>> {
    let (_, thetas) = env.require_parametric("closed-form utilities")?;
    check_contest(env, contest)?;
    let p = env.cumulative();
    let mut out = Vec::with_capacity(thetas.len());
    let mut acc = 0.0;
    for k in 0..thetas.len() {
        if k > 0 {
            acc += contest.expected_prize(p[k]) * (1.0 / thetas[k] - 1.0 / thetas[k - 1]);
        }
        out.push(thetas[k] * acc);
    }
    Ok(out)
}

/// `b_1, ..., b_K` from `b_k = g(Σ_{j<=k} (π_v(P_j) - π_v(P_{j-1})) / θ_j)` for parametric environments.
pub fn boundaries_closed_form(env: &ContestEnvironment, contest: &Contest) -> Result<Vec<f64>> {
    let (base, thetas) = env.require_parametric("closed-form boundaries")?;
    check_contest(env, contest)?;
    let p = env.cumulative();
    let mut level = 0.0;
    let mut prev = 0.0;
    let mut out = Vec::with_capacity(thetas.len());
    for (k, theta) in thetas.iter().enumerate() {
        let pi = contest.expected_prize(p[k + 1]);
        level += (pi - prev) / theta;
        prev = pi;
        out.push(base.inverse(level));
    }
    Ok(out)
}

/// `k(t) = max{k : P_{k-1} <= t}`.
pub fn type_index(env: &ContestEnvironment, t: f64) -> usize {
    env.type_index(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::CostFunction;

    fn hand_env() -> ContestEnvironment {
        ContestEnvironment::linear(2, &[2.0, 1.0], &[0.5, 0.5]).unwrap()
    }

    fn top2() -> Contest {
        Contest::new(vec![0.0, 0.0, 1.0]).unwrap()
    }

    fn assert_vec(got: &[f64], want: &[f64], tol: f64) {
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() <= tol, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn single_type() {
        let env = ContestEnvironment::linear(2, &[1.0], &[1.0]).unwrap();
        let eq = solve(&env, &top2()).unwrap();
        assert_vec(eq.boundaries(), &[0.0, 1.0], 1e-15);
        assert_vec(eq.utilities(), &[0.0], 0.0);
    }

    #[test]
    fn two_type_hand_instance() {
        let eq = solve(&hand_env(), &top2()).unwrap();
        assert_vec(eq.utilities(), &[0.0, 0.125], 1e-15);
        assert_vec(eq.boundaries(), &[0.0, 0.125, 0.875], 1e-15);
        let doubled = solve(&hand_env(), &top2().scaled(2.0).unwrap()).unwrap();
        assert_vec(doubled.utilities(), &[0.0, 0.25], 1e-15);
        assert_vec(doubled.boundaries(), &[0.0, 0.25, 1.75], 1e-15);
    }

    #[test]
    fn rejects_invalid_inputs() {
        let tied = ContestEnvironment::linear(2, &[1.0, 1.0], &[0.5, 0.5]).unwrap();
        assert!(matches!(solve(&tied, &top2()), Err(ContestError::Validation(_))));
        let wrong_n = Contest::new(vec![0.0, 1.0]).unwrap();
        assert!(solve(&hand_env(), &wrong_n).is_err());
    }

    #[test]
    fn closed_forms() {
        let u = utilities_closed_form(&hand_env(), &top2()).unwrap();
        assert_vec(&u, &[0.0, 0.125], 1e-15);
        let b = boundaries_closed_form(&hand_env(), &top2()).unwrap();
        assert_vec(&b, &[0.125, 0.875], 1e-15);

        let sq = ContestEnvironment::power(2, &[2.0, 1.0], 2.0, &[0.5, 0.5]).unwrap();
        let b = boundaries_closed_form(&sq, &top2()).unwrap();
        assert_vec(&b, &[0.125f64.sqrt(), 0.875f64.sqrt()], 1e-15);
        let solved = solve(&sq, &top2()).unwrap();
        assert_vec(&solved.boundaries()[1..], &b, TOL_EQM);

        let one = ContestEnvironment::power(2, &[3.0], 0.5, &[1.0]).unwrap();
        assert_vec(&utilities_closed_form(&one, &top2()).unwrap(), &[0.0], 0.0);
        let b = boundaries_closed_form(&one, &top2()).unwrap();
        assert_vec(&b, &[(1.0f64 / 3.0).powi(2)], 1e-15);

        let three = ContestEnvironment::linear(2, &[4.0, 2.0, 1.0], &[1.0 / 3.0; 3]).unwrap();
        let v = Contest::new(vec![0.0, 0.3, 1.0]).unwrap();
        let eq = solve(&three, &v).unwrap();
        assert_vec(&utilities_closed_form(&three, &v).unwrap(), eq.utilities(), TOL_EQM);
        assert_vec(&boundaries_closed_form(&three, &v).unwrap(), &eq.boundaries()[1..], TOL_EQM);
    }

    #[test]
    fn closed_forms_need_parametric() {
        let mixed = ContestEnvironment::new(
            2,
            vec![CostFunction::linear(2.0).unwrap(), CostFunction::power(1.0, 2.0).unwrap()],
            vec![0.5, 0.5],
        )
        .unwrap();
        assert!(matches!(utilities_closed_form(&mixed, &top2()), Err(ContestError::Capability(_))));
        assert!(matches!(boundaries_closed_form(&mixed, &top2()), Err(ContestError::Capability(_))));
    }

    #[test]
    fn type_cdf_examples() {
        let env = ContestEnvironment::linear(2, &[1.0], &[1.0]).unwrap();
        let eq = solve(&env, &top2()).unwrap();
        assert_eq!(eq.type_cdf(1, 0.0).unwrap(), 0.0);
        assert!((eq.type_cdf(1, 0.25).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(eq.type_cdf(1, 1.0).unwrap(), 1.0);
        assert!(eq.type_cdf(2, 0.5).is_err());

        let eq = solve(&hand_env(), &top2()).unwrap();
        for k in 1..=2 {
            let (lo, hi) = eq.support(k);
            assert_eq!(eq.type_cdf(k, lo).unwrap(), 0.0);
            assert_eq!(eq.type_cdf(k, hi).unwrap(), 1.0);
        }
    }

    #[test]
    fn exante_cdf_examples() {
        let eq = solve(&hand_env(), &top2()).unwrap();
        assert_eq!(eq.exante_cdf(-1.0), 0.0);
        assert!((eq.exante_cdf(0.125) - 0.5).abs() < 1e-15);
        assert_eq!(eq.exante_cdf(0.875), 1.0);
        assert_eq!(eq.exante_cdf(5.0), 1.0);
    }

    #[test]
    fn type_index_examples() {
        let env = hand_env();
        assert_eq!(type_index(&env, 0.0), 1);
        assert_eq!(type_index(&env, 0.5), 2);
        assert_eq!(type_index(&env, 1.0), 2);
    }

    #[test]
    fn sample_examples() {
        let env = ContestEnvironment::linear(2, &[1.0], &[1.0]).unwrap();
        let eq = solve(&env, &top2()).unwrap();
        assert_eq!(eq.sample(1, 0.0).unwrap(), 0.0);
        assert_eq!(eq.sample(1, 1.0).unwrap(), 1.0);
        assert!((eq.sample(1, 0.5).unwrap() - 0.25).abs() < 1e-15);
        assert!(eq.sample(1, 1.5).is_err());

        let eq = solve(&hand_env(), &top2()).unwrap();
        assert_eq!(eq.sample(2, 0.0).unwrap(), 0.125);
        assert_eq!(eq.sample(2, 1.0).unwrap(), 0.875);
    }

    #[test]
    fn cdf_is_continuous_and_monotone() {
        let env = ContestEnvironment::power(3, &[3.0, 2.0, 1.0], 2.0, &[0.3, 0.3, 0.4]).unwrap();
        let v = Contest::new(vec![0.0, 0.2, 0.3, 1.0]).unwrap();
        let eq = solve(&env, &v).unwrap();
        let top = eq.boundaries()[3];
        let mut prev = 0.0;
        let mut x = 0.0;
        while x <= top + 1e-4 {
            let f = eq.exante_cdf(x);
            assert!(f >= prev - 1e-15);
            assert!(f - prev <= 1e-3, "jump at {x}");
            prev = f;
            x += 1e-4;
        }
    }
}

//! Effects of transferring prize value from rank `m'` to a better rank `m`.
//!
//! Under linear costs the effect on expected effort is `α_m - α_{m'}`. For a
//! parametric type-space with base `c`, the sign carries over to concave
//! (when nonnegative) or convex (when nonpositive) bases provided that
//! either `m = N` or the top type's utility does not rise; this is decided
//! through the single-crossing of `λ_m(t) - λ_{m'}(t)`.

use std::fmt;

use serde::Serialize;

use crate::costs::ContestEnvironment;
use crate::effort::{alpha_from_thetas, expected_effort};
use crate::equilibrium::solve;
use crate::error::{arg_err, ContestError, Result};
use crate::kernels::{pmf, Contest};

/// Sign decisions treat magnitudes at or below this as zero.
pub const ZERO_TOL: f64 = 1e-12;
/// Uniform grid size for the single-crossing diagnostic.
pub const LAMBDA_GRID: usize = 2048;
/// Default finite-difference step as a fraction of `v_N`.
pub const FD_STEP_REL: f64 = 1e-4;

/// A transfer of value from prize `m'` to the better-ranked prize `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CompetitionQuery {
    pub m: usize,
    pub m_prime: usize,
}

impl CompetitionQuery {
    /// Requires `1 <= m' < m <= N`.
    pub fn new(m: usize, m_prime: usize, n: usize) -> Result<Self> {
        if !(1 <= m_prime && m_prime < m && m <= n) {
            return arg_err(format!("need 1 <= m' < m <= N, got m = {m}, m' = {m_prime}, N = {n}"));
        }
        Ok(Self { m, m_prime })
    }

    /// Every pair `m > m'` for the given `N`.
    pub fn all(n: usize) -> Vec<Self> {
        (2..=n).flat_map(|m| (1..m).map(move |m_prime| Self { m, m_prime })).collect()
    }

    fn check(&self, n: usize) -> Result<()> {
        Self::new(self.m, self.m_prime, n).map(|_| ())
    }
}

fn check_prize_index(m: usize, n: usize) -> Result<()> {
    if m == 0 || m > n {
        return arg_err(format!("prize index {m} outside 1..={n}"));
    }
    Ok(())
}

fn gradient_from_thetas(n: usize, thetas: &[f64], cumulative: &[f64], m: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(thetas.len());
    let mut acc = 0.0;
    for k in 0..thetas.len() {
        if k > 0 {
            acc += pmf(n, m, cumulative[k]) * (1.0 / thetas[k] - 1.0 / thetas[k - 1]);
        }
        out.push(thetas[k] * acc);
    }
    out
}

/// `∂u_k/∂v_m` for `k = 1..K`; independent of the base cost and the contest.
pub fn utility_gradient(env: &ContestEnvironment, m: usize) -> Result<Vec<f64>> {
    let (_, thetas) = env.require_parametric("utility gradient")?;
    check_prize_index(m, env.n_others())?;
    Ok(gradient_from_thetas(env.n_others(), &thetas, env.cumulative(), m))
}

/// `α_m - α_{m'}` under linear costs.
pub fn competition_effect_linear(env: &ContestEnvironment, query: CompetitionQuery) -> Result<f64> {
    let thetas = env.require_linear("linear competition effect")?;
    query.check(env.n_others())?;
    let alpha = alpha_from_thetas(env.n_others(), &thetas, env.cumulative());
    Ok(alpha.get(query.m) - alpha.get(query.m_prime))
}

fn shifted(contest: &Contest, query: CompetitionQuery, h: f64) -> Option<Contest> {
    let mut prizes = contest.prizes().to_vec();
    prizes[query.m] += h;
    prizes[query.m_prime] -= h;
    if prizes.windows(2).any(|w| w[1] < w[0]) || prizes[0] != 0.0 {
        return None;
    }
    Contest::new(prizes).ok()
}

/// Finite-difference estimate of `∂E[X]/∂v_m - ∂E[X]/∂v_{m'}`.
///
/// Central differences at `h` and `h/2` are combined by Richardson
/// extrapolation. When one side of the stencil leaves the set of monotone
/// contests, the corresponding second-order one-sided formula is used.
pub fn competition_effect_numeric(
    env: &ContestEnvironment,
    contest: &Contest,
    query: CompetitionQuery,
    step: f64,
) -> Result<f64> {
    query.check(env.n_others())?;
    if !(step > 0.0 && step.is_finite()) {
        return arg_err(format!("step must be positive, got {step}"));
    }
    let effort = |h: f64| -> Result<Option<f64>> {
        if h == 0.0 {
            return Ok(Some(expected_effort(&solve(env, contest)?)));
        }
        match shifted(contest, query, h) {
            Some(c) => Ok(Some(expected_effort(&solve(env, &c)?))),
            None => Ok(None),
        }
    };
    let h = step;
    let half = 0.5 * step;
    let (ep, eh_p, em, eh_m) = (effort(h)?, effort(half)?, effort(-h)?, effort(-half)?);
    if let (Some(ep), Some(eh_p), Some(em), Some(eh_m)) = (ep, eh_p, em, eh_m) {
        let d_h = (ep - em) / (2.0 * h);
        let d_half = (eh_p - eh_m) / (2.0 * half);
        return Ok((4.0 * d_half - d_h) / 3.0);
    }
    let e0 = effort(0.0)?.expect("base contest is valid");
    // one-sided: D(h) = (E(σh) - E(0)) / (σh), extrapolated 2 D(h/2) - D(h)
    for sign in [1.0, -1.0] {
        if let (Some(far), Some(near)) = (effort(sign * h)?, effort(sign * half)?) {
            let d_h = (far - e0) / (sign * h);
            let d_half = (near - e0) / (sign * half);
            return Ok(2.0 * d_half - d_h);
        }
    }
    Err(ContestError::Step { step })
}

/// Default step `1e-4 · v_N`.
pub fn default_step(contest: &Contest) -> f64 {
    FD_STEP_REL * contest.top_prize()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Positive,
    Zero,
    Negative,
}

impl Sign {
    pub fn of(x: f64, tol: f64) -> Self {
        if x > tol {
            Sign::Positive
        } else if x < -tol {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }
}

/// Sign of `α_{m+1} - α_m` in a binary linear environment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinaryTransfer {
    pub sign: Sign,
    pub difference: f64,
    /// The effect is nonnegative iff `P_1 <= (m + 1) / N`.
    pub threshold: f64,
}

pub fn binary_transfer_sign(env: &ContestEnvironment, m: usize) -> Result<BinaryTransfer> {
    let thetas = env.require_linear("binary transfer sign")?;
    if thetas.len() != 2 {
        return Err(ContestError::Capability("binary transfer sign requires exactly two types".into()));
    }
    let n = env.n_others();
    if m == 0 || m + 1 > n {
        return arg_err(format!("m must lie in 1..={}", n.saturating_sub(1)));
    }
    let alpha = alpha_from_thetas(n, &thetas, env.cumulative());
    let difference = alpha.get(m + 1) - alpha.get(m);
    Ok(BinaryTransfer { sign: Sign::of(difference, ZERO_TOL), difference, threshold: (m + 1) as f64 / n as f64 })
}

/// `λ_m(t) - λ_{m'}(t)` sampled on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaProfile {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub single_crossing: bool,
}

impl LambdaProfile {
    pub fn at_zero(&self) -> f64 {
        self.values[0]
    }
}

/// Evaluates `λ_m(t) - λ_{m'}(t)` at one point:
/// `(H_m(t) - H_{m'}(t))/θ_{k(t)} - Σ_{j<k(t)} (H_m(P_j) - H_{m'}(P_j))(1/θ_{j+1} - 1/θ_j)`.
pub fn lambda_difference(env: &ContestEnvironment, query: CompetitionQuery, t: f64) -> Result<f64> {
    let (_, thetas) = env.require_parametric("lambda profile")?;
    query.check(env.n_others())?;
    if !(0.0..=1.0).contains(&t) {
        return arg_err(format!("t = {t} outside [0, 1]"));
    }
    Ok(lambda_unchecked(env, &thetas, query, t))
}

fn lambda_unchecked(env: &ContestEnvironment, thetas: &[f64], query: CompetitionQuery, t: f64) -> f64 {
    let n = env.n_others();
    let p = env.cumulative();
    let k = env.type_index(t);
    let diff = |s: f64| pmf(n, query.m, s) - pmf(n, query.m_prime, s);
    let rent: f64 = (1..k).map(|j| diff(p[j]) * (1.0 / thetas[j] - 1.0 / thetas[j - 1])).sum();
    diff(t) / thetas[k - 1] - rent
}

/// The default grid: 2048 uniform intervals plus the breakpoints `P_k`.
pub fn default_lambda_grid(env: &ContestEnvironment) -> Vec<f64> {
    let mut grid: Vec<f64> = (0..=LAMBDA_GRID).map(|i| i as f64 / LAMBDA_GRID as f64).collect();
    grid.extend_from_slice(&env.cumulative()[1..env.k()]);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// Samples `λ_m - λ_{m'}` and decides whether it is `<= 0` then `>= 0`.
pub fn lambda_profile(env: &ContestEnvironment, query: CompetitionQuery, grid: &[f64]) -> Result<LambdaProfile> {
    let (_, thetas) = env.require_parametric("lambda profile")?;
    query.check(env.n_others())?;
    if grid.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return arg_err("lambda grid must lie in [0, 1]");
    }
    let mut grid = grid.to_vec();
    grid.sort_by(f64::total_cmp);
    let values: Vec<f64> = grid.iter().map(|&t| lambda_unchecked(env, &thetas, query, t)).collect();
    let single_crossing = is_single_crossing(&values, ZERO_TOL);
    Ok(LambdaProfile { grid, values, single_crossing })
}

/// True when no value below `-tol` follows a value above `tol`.
pub fn is_single_crossing(values: &[f64], tol: f64) -> bool {
    let mut seen_positive = false;
    for &v in values {
        if v > tol {
            seen_positive = true;
        } else if v < -tol && seen_positive {
            return false;
        }
    }
    true
}

/// Which sufficient condition for signing the general-cost effect applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Classification {
    /// Transfer weakly raises effort for every concave base and contest.
    pub encourages_under_concave: bool,
    /// Transfer weakly lowers effort for every convex base and contest.
    pub discourages_under_convex: bool,
}

impl Classification {
    pub fn is_inconclusive(&self) -> bool {
        !self.encourages_under_concave && !self.discourages_under_convex
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.encourages_under_concave, self.discourages_under_convex) {
            (true, true) => f.write_str("encourages_under_concave+discourages_under_convex"),
            (true, false) => f.write_str("encourages_under_concave"),
            (false, true) => f.write_str("discourages_under_convex"),
            (false, false) => f.write_str("inconclusive"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompetitionReport {
    pub query: CompetitionQuery,
    /// `α_m - α_{m'}`, the effect on expected (base) effort cost.
    pub linear_effect: f64,
    /// `∂u_k/∂v_m - ∂u_k/∂v_{m'}` for `k = 1..K`.
    pub utility_effects: Vec<f64>,
    pub top_type_condition: bool,
    pub single_crossing: bool,
    pub classification: Classification,
    /// Finite-difference effect at a specific contest, when requested.
    pub numeric_effect: Option<f64>,
}

/// Assembles the linear effect, utility effects and the single-crossing
/// diagnostic, and applies the two sufficient conditions.
pub fn classify(env: &ContestEnvironment, query: CompetitionQuery) -> Result<CompetitionReport> {
    let (_, thetas) = env.require_parametric("classification")?;
    let n = env.n_others();
    query.check(n)?;
    let p = env.cumulative();
    let alpha = alpha_from_thetas(n, &thetas, p);
    let linear_effect = alpha.get(query.m) - alpha.get(query.m_prime);
    let gm = gradient_from_thetas(n, &thetas, p, query.m);
    let gmp = gradient_from_thetas(n, &thetas, p, query.m_prime);
    let utility_effects: Vec<f64> = gm.iter().zip(&gmp).map(|(a, b)| a - b).collect();
    let top_type_condition = query.m == n || *utility_effects.last().unwrap() <= ZERO_TOL;
    let profile = lambda_profile(env, query, &default_lambda_grid(env))?;
    let classification = Classification {
        encourages_under_concave: top_type_condition && linear_effect >= -ZERO_TOL,
        discourages_under_convex: top_type_condition && linear_effect <= ZERO_TOL,
    };
    Ok(CompetitionReport {
        query,
        linear_effect,
        utility_effects,
        top_type_condition,
        single_crossing: profile.single_crossing,
        classification,
        numeric_effect: None,
    })
}

/// [`classify`] plus the finite-difference effect at `contest`.
pub fn classify_at(
    env: &ContestEnvironment,
    contest: &Contest,
    query: CompetitionQuery,
    step: f64,
) -> Result<CompetitionReport> {
    let mut report = classify(env, query)?;
    report.numeric_effect = Some(competition_effect_numeric(env, contest, query, step)?);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hand_env() -> ContestEnvironment {
        ContestEnvironment::linear(2, &[2.0, 1.0], &[0.5, 0.5]).unwrap()
    }

    #[test]
    fn query_validation() {
        assert!(CompetitionQuery::new(2, 1, 2).is_ok());
        assert!(CompetitionQuery::new(1, 1, 2).is_err());
        assert!(CompetitionQuery::new(3, 1, 2).is_err());
        assert!(CompetitionQuery::new(2, 0, 2).is_err());
        assert_eq!(CompetitionQuery::all(3).len(), 3);
    }

    #[test]
    fn gradient_examples() {
        let g2 = utility_gradient(&hand_env(), 2).unwrap();
        assert_eq!(g2[0], 0.0);
        assert!((g2[1] - 0.125).abs() < 1e-15);
        let g1 = utility_gradient(&hand_env(), 1).unwrap();
        assert!((g1[1] - 0.25).abs() < 1e-15);
        assert!(utility_gradient(&hand_env(), 3).is_err());
    }

    #[test]
    fn linear_effect_examples() {
        let q = CompetitionQuery::new(2, 1, 2).unwrap();
        assert!((competition_effect_linear(&hand_env(), q).unwrap() - 0.125).abs() < 1e-15);
        let one = ContestEnvironment::linear(4, &[1.5], &[1.0]).unwrap();
        for q in CompetitionQuery::all(4) {
            assert_eq!(competition_effect_linear(&one, q).unwrap(), 0.0);
        }
        let env = ContestEnvironment::linear(4, &[3.0, 2.0, 1.0], &[0.2, 0.5, 0.3]).unwrap();
        for mp in 1..4 {
            let q = CompetitionQuery::new(4, mp, 4).unwrap();
            assert!(competition_effect_linear(&env, q).unwrap() > 0.0);
        }
        let sq = ContestEnvironment::power(2, &[2.0, 1.0], 2.0, &[0.5, 0.5]).unwrap();
        assert!(matches!(competition_effect_linear(&sq, q), Err(ContestError::Capability(_))));
    }

    #[test]
    fn numeric_matches_linear() {
        let env = ContestEnvironment::linear(3, &[3.0, 1.5, 1.0], &[0.3, 0.3, 0.4]).unwrap();
        let v = Contest::new(vec![0.0, 0.2, 0.5, 1.0]).unwrap();
        for q in CompetitionQuery::all(3) {
            let fd = competition_effect_numeric(&env, &v, q, default_step(&v)).unwrap();
            let exact = competition_effect_linear(&env, q).unwrap();
            assert!((fd - exact).abs() < 1e-6, "{q:?}: {fd} vs {exact}");
        }
    }

    #[test]
    fn numeric_complete_information_signs() {
        let q = CompetitionQuery::new(2, 1, 2).unwrap();
        let convex = ContestEnvironment::power(2, &[1.0], 2.0, &[1.0]).unwrap();
        let v = Contest::new(vec![0.0, 0.5, 0.5]).unwrap();
        let d = competition_effect_numeric(&convex, &v, q, default_step(&v)).unwrap();
        assert!(d <= 0.0, "{d}");
        let concave = ContestEnvironment::power(2, &[1.0], 0.5, &[1.0]).unwrap();
        for prizes in [vec![0.0, 0.5, 0.5], vec![0.0, 0.2, 0.8], vec![0.0, 0.0, 1.0]] {
            let v = Contest::new(prizes).unwrap();
            let d = competition_effect_numeric(&concave, &v, q, default_step(&v)).unwrap();
            assert!(d >= 0.0, "{d}");
        }
    }

    #[test]
    fn numeric_step_errors() {
        // v_1 = v_2 = v_3: moving value between ranks 1 and 2 breaks monotonicity both ways
        let env = ContestEnvironment::linear(3, &[2.0, 1.0], &[0.5, 0.5]).unwrap();
        let v = Contest::new(vec![0.0, 0.5, 0.5, 0.5]).unwrap();
        let q = CompetitionQuery::new(2, 1, 3).unwrap();
        let err = competition_effect_numeric(&env, &v, q, 1e-4);
        assert!(matches!(err, Err(ContestError::Step { .. })), "{err:?}");
        assert!(competition_effect_numeric(&env, &v, q, -1.0).is_err());
    }

    #[test]
    fn binary_examples() {
        let env = ContestEnvironment::linear(4, &[2.0, 1.0], &[0.5, 0.5]).unwrap();
        let r = binary_transfer_sign(&env, 2).unwrap();
        assert_eq!(r.sign, Sign::Positive);
        assert_eq!(r.threshold, 0.75);
        let env = ContestEnvironment::linear(4, &[2.0, 1.0], &[0.9, 0.1]).unwrap();
        assert_eq!(binary_transfer_sign(&env, 2).unwrap().sign, Sign::Negative);
        for p1 in [0.05, 0.5, 0.95] {
            let env = ContestEnvironment::linear(2, &[2.0, 1.0], &[p1, 1.0 - p1]).unwrap();
            let r = binary_transfer_sign(&env, 1).unwrap();
            assert_ne!(r.sign, Sign::Negative);
            assert_eq!(r.threshold, 1.0);
        }
        assert!(binary_transfer_sign(&env, 4).is_err());
        let three = ContestEnvironment::linear(4, &[3.0, 2.0, 1.0], &[0.3, 0.3, 0.4]).unwrap();
        assert!(matches!(binary_transfer_sign(&three, 1), Err(ContestError::Capability(_))));
    }

    #[test]
    fn lambda_examples() {
        let env = ContestEnvironment::linear(3, &[3.0, 2.0, 1.0], &[0.3, 0.3, 0.4]).unwrap();
        let q = CompetitionQuery::new(3, 1, 3).unwrap();
        let prof = lambda_profile(&env, q, &default_lambda_grid(&env)).unwrap();
        assert_eq!(prof.at_zero(), 0.0);
        let gm = utility_gradient(&env, 3).unwrap();
        let gmp = utility_gradient(&env, 1).unwrap();
        let want = (1.0 - (gm[2] - gmp[2])) / 1.0;
        assert!((lambda_difference(&env, q, 1.0).unwrap() - want).abs() < 1e-15);
        assert!(prof.single_crossing);

        // one type: the profile is H_m - H_{m'} scaled by 1/θ
        let one = ContestEnvironment::linear(4, &[2.0], &[1.0]).unwrap();
        let q = CompetitionQuery::new(3, 2, 4).unwrap();
        let prof = lambda_profile(&one, q, &default_lambda_grid(&one)).unwrap();
        for (t, v) in prof.grid.iter().zip(&prof.values) {
            let want = (pmf(4, 3, *t) - pmf(4, 2, *t)) / 2.0;
            assert!((v - want).abs() < 1e-15);
        }
        assert!(prof.single_crossing);
    }

    #[test]
    fn single_crossing_detector() {
        assert!(is_single_crossing(&[0.0, -1.0, -0.5, 0.0, 0.3, 1.0], 1e-12));
        assert!(is_single_crossing(&[0.0, -1.0, -0.5], 1e-12));
        assert!(!is_single_crossing(&[0.0, -1.0, 0.5, -0.2], 1e-12));
        assert!(is_single_crossing(&[0.0, 1.0, -1e-13], 1e-12));
    }

    #[test]
    fn classify_examples() {
        let env = ContestEnvironment::power(4, &[3.0, 2.0, 1.0], 0.5, &[0.2, 0.5, 0.3]).unwrap();
        for mp in 1..4 {
            let r = classify(&env, CompetitionQuery::new(4, mp, 4).unwrap()).unwrap();
            assert!(r.classification.encourages_under_concave, "{r:?}");
            assert!(r.single_crossing);
        }
        let one = ContestEnvironment::power(3, &[1.0], 2.0, &[1.0]).unwrap();
        let r = classify(&one, CompetitionQuery::new(2, 1, 3).unwrap()).unwrap();
        assert!(r.classification.encourages_under_concave && r.classification.discourages_under_convex);
        assert_eq!(r.linear_effect, 0.0);

        // binary, N = 4, P_1 = 0.5: the top-type condition holds and α_3 > α_2
        let env = ContestEnvironment::linear(4, &[2.0, 1.0], &[0.5, 0.5]).unwrap();
        let r = classify(&env, CompetitionQuery::new(3, 2, 4).unwrap()).unwrap();
        assert!(r.top_type_condition && r.linear_effect > 0.0);
        assert!(r.classification.encourages_under_concave && !r.classification.discourages_under_convex);
    }

    #[test]
    fn classify_binary_high_inefficient_share() {
        // N = 4, P_1 = 0.9: α_3 - α_2 < 0 since 0.9 > 3/4
        let env = ContestEnvironment::linear(4, &[2.0, 1.0], &[0.9, 0.1]).unwrap();
        let q = CompetitionQuery::new(3, 2, 4).unwrap();
        let r = classify(&env, q).unwrap();
        let util_top = *r.utility_effects.last().unwrap();
        // H^4_3(0.9) - H^4_2(0.9) = 0.2916 - 0.0486 > 0 so the top-type condition fails
        assert!(util_top > 0.0);
        assert!(!r.top_type_condition);
        assert!(r.classification.is_inconclusive());
        assert!(r.linear_effect < 0.0);
        let with_fd = classify_at(&env, &Contest::new(vec![0.0, 0.1, 0.2, 0.3, 0.4]).unwrap(), q, 1e-4).unwrap();
        assert!((with_fd.numeric_effect.unwrap() - r.linear_effect).abs() < 1e-6);
    }
}

//! Expected equilibrium effort.
//!
//! With `t` the (uniform) probability of beating an arbitrary opponent,
//! `E[X] = ∫_0^1 g_{k(t)}(π_v(t) - u_{k(t)}) dt`. The integrand is continuous
//! with kinks at the `P_k`, so each `[P_{k-1}, P_k]` is integrated on its own.
//! Under linear costs the same quantity is `Σ_m α_m v_m`.

use serde::Serialize;

use crate::costs::ContestEnvironment;
use crate::equilibrium::Equilibrium;
use crate::error::{arg_err, Result};
use crate::kernels::{pmf, tail_at_least, Contest};
use crate::quadrature::{integrate, QUAD_TOL};

/// `∫_{P_{k-1}}^{P_k} g_k(π_v(t) - u_k) dt`, i.e. `p_k E[X_k]`.
fn segment_effort(eqm: &Equilibrium, k: usize) -> f64 {
    let p = eqm.env().cumulative();
    integrate(|t| eqm.effort_at(k, t), p[k - 1], p[k], QUAD_TOL)
}

/// `E[X]` for an arbitrary agent, by segment-wise adaptive Gauss–Legendre.
pub fn expected_effort(eqm: &Equilibrium) -> f64 {
    (1..=eqm.k()).map(|k| segment_effort(eqm, k)).sum()
}

/// `E[X_k]`, the expected effort of type `k` (1-based).
pub fn expected_effort_per_type(eqm: &Equilibrium, k: usize) -> Result<f64> {
    if k == 0 || k > eqm.k() {
        return arg_err(format!("type index {k} outside 1..={}", eqm.k()));
    }
    Ok(segment_effort(eqm, k) / eqm.env().prob(k))
}

/// Expected effort per unit of each prize `m = 1..N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaVector {
    coefficients: Vec<f64>,
}

impl AlphaVector {
    /// `α_1, ..., α_N` (index `m - 1`).
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// `α_m` for `1 <= m <= N`.
    pub fn get(&self, m: usize) -> f64 {
        self.coefficients[m - 1]
    }

    pub fn n(&self) -> usize {
        self.coefficients.len()
    }

    /// `Σ_m α_m v_m`.
    pub fn apply(&self, contest: &Contest) -> Result<f64> {
        if contest.n() != self.n() {
            return arg_err("contest and coefficients disagree on N");
        }
        Ok(self.coefficients.iter().zip(&contest.prizes()[1..]).map(|(a, v)| a * v).sum())
    }
}

/// α from the scales alone; valid as effort under linear costs and as
/// effort cost `E[c(X)]` for any common base.
pub(crate) fn alpha_from_thetas(n: usize, thetas: &[f64], cumulative: &[f64]) -> AlphaVector {
    let kk = thetas.len();
    let top = 1.0 / thetas[kk - 1];
    let coefficients = (1..=n)
        .map(|m| {
            let correction: f64 = (1..kk)
                .map(|k| {
                    let pk = cumulative[k];
                    let weight = tail_at_least(n + 1, m, pk) + (n - m) as f64 * pmf(n + 1, m, pk);
                    weight * (1.0 / thetas[k] - 1.0 / thetas[k - 1])
                })
                .sum();
            (top - correction) / (n + 1) as f64
        })
        .collect();
    AlphaVector { coefficients }
}

/// α for a parametric environment with linear costs.
pub fn alpha_coefficients(env: &ContestEnvironment) -> Result<AlphaVector> {
    let thetas = env.require_linear("alpha coefficients")?;
    Ok(alpha_from_thetas(env.n_others(), &thetas, env.cumulative()))
}

/// α in effort-cost space for any parametric environment.
pub fn cost_space_alpha(env: &ContestEnvironment) -> Result<AlphaVector> {
    let (_, thetas) = env.require_parametric("cost-space alpha")?;
    Ok(alpha_from_thetas(env.n_others(), &thetas, env.cumulative()))
}

/// `E[c(X)] = Σ α_m v_m`; independent of the base cost.
pub fn expected_cost(env: &ContestEnvironment, contest: &Contest) -> Result<f64> {
    cost_space_alpha(env)?.apply(contest)
}

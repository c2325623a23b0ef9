//! Equilibrium analysis for rank-order all-pay contests in which each of
//! `N + 1` agents privately draws one of `K` effort cost functions.
//!
//! - [`kernels`]: binomial order-statistic kernels and the expected-prize function `π_v`.
//! - [`costs`]: cost functions and the contest environment.
//! - [`equilibrium`]: the symmetric Bayes-Nash equilibrium and its CDFs.
//! - [`effort`]: expected effort by quadrature and the linear `α` coefficients.
//! - [`competition`]: effects of transferring value to better-ranked prizes.
//! - [`design`]: budget allocation across prizes.
//! - [`verify`]: best-response gaps and Monte Carlo checks.
//! - [`continuum`]: the continuum-type limit and quantile discretization.
//!
//! Type indices `k` are 1-based (type 1 is least efficient); prize indices
//! `m` run over `0..=N`.
//!
//! ```
//! use contestlab_core::{costs::ContestEnvironment, equilibrium::solve, effort::expected_effort, kernels::Contest};
//!
//! let env = ContestEnvironment::linear(2, &[2.0, 1.0], &[0.5, 0.5])?;
//! let contest = Contest::new(vec![0.0, 0.0, 1.0])?;
//! let eqm = solve(&env, &contest)?;
//! assert!((eqm.boundaries()[2] - 0.875).abs() < 1e-12);
//! assert!((expected_effort(&eqm) - 0.25).abs() < 1e-12);
//! # Ok::<(), contestlab_core::ContestError>(())
//! ```

pub mod competition;
pub mod continuum;
pub mod costs;
pub mod design;
pub mod effort;
pub mod equilibrium;
mod error;
pub mod kernels;
pub mod quadrature;
pub mod roots;
pub mod verify;

pub use error::{ContestError, Result};

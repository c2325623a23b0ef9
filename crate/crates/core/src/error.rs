use thiserror::Error;

/// Errors raised by the solver and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ContestError {
    /// An argument is outside the domain the operation is defined on.
    #[error("invalid argument: {0}")]
    Argument(String),
    /// A value to invert lies outside the range of the function.
    #[error("value {value} outside the range [{lower}, {upper}]")]
    Domain { value: f64, lower: f64, upper: f64 },
    /// The operation only exists for a narrower class of environments.
    #[error("unsupported environment: {0}")]
    Capability(String),
    /// The environment failed validation.
    #[error("environment validation failed: {0}")]
    Validation(String),
    /// A numerical step failed; `k` carries the type index when one applies.
    #[error("numerical failure{}: {message}", .k.map(|k| format!(" at type {k}")).unwrap_or_default())]
    Numeric { k: Option<usize>, message: String },
    /// A finite-difference stencil left the set of monotone contests.
    #[error("perturbed contest is not monotone with step {step}; try a smaller step")]
    Step { step: f64 },
}

pub type Result<T, E = ContestError> = std::result::Result<T, E>;

pub(crate) fn arg_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(ContestError::Argument(msg.into()))
}

use std::fmt;

use contestlab_core::ContestError;
use thiserror::Error;

/// Where a config field was defined; `line` is absent for JSON input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Location {
    pub field: String,
    pub line: Option<usize>,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "`{}` (line {line})", self.field),
            None => write!(f, "`{}`", self.field),
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("schema error in {at}: {message}")]
    Schema { at: Location, message: String },
    #[error("validation failed for {at}: {message}")]
    Validation { at: Location, message: String },
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } => 2,
            CliError::Schema { .. } => 3,
            CliError::Validation { .. } => 4,
            CliError::Numeric(_) => 5,
            CliError::Io(_) => 6,
        }
    }

    pub(crate) fn schema(field: &str, line: Option<usize>, message: impl Into<String>) -> Self {
        CliError::Schema { at: Location { field: field.into(), line }, message: message.into() }
    }

    pub(crate) fn validation(field: &str, line: Option<usize>, message: impl Into<String>) -> Self {
        CliError::Validation { at: Location { field: field.into(), line }, message: message.into() }
    }

    /// Attaches a line number to schema and validation errors lacking one.
    pub(crate) fn with_line(self, lookup: impl Fn(&str) -> Option<usize>) -> Self {
        match self {
            CliError::Schema { at: Location { field, line: None }, message } => {
                let line = lookup(&field);
                CliError::Schema { at: Location { field, line }, message }
            }
            CliError::Validation { at: Location { field, line: None }, message } => {
                let line = lookup(&field);
                CliError::Validation { at: Location { field, line }, message }
            }
            other => other,
        }
    }
}

/// Errors raised while dispatching an already validated config.
impl From<ContestError> for CliError {
    fn from(e: ContestError) -> Self {
        match e {
            ContestError::Validation(msg) => CliError::validation("environment", None, msg),
            ContestError::Argument(_) | ContestError::Capability(_) | ContestError::Domain { .. } => {
                CliError::schema("command", None, e.to_string())
            }
            ContestError::Numeric { .. } | ContestError::Step { .. } => CliError::Numeric(e.to_string()),
        }
    }
}

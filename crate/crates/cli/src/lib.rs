//! Config-driven batch runner for contest equilibrium analyses.
//!
//! Exit codes: 0 ok, 2 parse, 3 schema, 4 validation, 5 numeric, 6 I/O.

pub mod config;
pub mod error;
pub mod report;
pub mod run;

pub use config::{load_config, parse_config, RunConfig};
pub use error::CliError;
pub use report::{emit_report, Report};
pub use run::{run, Outcome};

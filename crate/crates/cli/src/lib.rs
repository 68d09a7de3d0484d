//! Command-line front end: scenario configs, subcommands, CSV and SVG output.

pub mod commands;
pub mod config;
pub mod csv;
pub mod svg;

/// Errors tagged with the process exit code they map to.
///
/// 0 success, 1 invalid input (config or flags), 2 runtime simulation or I/O
/// failure, 3 gradient-check failure.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
    #[error("{0}")]
    GradCheck(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
            CliError::GradCheck(_) => 3,
        }
    }
}

impl From<flybs_core::Error> for CliError {
    fn from(e: flybs_core::Error) -> Self {
        if e.is_validation() {
            CliError::Config(e.to_string())
        } else {
            CliError::Runtime(e.to_string())
        }
    }
}

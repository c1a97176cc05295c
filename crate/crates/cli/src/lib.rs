//! Command-line front end for `qdtrap`: simulation, fitting, analytic
//! tables and power-sweep batch runs.
//!
//! Exit codes: 0 success, 2 bad input or configuration, 3 numerical failure.

pub mod cli;
pub mod commands;
pub mod config;
pub mod report;

use thiserror::Error;

pub use cli::Cli;
pub use commands::{execute, run};
pub use config::RunConfig;
pub use report::{parse_report, FitReport};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),

    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<qdtrap::Error> for CliError {
    fn from(e: qdtrap::Error) -> Self {
        match e {
            qdtrap::Error::InvalidConfig(p) => CliError::Config(p),
            e if e.is_input_error() => CliError::Input(e.to_string()),
            e => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

pub(crate) fn write_file(path: &std::path::Path, contents: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("cannot create {}: {e}", dir.display())))?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

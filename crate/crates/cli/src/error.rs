use std::path::Path;

use kesten_core::distributions::DistError;
use kesten_core::empirics::EmpiricsError;
use kesten_core::formats::FormatError;
use kesten_core::process::ProcessError;
use kesten_core::tailstats::TailError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable, malformed or inconsistent input; exit code 2.
    #[error("{0}")]
    Input(String),
    #[error("missing artifact: {0}")]
    MissingArtifact(String),
    /// Fits that fail, regime violations, overflow, collapse; exit code 3.
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::MissingArtifact(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    /// Parse and validation failures in a named file.
    pub fn in_file(path: &Path, e: FormatError) -> Self {
        CliError::Input(format!("{}: {e}", path.display()))
    }
}

impl From<ProcessError> for CliError {
    fn from(e: ProcessError) -> Self {
        match e {
            ProcessError::InvalidConfig(_) | ProcessError::EmptyTail | ProcessError::NonPositiveWealth { .. } => {
                CliError::Input(e.to_string())
            }
            ProcessError::Distribution(DistError::InvalidParameter { .. }) => CliError::Input(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<EmpiricsError> for CliError {
    fn from(e: EmpiricsError) -> Self {
        match e {
            EmpiricsError::FitDidNotConverge(_) | EmpiricsError::AllNonPositive | EmpiricsError::InsufficientPoints { .. } => {
                CliError::Numeric(e.to_string())
            }
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<DistError> for CliError {
    fn from(e: DistError) -> Self {
        match e {
            DistError::InvalidParameter { .. } => CliError::Input(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<TailError> for CliError {
    fn from(e: TailError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Input(format!("json: {e}"))
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

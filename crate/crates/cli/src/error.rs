use std::process::ExitCode;

use hypersew::Error;

/// Failure of a command, carrying its exit status.
#[derive(Debug)]
pub enum CliError {
    /// An identity check exceeded its threshold.
    Check(String),
    Config(String),
    Data(String),
    NonConvergence(String),
    NoContraction(String),
}

impl CliError {
    pub fn config(key: &str, reason: impl std::fmt::Display) -> Self {
        CliError::Config(format!("invalid value for `{key}`: {reason}"))
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Check(_) => 1,
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::NonConvergence(_) => 4,
            CliError::NoContraction(_) => 5,
        })
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Check(m)
            | CliError::Config(m)
            | CliError::Data(m)
            | CliError::NonConvergence(m)
            | CliError::NoContraction(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::NodeMismatch { .. }
            | Error::Io(_)
            | Error::Parse { .. }
            | Error::GridMismatch
            | Error::CovarianceError { .. }
            | Error::EmptySample => CliError::Data(msg),
            Error::NoContraction { .. } | Error::ContractionFailure { .. } => CliError::NoContraction(msg),
            _ => CliError::Config(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

use std::fmt;

use qrws_core::Error;

/// Failures reported by the command-line driver, split by exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad flags, values or config: exit code 2.
    Usage(String),
    /// Anything that went wrong after the inputs were accepted: exit code 1.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Runtime(msg) => write!(f, "error: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        match err {
            Error::CoinDimension { .. }
            | Error::TargetOutOfRange { .. }
            | Error::ZeroIterations
            | Error::InvalidParameter { .. } => CliError::Usage(err.to_string()),
            _ => CliError::Runtime(err.to_string()),
        }
    }
}

pub(crate) fn io_err(path: &std::path::Path, err: impl fmt::Display) -> CliError {
    CliError::Runtime(format!("{}: {err}", path.display()))
}

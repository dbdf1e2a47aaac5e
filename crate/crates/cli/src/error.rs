use std::fmt;
use std::process::ExitCode;

use duopoly_core::Error;

/// Failure classes, each with its own exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable or malformed input, or a market the solvers reject.
    Config(String),
    /// The computation finished but the result did not verify.
    Verification(String),
    /// A solver could not converge or produced an inconsistent result.
    Numeric(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        Self::Config(msg.into())
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            Self::Config(_) => ExitCode::from(2),
            Self::Verification(_) => ExitCode::from(3),
            Self::Numeric(_) => ExitCode::from(4),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config(m) => write!(f, "invalid configuration: {m}"),
            Self::Verification(m) => write!(f, "verification failed: {m}"),
            Self::Numeric(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Numerical(_) | Error::NoHypothesis(_) => Self::Numeric(e.to_string()),
            _ => Self::Config(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

//! Exit-code mapping: 0 success, 1 assertion/property failure, 2 input error.

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Unusable input: parse failures, invariant violations in spec files,
    /// infeasible or out-of-range parameters, I/O trouble. Exit code 2.
    Input(String),
    /// A property or certification the run was asked to establish does not
    /// hold. Exit code 1.
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Failure(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(msg) => write!(f, "input error: {msg}"),
            CliError::Failure(msg) => write!(f, "check failed: {msg}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(format!("i/o: {e}"))
    }
}

impl From<maclab::channels::ChannelError> for CliError {
    fn from(e: maclab::channels::ChannelError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<maclab::regions::RegionError> for CliError {
    fn from(e: maclab::regions::RegionError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<maclab::optimize::SearchError> for CliError {
    fn from(e: maclab::optimize::SearchError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<maclab::feedback::FeedbackError> for CliError {
    fn from(e: maclab::feedback::FeedbackError) -> Self {
        CliError::Input(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

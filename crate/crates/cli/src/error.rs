use std::fmt;

/// Failure of a command, mapped onto the process exit status.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad input, configuration, or I/O. Exit status 1.
    Input(String),
    /// Outputs were written but a solver stopped at its iteration cap.
    /// Exit status 2.
    NonConvergence(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::NonConvergence(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "error: {m}"),
            CliError::NonConvergence(m) => write!(f, "warning: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<hiersparse_core::Error> for CliError {
    fn from(e: hiersparse_core::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub(crate) fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

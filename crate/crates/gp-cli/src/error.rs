//! CLI-level errors mapped onto process exit codes.

use std::fmt;

/// Exit codes: 0 success, 2 configuration error, 3 numerical divergence in
/// single-run mode, 4 I/O error.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Divergence(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Divergence(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    pub fn io(context: &str, err: std::io::Error) -> Self {
        CliError::Io(format!("{context}: {err}"))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Divergence(msg) => write!(f, "numerical divergence: {msg}"),
            CliError::Io(msg) => write!(f, "i/o error: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<gp_core::GpError> for CliError {
    fn from(e: gp_core::GpError) -> Self {
        match e {
            gp_core::GpError::InvalidInput(msg) => CliError::Config(msg),
            other => CliError::Divergence(other.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

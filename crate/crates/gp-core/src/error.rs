//! Error type shared by all solver stages.

use alloc::string::String;
use core::fmt;

/// Everything that can go wrong inside the solver core.
#[derive(Debug, Clone, PartialEq)]
pub enum GpError {
    /// A physical parameter or solver setting violated its domain.
    InvalidInput(String),
    /// A pivot vanished during tridiagonal elimination; carries the row index.
    SingularSystem { row: usize },
    /// A field magnitude crossed the blow-up threshold (or went non-finite)
    /// during real-time propagation.
    BlowUp { tau: f64, grid_index: usize },
    /// The imaginary-time relaxation produced a non-finite field.
    Diverged { iteration: usize },
}

impl fmt::Display for GpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GpError::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            GpError::SingularSystem { row } => {
                write!(f, "singular tridiagonal system: zero pivot at row {row}")
            }
            GpError::BlowUp { tau, grid_index } => write!(
                f,
                "field blew up at tau = {tau} (grid index {grid_index})"
            ),
            GpError::Diverged { iteration } => {
                write!(f, "relaxation diverged at iteration {iteration}")
            }
        }
    }
}

pub type Result<T> = core::result::Result<T, GpError>;

/// Shorthand for the pervasive "name must satisfy condition" checks.
pub(crate) fn invalid(msg: impl fmt::Display) -> GpError {
    GpError::InvalidInput(alloc::format!("{msg}"))
}

use alloc::boxed::Box;
use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Errors surfaced by the sampler core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A matrix expected to be symmetric positive definite failed its
    /// Cholesky factorization; `pivot` is the 0-based index of the
    /// offending diagonal pivot.
    NotPositiveDefinite { pivot: usize },
    /// A matrix expected to be symmetric was not (beyond tolerance).
    NotSymmetric { max_asymmetry: f64 },
    NotSquare { rows: usize, cols: usize },
    DimensionMismatch { expected: usize, got: usize },
    /// A scalar argument was outside its domain.
    InvalidArgument(String),
    /// Dataset construction or validation failure.
    InvalidData(String),
    /// A chain update failed; carries the 1-based iteration index.
    ChainFailure { iteration: usize, source: Box<Error> },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NotPositiveDefinite { pivot } => {
                write!(f, "matrix is not positive definite (pivot {pivot} <= threshold)")
            }
            Error::NotSymmetric { max_asymmetry } => {
                write!(f, "matrix is not symmetric (max |a_ij - a_ji| = {max_asymmetry:e})")
            }
            Error::NotSquare { rows, cols } => {
                write!(f, "matrix is not square ({rows}x{cols})")
            }
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::InvalidData(msg) => write!(f, "invalid data: {msg}"),
            Error::ChainFailure { iteration, source } => {
                write!(f, "chain failed at iteration {iteration}: {source}")
            }
        }
    }
}

impl core::error::Error for Error {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        match self {
            Error::ChainFailure { source, .. } => Some(source.as_ref()),
            _ => None,
        }
    }
}

impl Error {
    pub(crate) fn at_iteration(self, iteration: usize) -> Error {
        Error::ChainFailure { iteration, source: Box::new(self) }
    }
}

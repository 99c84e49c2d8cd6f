//! Error type shared across the crate.

use std::fmt;

#[derive(Debug)]
pub enum Error {
    /// Vector/matrix shapes do not agree for the requested operation.
    DimensionMismatch { expected: usize, got: usize, what: &'static str },
    /// A value that must be finite was NaN or infinite.
    NonFinite { what: &'static str },
    /// Candidate column is numerically inside the span of the current factor.
    DegenerateAtom { index: usize },
    /// Parameter set violates its documented constraints.
    InvalidParams(String),
    /// Malformed input file (problem file, config, PGM).
    Parse(String),
    Io(std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, got, what } => {
                write!(f, "dimension mismatch in {what}: expected {expected}, got {got}")
            }
            Error::NonFinite { what } => write!(f, "non-finite value in {what}"),
            Error::DegenerateAtom { index } => {
                write!(f, "atom {index} is numerically dependent on the selected set")
            }
            Error::InvalidParams(msg) => write!(f, "invalid parameters: {msg}"),
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
            Error::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

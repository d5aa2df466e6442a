//! Error type shared by all modules.

use alloc::string::String;
use core::fmt;

/// Library-level error.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A configuration value is out of range or inconsistent.
    InvalidConfig(String),
    /// An input slice has the wrong length or violates a precondition.
    InvalidInput(String),
    /// A per-bin system was numerically singular; carries the bin index.
    SingularBin { bin: usize, pivot: f64 },
    /// A general square system was numerically singular.
    Singular { row: usize, pivot: f64 },
    /// A factorization hit a non-positive or vanishing pivot.
    NotPositiveDefinite { row: usize, pivot: f64 },
    /// A scalar spectrum bin vanished (chip-rate FFT equalizer).
    SpectralNull { bin: usize },
    /// A dense test-support construction exceeded its size guard.
    SizeGuard { requested: usize, limit: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::SingularBin { bin, pivot } => {
                write!(f, "frequency bin {bin} is numerically singular (pivot {pivot:.3e})")
            }
            Error::Singular { row, pivot } => {
                write!(f, "system is numerically singular at row {row} (pivot {pivot:.3e})")
            }
            Error::NotPositiveDefinite { row, pivot } => {
                write!(f, "factorization failed at row {row}: pivot {pivot:.3e} not positive")
            }
            Error::SpectralNull { bin } => {
                write!(f, "chip spectrum vanished at bin {bin}")
            }
            Error::SizeGuard { requested, limit } => {
                write!(f, "dense construction of {requested} rows exceeds guard of {limit}")
            }
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;

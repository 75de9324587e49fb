use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A scalar argument fell outside its allowed range.
    Domain { what: &'static str, value: f64 },
    /// Vector or matrix sizes do not agree.
    DimensionMismatch { what: &'static str, expected: usize, found: usize },
    /// Matrix handed to a unitary-only routine is not unitary.
    NotUnitary { deviation: f64 },
    /// A transfer function hit a pole.
    Singular { magnitude: f64 },
    /// Numerical routine failed to produce a usable result.
    Numeric(&'static str),
    /// Semantic validation failure (attack specs, thresholds, calibration).
    Invalid(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain { what, value } => write!(f, "{what} out of range: {value}"),
            Error::DimensionMismatch { what, expected, found } => {
                write!(f, "{what}: expected {expected}, found {found}")
            }
            Error::NotUnitary { deviation } => {
                write!(f, "matrix is not unitary: ||U^H U - I||_F = {deviation:e}")
            }
            Error::Singular { magnitude } => {
                write!(f, "transfer function singular: |denominator| = {magnitude:e}")
            }
            Error::Numeric(msg) => write!(f, "numeric failure: {msg}"),
            Error::Invalid(msg) => f.write_str(msg),
        }
    }
}

impl core::error::Error for Error {}

//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates its domain (invalid Hurst exponent, octave, config field, ...).
    #[error("invalid input: {0}")]
    Domain(String),

    /// Matrix/series dimensions do not line up.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A matrix required to be symmetric positive definite is not.
    #[error("matrix is not positive definite (min eigenvalue {min_eig:e}, max {max_eig:e})")]
    NotSpd { min_eig: f64, max_eig: f64 },

    /// A matrix required to be invertible is (numerically) singular.
    #[error("singular matrix: {0}")]
    Singular(String),

    /// The series is too short for the requested wavelet octave.
    #[error("series too short for octave {requested}: maximal feasible octave is {max_feasible}")]
    TooShortForOctave { requested: usize, max_feasible: usize },

    /// An iterative numerical procedure failed to converge.
    #[error("no convergence: {0}")]
    NonConvergence(String),

    /// A numerical result left its valid range (negative variance, log of nonpositive, ...).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// CSV/JSON input could not be parsed.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    /// Process exit code used by the CLI: 2 for validation errors, 3 for numerical ones.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::Dimension(_) | Error::Parse { .. } | Error::Io(_) => 2,
            Error::NotSpd { .. }
            | Error::Singular(_)
            | Error::TooShortForOctave { .. }
            | Error::NonConvergence(_)
            | Error::Numerical(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

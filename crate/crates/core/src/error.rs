use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the model, solver, and I/O layers.
#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the domain of a constitutive function.
    #[error("domain error: {0}")]
    Domain(String),

    /// The quasilinear structure degenerates (e.g. tau = 0 makes A0 singular).
    #[error("structure error: {0}")]
    Structure(String),

    /// Numerical breakdown of an iterative routine.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A configuration value violates an invariant.
    #[error("invalid configuration: {0}")]
    Invalid(String),

    /// Malformed configuration file.
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    /// Non-finite value produced while integrating.
    #[error("non-finite {field} at cell {cell} (step {step}, t = {t})")]
    NonFinite {
        field: &'static str,
        cell: usize,
        step: usize,
        t: f64,
    },

    /// Density left the admissible region.
    #[error("non-positive density {value} at cell {cell} (step {step}, t = {t})")]
    Positivity {
        cell: usize,
        step: usize,
        t: f64,
        value: f64,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures that happen while integrating (CLI exit code 3).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonFinite { .. } | Error::Positivity { .. } | Error::Numeric(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

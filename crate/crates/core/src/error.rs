use thiserror::Error;

/// Errors raised by state construction, channel application and the scenario pipelines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("truncation guard: {0}")]
    Truncation(String),

    #[error("unsupported dilation: {0}")]
    UnsupportedDilation(String),

    #[error("convention error: {0}")]
    Convention(String),

    #[error("undefined posterior: readout {readout} has zero total probability")]
    UndefinedPosterior { readout: usize },
}

impl Error {
    /// True for failures of a numerical guard (truncation, dilation, convention
    /// calibration) as opposed to bad caller input.
    pub fn is_numerical_guard(&self) -> bool {
        matches!(
            self,
            Error::Truncation(_)
                | Error::UnsupportedDilation(_)
                | Error::Convention(_)
                | Error::NotPsd { .. }
                | Error::UndefinedPosterior { .. }
        )
    }

    pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

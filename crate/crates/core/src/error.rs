use thiserror::Error;

/// Errors raised anywhere in the toolkit.
///
/// The variants split into input validation problems and numerical
/// failures; the CLI maps the two groups to different exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("negative rate {value:.6e} on edge {from} -> {to}")]
    NegativeRate { from: usize, to: usize, value: f64 },

    #[error("rate matrix is rank deficient: {0}")]
    RankDeficient(String),

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("unknown level diagram '{0}'")]
    UnknownDiagram(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed data: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures caused by bad input (including unreadable files)
    /// rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_)
                | Error::NotHermitian(_)
                | Error::DimensionMismatch { .. }
                | Error::UnknownDiagram(_)
                | Error::Parse(_)
                | Error::Json(_)
                | Error::Io(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(invalid(format!("{name} must be finite, got {value}")))
    }
}

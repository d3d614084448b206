use thiserror::Error;

use crate::spectral::SpectralField;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {field}: {reason}")]
    Invalid { field: &'static str, reason: String },

    #[error("grid too small: need at least {need} points per axis, got {got}")]
    GridTooSmall { need: usize, got: usize },

    #[error("budget exceeded: {count:.3e} items exceeds the guard {guard:.3e}")]
    Budget { count: f64, guard: f64 },

    #[error("quadrature did not converge: relative disagreement {0:.3e}")]
    Quadrature(f64),

    #[error("classification inconsistency at {tuple}: non-resonant verdict with vanishing resonance function")]
    Classification { tuple: String },

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("non-finite coefficients at t = {t}")]
    NonFinite { t: f64, last_good: Box<SpectralField> },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::Invalid {
        field,
        reason: reason.into(),
    }
}

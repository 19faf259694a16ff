use thiserror::Error;

/// Errors produced by the analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("need ≥{need} {what}, got {got}")]
    NotEnoughPoints {
        need: usize,
        got: usize,
        what: &'static str,
    },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("failed to converge: {0}")]
    NoConvergence(String),

    #[error("failed to bracket a minimum: {0}")]
    NoBracket(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn require_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "{name} must be finite and > 0, got {value}"
        )))
    }
}

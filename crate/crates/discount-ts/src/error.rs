//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by model construction, curve evaluation and simulation.
#[derive(Debug, Clone, Error)]
pub enum ModelError {
    /// Non-finite or otherwise invalid input.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Vector/matrix dimensions do not agree.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Evaluation point outside the supported range.
    #[error("out of range: {0}")]
    OutOfRange(String),

    /// State on or outside the simplex boundary where an inverse is undefined.
    #[error("simplex boundary: {0}")]
    Boundary(String),

    /// Finite-time blow-up of the quadratic-drift dynamics. `time` is the
    /// detected (or estimated critical) blow-up time; `path` identifies the
    /// offending sample path when the explosion occurred in an ensemble.
    #[error("curve explosion at t = {time}")]
    Explosion { time: f64, path: Option<usize> },

    /// Bond price hit zero or went negative; rates are undefined there.
    #[error("degenerate curve: {0}")]
    DegenerateCurve(String),
}

pub type Result<T> = std::result::Result<T, ModelError>;

impl ModelError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        ModelError::InvalidArgument(msg.into())
    }
}

/// Checks that every value in `values` is finite; names the offender otherwise.
pub(crate) fn ensure_finite(name: &str, values: &[f64]) -> Result<()> {
    for (i, v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(ModelError::InvalidArgument(format!(
                "{name}[{i}] is not finite (got {v})"
            )));
        }
    }
    Ok(())
}

/// Checks a single scalar for finiteness.
pub(crate) fn ensure_finite_scalar(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() {
        return Err(ModelError::InvalidArgument(format!(
            "{name} is not finite (got {v})"
        )));
    }
    Ok(())
}

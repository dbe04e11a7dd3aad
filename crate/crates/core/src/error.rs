use thiserror::Error;

/// Errors raised by the pricing engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("time {t} is outside the admissible range [0, {horizon})")]
    TimeOutOfRange { t: f64, horizon: f64 },

    #[error("state is outside the support of the reference law at t = {t}")]
    Singular { t: f64 },

    #[error("terminal value {value} is outside the support of the generating law")]
    OutsideSupport { value: f64 },

    #[error("model violation: {0}")]
    ModelViolation(String),

    #[error("calibration infeasible at t = {t}: {reason}")]
    CalibrationInfeasible { t: f64, reason: String },

    #[error("quadrature did not reach tolerance (estimate {estimate}, error {error})")]
    Quadrature { estimate: f64, error: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("{0} is not available for this model")]
    Unsupported(String),

    #[error("runtime failure: {0}")]
    Runtime(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

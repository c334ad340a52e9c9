use thiserror::Error;

/// Errors raised by the analysis and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NfvError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: String, right: String },

    #[error("exhaustive search limit exceeded: {what} = {value} (limit {limit})")]
    SearchLimitExceeded {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("invalid code construction: {0}")]
    InvalidCode(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("analytic-only decoder model: per-realization decisions are not supported")]
    AnalyticOnlyModel,

    #[error("decoder model `{0}` cannot be enumerated exactly")]
    NotEnumerable(&'static str),

    #[error("unstable queue: utilization {rho:.6} >= 1")]
    UnstableQueue { rho: f64 },

    #[error("scheme `{scheme}` does not match the configured code: {reason}")]
    SchemeMismatch { scheme: String, reason: String },
}

pub type Result<T, E = NfvError> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> NfvError {
    NfvError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

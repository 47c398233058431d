use thiserror::Error;

pub type Result<T, E = DriftError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DriftError {
    /// An argument lies outside the documented parameter domain.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A value lies outside the domain on which a formula is defined.
    #[error("outside domain: {0}")]
    Domain(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// State-space exploration stopped before completion.
    #[error("state space exceeds capacity: reached {reached} states (limit {limit})")]
    Capacity { reached: usize, limit: usize },

    /// Chain structure violates a precondition (e.g. target unreachable).
    #[error("chain structure: {0}")]
    Structure(String),

    #[error("non-monotone transition from {from} to {to}")]
    Monotonicity { from: String, to: String },

    #[error("linear solve did not converge: residual {residual:e}")]
    Convergence { residual: f64 },
}

pub(crate) fn param(msg: impl Into<String>) -> DriftError {
    DriftError::Parameter(msg.into())
}

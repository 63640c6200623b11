use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SwiptError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected} subcarriers, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The energy constraint cannot be met by any admissible allocation.
    #[error("energy constraint of {ebar} uW is infeasible (at most {max_energy} uW reachable)")]
    Infeasible { ebar: f64, max_energy: f64 },
}

pub type Result<T> = std::result::Result<T, SwiptError>;

pub(crate) fn invalid(msg: impl Into<String>) -> SwiptError {
    SwiptError::InvalidParameter(msg.into())
}

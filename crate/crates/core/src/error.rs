use thiserror::Error;

use crate::outage::FeasibilityReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("codebook of {bits} bits exceeds the enumeration bound of {max} bits")]
    Capacity { bits: u32, max: u32 },

    /// The secrecy outage constraint is zero, so no finite number of CDI bits suffices.
    #[error("secrecy outage constraint epsilon = 0 requires unbounded feedback")]
    UnboundedRequirement,

    #[error("infeasible parameters: {0}")]
    Infeasible(Box<FeasibilityReport>),

    #[error("malformed codebook file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}

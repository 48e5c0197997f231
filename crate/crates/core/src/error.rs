use thiserror::Error;

use crate::partition::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("coordinate {value} lies outside the unit interval")]
    OutOfUnitCube { value: f64 },

    #[error("cell level {level} exceeds the maximum depth {max}")]
    DepthExceeded { level: u32, max: u32 },

    #[error("ball {0:?} is not a leaf of the partition")]
    NotALeaf(NodeId),

    #[error("visit count must be at least one")]
    ZeroCount,

    #[error("step {step} outside 1..={horizon}")]
    StepOutOfRange { step: usize, horizon: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

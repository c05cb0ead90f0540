use thiserror::Error;

use crate::scalar::ScalarKind;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PcfError {
    #[error("a PCF needs at least one (time, value) row")]
    Empty,
    #[error("first time point must be 0")]
    NonZeroStart,
    #[error("time points must be strictly increasing (row {row})")]
    NonIncreasingTimes { row: usize },
    #[error("non-finite entry at row {row}")]
    NonFinite { row: usize },
    #[error("operation produced a non-finite value")]
    NonFiniteValue,
    #[error("time must be non-negative and finite")]
    NegativeTime,
    #[error("integration bounds must satisfy 0 <= a < b")]
    InvalidBounds,
    #[error("L_p exponent must be a finite number >= 1")]
    InvalidExponent,
    #[error("integral diverges: the combination is nonzero on the unbounded final piece")]
    DivergentIntegral,
    #[error("cannot mix {left} and {right} PCFs")]
    MixedPrecision { left: ScalarKind, right: ScalarKind },
    #[error("collection is empty")]
    EmptyCollection,
    #[error("need at least {needed} PCFs, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("array extents must be at least 1")]
    ZeroExtent,
    #[error("index {index} out of bounds for extent {extent} in dimension {dim}")]
    OutOfBounds {
        dim: usize,
        index: usize,
        extent: usize,
    },
    #[error("slice step must be positive")]
    InvalidStep,
    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    ShapeMismatch {
        expected: alloc::vec::Vec<usize>,
        got: alloc::vec::Vec<usize>,
    },
    #[error("dimension {dim} out of range for rank {rank}")]
    BadDimension { dim: usize, rank: usize },
    #[error("bad generator shape or parameters")]
    BadShape,
}

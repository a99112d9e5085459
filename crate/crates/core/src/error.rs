use thiserror::Error;

use crate::set_function::ItemSet;

/// Errors raised by the oracles, environment, policies and analysis code.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("set {set} has cardinality {size}, above the defined maximum {max}")]
    CardinalityExceeded { set: ItemSet, size: usize, max: usize },

    #[error("item {item} is outside the ground set [0, {n})")]
    OutOfRange { item: usize, n: usize },

    #[error("ground set of size {n} exceeds the enumeration cap {max}")]
    GroundSetTooLarge { n: usize, max: usize },

    #[error("noise standard deviation must be non-negative, got {0}")]
    NegativeSigma(f64),

    #[error("noise standard deviation must be positive, got {0}")]
    ZeroSigma(f64),

    #[error("greedy stop level {l} exceeds cardinality constraint {k}")]
    InvalidStopLevel { l: usize, k: usize },

    #[error("arm set of {count} super-arms exceeds the memory guard {max}")]
    TooManyArms { count: f64, max: usize },

    #[error("checkpoint {t} is beyond the trajectory length {len}")]
    CheckpointOutOfRange { t: usize, len: usize },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("invalid set function: {0}")]
    InvalidSpec(String),

    #[error("invalid greedy chain: {0}")]
    InvalidChain(String),

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

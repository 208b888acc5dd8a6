//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A vector does not match the length the operator expects for a block.
    #[error("block {index}: expected length {expected}, got {actual}")]
    BlockShape {
        index: usize,
        expected: usize,
        actual: usize,
    },

    /// Block index outside `0..block_count`.
    #[error("block index {index} out of range (operator has {count} blocks)")]
    BlockIndex { index: usize, count: usize },

    /// A data-space vector has the wrong length.
    #[error("data vector has length {actual}, operator expects {expected}")]
    DataShape { expected: usize, actual: usize },

    /// Invalid configuration (step size, stopping rule, partition, ...).
    #[error("configuration: {0}")]
    Config(String),

    /// Non-finite values appeared during an iteration.
    #[error("divergence: non-finite value at step {k}, block {index}")]
    Divergence { k: u64, index: usize },

    /// Noise level requested on data with zero norm.
    #[error("noise level undefined: delta_rel > 0 requires nonzero data")]
    ZeroNormData,

    /// Non-finite values in input data.
    #[error("non-finite entry at position {position}")]
    NonFinite { position: usize },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse: {0}")]
    Parse(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

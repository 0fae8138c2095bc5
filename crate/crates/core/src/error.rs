use thiserror::Error;

use crate::fock::Mode;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// The Fock truncation discards more probability than allowed.
    #[error("insufficient cutoff {cutoff}: truncation discards {discarded:.3e} of the probability mass")]
    InsufficientCutoff { cutoff: usize, discarded: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("mode {0} is not present in the state")]
    MissingMode(Mode),

    #[error("mode {0} appears more than once")]
    DuplicateMode(Mode),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("normalization violated: {0}")]
    Normalization(String),

    #[error("encoding mismatch: {0}")]
    EncodingMismatch(String),

    #[error("projection has zero probability")]
    ZeroProbability,

    #[error("circuit: {0}")]
    Circuit(String),
}

pub type Result<T> = std::result::Result<T, Error>;

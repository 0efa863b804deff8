//! Error type shared by the library.

use thiserror::Error;

/// Failures reported by the library. Usage errors (bad input) are separated
/// from internal inconsistencies so the CLI can map them to exit codes.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("cyclotomic order mismatch: {0} vs {1}")]
    OrderMismatch(u64, u64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("{value} is not coprime to the modulus {modulus}")]
    NotCoprime { value: i64, modulus: u64 },
    #[error("character {0} is not twist-minimal")]
    NotTwistMinimal(String),
    #[error("weight must be at least 2, got {0}")]
    WeightTooSmall(u32),
    #[error("{value} is not a square modulo {modulus}")]
    NoSquareRoot { value: i64, modulus: u64 },
    #[error("{0} is not a negative fundamental discriminant")]
    NotFundamental(i64),
    #[error("{0} is not a negative discriminant")]
    NotDiscriminant(i64),
    #[error("truncation too small: need {needed}, have {available}")]
    Truncation { needed: u64, available: u64 },
    #[error("internal inconsistency: {0}")]
    Internal(String),
    #[error("i/o failure: {0}")]
    Io(String),
}

impl Error {
    /// True for failures caused by the caller's input rather than by the
    /// library itself.
    pub fn is_usage(&self) -> bool {
        !matches!(self, Error::Internal(_) | Error::Io(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

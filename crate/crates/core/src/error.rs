use thiserror::Error;

/// Errors produced by this crate.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// A distribution or model failed its probability or shape checks.
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// A rational literal could not be parsed.
    #[error("cannot parse rational {input:?}: {reason}")]
    ParseRational { input: String, reason: String },

    /// Matrix dimensions do not fit the operation.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A trace sequence (or other input sequence) is shorter than required.
    #[error("sequence too short: need {needed} terms, have {available}")]
    SequenceTooShort { needed: usize, available: usize },

    /// A formal series cannot be inverted.
    #[error("series is not invertible: constant term is zero")]
    NotInvertible,

    /// An index lies outside the available range.
    #[error("index {index} out of range (max {max})")]
    IndexOutOfRange { index: usize, max: usize },

    /// A brute-force routine would exceed its configured work limit.
    #[error("resource guard exceeded: {0}")]
    GuardExceeded(String),

    /// A simulation configuration is unusable.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;

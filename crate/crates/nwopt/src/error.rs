//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by dataset validation, bound evaluation, the net
/// optimizer, and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch for {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("non-finite entry at row {row}, column {col}")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The deviation bound is only valid for epsilon in [0, 1].
    #[error("epsilon {0} outside [0, 1]")]
    EpsilonOutOfRange(f64),

    /// The bandwidth formula needs log(2|X_tau|/delta) > 0.
    #[error("degenerate bound: log argument {0} must exceed 1")]
    DegenerateBound(f64),

    #[error("tau-net would contain {size} points, exceeding the cap of {cap}")]
    NetTooLarge { size: u128, cap: u128 },

    #[error("invalid generator: {0}")]
    InvalidGenerator(String),

    #[error("csv parse error at line {line}: {reason}")]
    CsvParse { line: usize, reason: String },

    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid_parameter(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

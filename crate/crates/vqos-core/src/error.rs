//! Error type shared by every module in the crate.

use thiserror::Error;

/// Unified error for all workbench operations.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A named column is missing or malformed in tabular input.
    #[error("column {0:?} missing or malformed")]
    Column(String),

    /// Input table/matrix schema does not match what a model or
    /// operation was built with.
    #[error("schema mismatch: {0}")]
    Schema(String),

    /// Input is degenerate for the requested statistic (e.g. zero variance).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A series is too short for the requested operation.
    #[error("series too short: need at least {need} samples, got {got}")]
    TooShort { need: usize, got: usize },

    /// Timestamps out of order or otherwise inconsistent.
    #[error("ordering violation: {0}")]
    Ordering(String),

    /// A non-finite value where a finite one is required.
    #[error("non-finite input: {0}")]
    NonFinite(String),

    /// Unknown access-scenario name.
    #[error("unknown scenario {0:?}")]
    UnknownScenario(String),

    /// A required resource (REM, cell-site table, file) is absent.
    #[error("missing resource: {0}")]
    Missing(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Convenience constructor for `InvalidArgument`.
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Convenience constructor for `Degenerate`.
    pub fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }
}

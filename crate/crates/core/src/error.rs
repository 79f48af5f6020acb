use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{field}: {reason}")]
    InvalidSpec { field: &'static str, reason: String },

    #[error("context mismatch: {0}")]
    ContextMismatch(String),

    #[error("element is not invertible")]
    NotInvertible,

    #[error("precision exhausted: {0}")]
    Precision(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("linear forms are not independent over F_p")]
    DependentForms,

    #[error("polynomial division is not exact")]
    InexactDivision,

    #[error("degree cap {cap} exceeded (needed {needed})")]
    DegreeCap { cap: usize, needed: usize },

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("internal check failed: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidSpec {
        field,
        reason: reason.into(),
    }
}

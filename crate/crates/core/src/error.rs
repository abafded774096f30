use thiserror::Error;

/// Errors raised by the simulation engine, estimators and policies.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("budget exhausted: remaining {remaining}, cost {cost}")]
    BudgetExhausted { remaining: f64, cost: f64 },

    #[error("insufficient samples: need {needed}, have {have}")]
    InsufficientSamples { needed: usize, have: usize },

    #[error("feedback not yet resolved: {pending} pulls younger than the window")]
    NotYetResolved { pending: usize },

    #[error("identification failed after spending {spent}: accepted {accepted:?} of {target}")]
    IdentificationFailed {
        accepted: Vec<usize>,
        target: usize,
        spent: f64,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {reason}")]
    Io { path: String, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn io_error(path: &std::path::Path, e: impl std::fmt::Display) -> Error {
    Error::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    }
}

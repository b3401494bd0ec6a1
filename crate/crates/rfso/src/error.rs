//! Crate error type.

use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error in {op}: {msg}")]
    Domain { op: &'static str, msg: String },

    /// A series or iteration failed to converge within its budget.
    #[error("convergence failure in {op}: {msg}")]
    Convergence { op: &'static str, msg: String },

    /// A numeric procedure produced an unusable value (NaN, overflow,
    /// quadrature breakdown).
    #[error("numeric failure in {op}: {msg}")]
    Numeric { op: &'static str, msg: String },

    /// Caller violated an interface contract (dimension mismatch, invalid
    /// configuration field).
    #[error("contract violation in {op}: {msg}")]
    Contract { op: &'static str, msg: String },

    /// The request is outside the regime the method is meant for.
    #[error("unsupported regime in {op}: {msg}")]
    UnsupportedRegime { op: &'static str, msg: String },

    /// Cache or file I/O failed.
    #[error("i/o failure in {op}: {msg}")]
    Io { op: &'static str, msg: String },
}

impl Error {
    pub(crate) fn domain(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain { op, msg: msg.into() }
    }
    pub(crate) fn convergence(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Convergence { op, msg: msg.into() }
    }
    pub(crate) fn numeric(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Numeric { op, msg: msg.into() }
    }
    pub(crate) fn contract(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Contract { op, msg: msg.into() }
    }
    pub(crate) fn unsupported(op: &'static str, msg: impl Into<String>) -> Self {
        Error::UnsupportedRegime { op, msg: msg.into() }
    }
    pub(crate) fn io(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Io { op, msg: msg.into() }
    }
}

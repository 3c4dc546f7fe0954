use thiserror::Error;

/// Errors produced by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument violated the precondition of the operation.
    #[error("{name} = {value}: {reason}")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    /// A value lies outside the range an inverse map can reach.
    #[error("{name} = {value} is outside [{lo}, {hi}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    /// An iterative method failed to meet its tolerance.
    #[error("{method} did not converge: {detail}")]
    NoConvergence {
        method: &'static str,
        detail: String,
    },
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            reason,
        }
    }

    pub(crate) fn no_convergence(method: &'static str, detail: impl Into<String>) -> Self {
        Error::NoConvergence {
            method,
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

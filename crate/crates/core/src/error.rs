use std::io;

use thiserror::Error;

/// Errors raised by the distribution, fitting and diagnostics routines.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter combination admits no valid solution.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// Root finding did not converge within its iteration budget.
    #[error("root finder did not converge after {iterations} iterations (residual {residual:e})")]
    RootNotConverged { iterations: usize, residual: f64 },

    /// Adaptive quadrature could not meet the requested tolerance.
    #[error("quadrature did not converge (estimate {estimate:e}, error bound {error_bound:e})")]
    QuadratureNotConverged { estimate: f64, error_bound: f64 },

    /// A quantity underflowed or overflowed and cannot be reported as a finite number.
    #[error("overflow: {0}")]
    Overflow(String),

    #[error("no interior critical point on [{lower}, {upper}]")]
    NoInteriorCriticalPoint { lower: f64, upper: f64 },

    /// The model specification is malformed (dimensions, rank, responses).
    #[error("specification error: {0}")]
    Specification(String),

    /// Wald inference is not possible at the supplied estimate.
    #[error("inference error: {0}")]
    Inference(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

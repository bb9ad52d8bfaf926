//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A time outside the domain of an initial segment or dense history.
    #[error("time {t} outside domain [{lo}, {hi}]")]
    OutOfDomain { t: f64, lo: f64, hi: f64 },

    /// An argument violated a precondition.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A stepsize violated a solvability or stability constraint.
    #[error("stepsize h = {h} rejected: {reason}")]
    Stepsize { h: f64, reason: String },

    /// The implicit step solver ran out of budget.
    #[error("implicit step at t = {t} did not converge after {iterations} iterations (residual {residual:.3e})")]
    StepSolve {
        t: f64,
        iterations: usize,
        residual: f64,
    },

    /// A trajectory produced a NaN or infinite entry.
    #[error("non-finite state at node {node} (t = {t})")]
    NonFiniteState { node: usize, t: f64 },

    /// A certificate was requested outside its hypotheses.
    #[error("certification error: {0}")]
    Certification(String),

    /// A problem failed validation against its declared coefficient bounds.
    #[error("validation error: {0}")]
    Validation(String),

    /// A failure inside one path of a Monte Carlo ensemble.
    #[error("path {path}: {source}")]
    PathFailure { path: u64, source: Box<Error> },
}

pub type Result<T> = std::result::Result<T, Error>;

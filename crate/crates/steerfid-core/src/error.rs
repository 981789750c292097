//! Error type shared across the crate.

use alloc::string::String;
use core::fmt;

/// Errors reported by layout, state, circuit, solver, and oracle operations.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Matrix or vector dimensions do not match the operation's requirements.
    ShapeMismatch(String),
    /// A layout label was not found, or labels are duplicated/inconsistent.
    BadLayout(String),
    /// A state failed a physicality check (hermiticity, positivity, trace).
    InvalidState(String),
    /// A configuration value is out of its documented range.
    InvalidConfig(String),
    /// A problem exceeds the size guards of the dense solvers.
    TooLarge(String),
    /// The SDP solver did not reach an optimal certificate.
    SolverFailure(String),
    /// Two redundant computations of the same quantity disagree.
    ConsistencyFailure(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ShapeMismatch(msg) => write!(f, "shape mismatch: {msg}"),
            Error::BadLayout(msg) => write!(f, "bad layout: {msg}"),
            Error::InvalidState(msg) => write!(f, "invalid state: {msg}"),
            Error::InvalidConfig(msg) => write!(f, "invalid config: {msg}"),
            Error::TooLarge(msg) => write!(f, "problem too large: {msg}"),
            Error::SolverFailure(msg) => write!(f, "solver failure: {msg}"),
            Error::ConsistencyFailure(msg) => write!(f, "consistency failure: {msg}"),
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;

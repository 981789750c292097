//! Process-level error classification with a fixed exit-code taxonomy.

use std::fmt;

use steerfid_core::Error;

/// A failed run, sorted into the exit-code classes the scripting interface
/// promises: 2 for configuration and input problems, 3 for solver
/// breakdowns, 4 for cross-pipeline consistency violations.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Solver(String),
    Consistency(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Solver(_) => 3,
            Failure::Consistency(_) => 4,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Failure::Config(msg.into())
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(msg) | Failure::Solver(msg) | Failure::Consistency(msg) => {
                write!(f, "{msg}")
            }
        }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        match err {
            Error::SolverFailure(_) => Failure::Solver(err.to_string()),
            Error::ConsistencyFailure(_) => Failure::Consistency(err.to_string()),
            _ => Failure::Config(err.to_string()),
        }
    }
}

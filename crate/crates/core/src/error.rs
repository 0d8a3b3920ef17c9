use thiserror::Error;

use crate::domain::{GraphError, LedgerError, Violation};
use crate::economics::EconomicsError;
use crate::pricing::PricingError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid config: {}", join(.0))]
    InvalidConfig(Vec<Violation>),
    #[error("invalid session {id}: {reason}")]
    InvalidSession { id: u64, reason: String },
    #[error("session {id} starts at slot {start} but slot {previous} was already dispatched")]
    OutOfOrder { id: u64, start: usize, previous: usize },
    #[error("instance too large for exhaustive search: {combinations:.3e} assignments exceed {limit:.0e}")]
    TooLarge { combinations: f64, limit: f64 },
    #[error("reports come from different instances: {0} and {1}")]
    InstanceMismatch(String, String),
    #[error("upper bound {bound} is below the welfare {welfare} of {algorithm}")]
    BoundViolated {
        algorithm: String,
        welfare: f64,
        bound: f64,
    },
    #[error("{0}")]
    Invalid(String),
    #[error("trace {file} row {row}: {message}")]
    Trace { file: String, row: usize, message: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error(transparent)]
    Pricing(#[from] PricingError),
    #[error(transparent)]
    Economics(#[from] EconomicsError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn join(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

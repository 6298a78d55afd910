use thiserror::Error;

use crate::constraints::SourceId;
use crate::rational::Rational;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("constraint set is empty")]
    Empty,

    #[error("deadline of source {source_id} must be a positive integer")]
    InvalidDeadline { source_id: SourceId },

    #[error("source id {0} appears more than once")]
    DuplicateSource(SourceId),

    #[error("deadlines are not harmonic")]
    NotHarmonic,

    #[error("intervals are not consecutively divisible")]
    NotConsecutivelyDivisible,

    #[error("load {0} is not a positive integer")]
    NonIntegralLoad(Rational),

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("source {0} never appears in the schedule")]
    MissingSource(SourceId),

    #[error("state space of {states} states exceeds the budget of {budget}")]
    StateBudgetExceeded { states: u128, budget: u64 },

    #[error("no cyclic schedule with {channels} channel(s) satisfies the constraints")]
    Infeasible { channels: usize },

    #[error("time budget exhausted")]
    TimeBudgetExceeded,

    #[error("schedule too large to materialize: {cells} cells")]
    TooLarge { cells: u128 },

    #[error("internal construction error: {0}")]
    Construction(String),
}

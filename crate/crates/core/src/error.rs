use thiserror::Error;

use crate::problem::Side;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("line {line}: exponents of `{config}` sum to {sum}, expected delta = {delta}")]
    ExponentSum {
        line: usize,
        config: String,
        sum: usize,
        delta: usize,
    },

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("invalid label name `{0}` (expected letters, digits or `_`)")]
    InvalidLabel(String),

    #[error("the {0} constraint is empty")]
    EmptyConstraint(Side),

    #[error("delta must be at least 2, got {0}")]
    DeltaTooSmall(usize),

    #[error("configuration has degree {got}, expected {expected}")]
    DegreeMismatch { expected: usize, got: usize },

    #[error("too many labels: {size} exceeds the limit of {limit}")]
    AlphabetLimit { size: usize, limit: usize },

    #[error("delta {delta} exceeds the configured limit of {limit}")]
    DeltaLimit { delta: usize, limit: usize },

    #[error("expansion exceeds the budget of {0} single configurations")]
    ExpansionBudget(usize),

    #[error("enumeration exceeds the budget of {0} search nodes")]
    EnumerationBudget(u64),

    #[error("unjustified merge on the {side} side: `{to}` is not at least as strong as `{from}`")]
    UnjustifiedMerge { side: Side, from: String, to: String },

    #[error("configuration `{config}` cannot be extended to any target configuration")]
    NotExtendable { config: String },

    #[error("renaming is not injective: {0}")]
    RenamingNotInjective(String),

    #[error("parameter out of range: {0}")]
    Range(String),

    #[error("chain step {step}: {detail}")]
    ChainMismatch { step: usize, detail: String },

    #[error("the problem is 0-round solvable")]
    Solvable,

    #[error("no 0-round witness available")]
    NoWitness,

    #[error("graph generation failed after {0} attempts")]
    Generation(usize),

    #[error("invalid graph: {0}")]
    Graph(String),

    #[error("certificate: {0}")]
    Certificate(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn syntax(line: usize, message: impl Into<String>) -> Self {
        Error::Syntax {
            line,
            message: message.into(),
        }
    }

    /// True for errors caused by a resource guard rather than by the input.
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            Error::ExpansionBudget(_)
                | Error::EnumerationBudget(_)
                | Error::AlphabetLimit { .. }
                | Error::DeltaLimit { .. }
        )
    }
}

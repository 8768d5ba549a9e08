use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at {line}:{col}: {message}")]
    Parse {
        line: usize,
        col: usize,
        message: String,
    },

    /// An operator could not produce a well-formed result (subjective-logic
    /// sum/product/division constraint violations, base-rate degeneracies).
    #[error("undefined {op} result: {reason}")]
    Undefined { op: &'static str, reason: String },

    #[error("invalid value: {0}")]
    Invalid(String),

    #[error("evidence has probability zero")]
    ZeroEvidence,

    #[error("evidence mass vanishes")]
    EvidenceMassVanishes,

    #[error("{facts} enumerable facts exceed the budget of {budget}; reduce the program or raise --budget")]
    BudgetExceeded { facts: usize, budget: usize },

    #[error("unbounded variable {var} in a clause but the program declares no constants")]
    UnboundedVariable { var: String },

    #[error("clause head {0} unifies with an algebraic fact")]
    HeadIsFact(String),

    #[error("negation on {0}, which is not an algebraic fact")]
    NegationOnNonFact(String),

    #[error("duplicate label for fact {0}")]
    DuplicateFact(String),

    #[error("invalid network: {0}")]
    Network(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

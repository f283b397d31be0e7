use thiserror::Error;

use crate::subset::AgentSubset;
use crate::Rational;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("ground size mismatch: expected {expected}, found {found}")]
    GroundMismatch { expected: usize, found: usize },

    #[error("subset {subset} has members outside the ground set of size {m}")]
    SubsetOutOfRange { subset: AgentSubset, m: usize },

    #[error("ground size {m} exceeds the limit of {limit}; {hint}")]
    GroundTooLarge { m: usize, limit: usize, hint: &'static str },

    #[error("argmax over an empty candidate collection")]
    EmptyCandidates,

    #[error("agent {agent} has nonpositive size {size}")]
    NonPositiveSize { agent: usize, size: Rational },

    #[error("agent {agent} has size {size} exceeding the capacity {capacity}")]
    SizeExceedsCapacity { agent: usize, size: Rational, capacity: Rational },

    #[error("invalid score entry ({row}, {col}): {reason}")]
    InvalidScore { row: usize, col: usize, reason: String },

    #[error("invalid score row for agent {agent}: {reason}")]
    InvalidRow { agent: usize, reason: String },

    #[error("graph is not simple: {0}")]
    NotSimple(String),

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("operation requires a {expected} system, got {found}")]
    WrongKind { expected: &'static str, found: &'static str },

    #[error("score matrix is {sparsity}-sparse but the mechanism requires at most {d}")]
    SparsityExceeded { sparsity: usize, d: usize },

    #[error("score matrix must be binary")]
    NotBinary,

    #[error("s_max precondition violated: {0}")]
    SmaxViolation(String),

    #[error("marginals violate the rank condition on {witness}: sum {sum} > rank {rank}")]
    RankViolation { witness: AgentSubset, sum: Rational, rank: usize },

    #[error("unsupported marginal value {value} for agent {agent}; only 0 and 1/2 are decomposable")]
    UnsupportedMarginal { agent: usize, value: Rational },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("exact enumeration infeasible: {realizations} realizations exceed the budget of {budget}; use Monte Carlo mode")]
    BudgetExceeded { realizations: u128, budget: u128 },

    #[error("optimum score is zero; ratio undefined")]
    ZeroOptimum,

    #[error("deviation leaves the instance class: {0}")]
    ClassViolation(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("parse error: {0}")]
    Parse(String),
}

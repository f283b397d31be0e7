//! Impartial selection of agent subsets under combinatorial constraints.
//!
//! Agents vote for each other through a [`ScoreMatrix`]; a mechanism picks an
//! independent set of an [`IndependenceSystem`] (knapsack, matroid, ...) such
//! that no agent can change its own selection probability through its votes.
//! Everything is computed in exact rational arithmetic so impartiality and
//! approximation guarantees can be checked by equality.

pub mod cli;
pub mod engine;
pub mod error;
pub mod matroid;
pub mod mechanisms;
pub mod order;
pub mod scores;
pub mod subset;
pub mod systems;
pub mod verify;

pub use error::{Error, Result};
pub use matroid::{MarginalVector, SelectionDistribution};
pub use scores::ScoreMatrix;
pub use subset::{AgentId, AgentSubset};
pub use systems::{Instance, IndependenceSystem};

/// Exact rational number used for all scores, sizes and probabilities.
pub type Rational = num_rational::Ratio<i128>;

/// Shorthand for `Rational::new(n, d)`.
pub fn rat(n: i128, d: i128) -> Rational {
    Rational::new(n, d)
}

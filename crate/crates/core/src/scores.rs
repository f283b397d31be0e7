//! Score matrices.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::subset::{AgentSubset, MAX_AGENTS};
use crate::Rational;

/// Nonnegative `m x m` matrix with zero diagonal; entry `(i, j)` is the score
/// agent `i` assigns to agent `j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ScoreMatrix {
    m: usize,
    entries: Vec<Rational>,
}

impl ScoreMatrix {
    pub fn zeros(m: usize) -> Self {
        assert!(m <= MAX_AGENTS, "ground size {m} exceeds {MAX_AGENTS}");
        ScoreMatrix { m, entries: vec![Rational::zero(); m * m] }
    }

    /// Build from `(voter, target, score)` triplets. Repeated pairs are rejected.
    pub fn from_triplets<I>(m: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, Rational)>,
    {
        let mut w = Self::zeros(m);
        let mut seen = vec![false; m * m];
        for (i, j, v) in triplets {
            if i < m && j < m {
                if seen[i * m + j] {
                    return Err(Error::InvalidScore { row: i, col: j, reason: "duplicate entry".into() });
                }
                seen[i * m + j] = true;
            }
            w.set(i, j, v)?;
        }
        Ok(w)
    }

    /// Build from integer triplets.
    pub fn from_int_triplets(m: usize, triplets: &[(usize, usize, i64)]) -> Result<Self> {
        Self::from_triplets(m, triplets.iter().map(|&(i, j, v)| (i, j, Rational::from_integer(v as i128))))
    }

    pub fn size(&self) -> usize {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> Rational {
        self.entries[i * self.m + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) -> Result<()> {
        if i >= self.m || j >= self.m {
            return Err(Error::InvalidScore { row: i, col: j, reason: format!("index out of range for m = {}", self.m) });
        }
        if v < Rational::zero() {
            return Err(Error::InvalidScore { row: i, col: j, reason: format!("negative score {v}") });
        }
        if i == j && !v.is_zero() {
            return Err(Error::InvalidScore { row: i, col: j, reason: "nonzero diagonal entry".into() });
        }
        self.entries[i * self.m + j] = v;
        Ok(())
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.entries[i * self.m..(i + 1) * self.m]
    }

    /// Replace agent `i`'s row, validating it.
    pub fn with_row(&self, i: usize, row: &[Rational]) -> Result<Self> {
        validate_row(self.m, i, row)?;
        let mut w = self.clone();
        w.entries[i * self.m..(i + 1) * self.m].copy_from_slice(row);
        Ok(w)
    }

    /// The matrix with agent `i`'s row replaced by zeros.
    pub fn without_votes_of(&self, i: usize) -> Self {
        let mut w = self.clone();
        for v in &mut w.entries[i * self.m..(i + 1) * self.m] {
            *v = Rational::zero();
        }
        w
    }

    /// Targets receiving a positive score from `i`.
    pub fn targets_of(&self, i: usize) -> AgentSubset {
        self.row(i).iter().enumerate().filter(|(_, v)| **v > Rational::zero()).map(|(j, _)| j).collect()
    }

    /// Maximum number of positive entries in a row.
    pub fn sparsity(&self) -> usize {
        (0..self.m).map(|i| self.targets_of(i).len()).max().unwrap_or(0)
    }

    pub fn is_binary(&self) -> bool {
        self.entries.iter().all(|v| v.is_zero() || v.is_one())
    }

    /// Total score of `targets` from `voters`.
    pub fn score_from(&self, voters: AgentSubset, targets: AgentSubset) -> Rational {
        let mut total = Rational::zero();
        for i in voters {
            let row = self.row(i);
            for j in targets {
                total += row[j];
            }
        }
        total
    }

    /// Score received by `j` from `voters`.
    pub fn received_from(&self, voters: AgentSubset, j: usize) -> Rational {
        voters.iter().map(|i| self.get(i, j)).sum()
    }

    /// Score received by `j` from all agents.
    pub fn total(&self, j: usize) -> Rational {
        (0..self.m).map(|i| self.get(i, j)).sum()
    }

    /// Column totals: the score each agent receives from everyone.
    pub fn totals(&self) -> Vec<Rational> {
        (0..self.m).map(|j| self.total(j)).collect()
    }

    /// Column totals ignoring the votes of `i`.
    pub fn totals_without(&self, i: usize) -> Vec<Rational> {
        let mut t = self.totals();
        for (j, v) in self.row(i).iter().enumerate() {
            t[j] -= *v;
        }
        t
    }

    /// Total score of a set from all agents.
    pub fn set_score(&self, targets: AgentSubset) -> Rational {
        self.score_from(AgentSubset::full(self.m), targets)
    }

    /// Nonzero entries in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, Rational)> + '_ {
        (0..self.m).flat_map(move |i| {
            (0..self.m).filter_map(move |j| {
                let v = self.get(i, j);
                (!v.is_zero()).then_some((i, j, v))
            })
        })
    }
}

/// Check that `row` is a valid row for agent `i`: length `m`, nonnegative, zero self-entry.
pub fn validate_row(m: usize, i: usize, row: &[Rational]) -> Result<()> {
    if row.len() != m {
        return Err(Error::InvalidRow { agent: i, reason: format!("length {} != {m}", row.len()) });
    }
    if let Some((j, v)) = row.iter().enumerate().find(|(_, v)| **v < Rational::zero()) {
        return Err(Error::InvalidRow { agent: i, reason: format!("negative entry {v} at column {j}") });
    }
    if !row[i].is_zero() {
        return Err(Error::InvalidRow { agent: i, reason: "nonzero self-score".into() });
    }
    Ok(())
}

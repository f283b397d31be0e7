//! Agents and sets of agents.
//!
//! Agents are indexed `0..m`; index 0 is the first element of the ground
//! set's total order. Sets are bitmasks, with bit `i` standing for agent `i`.
//! The [`Ord`] implementation of [`AgentSubset`] is the lexicographic order on
//! indicator bitstrings read from agent 0 upwards, so a set containing agent 0
//! is greater than every set that does not.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// Largest ground size representable by an [`AgentSubset`].
pub const MAX_AGENTS: usize = 64;

/// Largest ground size for drivers that enumerate all subsets.
pub const ENUMERATION_LIMIT: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AgentId(pub usize);

impl AgentId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl From<usize> for AgentId {
    fn from(i: usize) -> Self {
        AgentId(i)
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct AgentSubset(u64);

impl AgentSubset {
    pub const EMPTY: AgentSubset = AgentSubset(0);

    pub fn from_bits(bits: u64) -> Self {
        AgentSubset(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    /// The whole ground set `{0, .., m-1}`.
    pub fn full(m: usize) -> Self {
        assert!(m <= MAX_AGENTS, "ground size {m} exceeds {MAX_AGENTS}");
        if m == MAX_AGENTS {
            AgentSubset(u64::MAX)
        } else {
            AgentSubset((1u64 << m) - 1)
        }
    }

    pub fn singleton(i: usize) -> Self {
        assert!(i < MAX_AGENTS);
        AgentSubset(1u64 << i)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(it: I) -> Self {
        it.into_iter().fold(Self::EMPTY, |s, i| s.with(i))
    }

    pub fn contains(self, i: usize) -> bool {
        i < MAX_AGENTS && self.0 >> i & 1 == 1
    }

    pub fn with(self, i: usize) -> Self {
        AgentSubset(self.0 | Self::singleton(i).0)
    }

    pub fn without(self, i: usize) -> Self {
        AgentSubset(self.0 & !Self::singleton(i).0)
    }

    pub fn insert(&mut self, i: usize) {
        *self = self.with(i);
    }

    pub fn remove(&mut self, i: usize) {
        *self = self.without(i);
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: Self) -> Self {
        AgentSubset(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        AgentSubset(self.0 & other.0)
    }

    pub fn difference(self, other: Self) -> Self {
        AgentSubset(self.0 & !other.0)
    }

    pub fn is_subset_of(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    /// Whether every member is below `m`.
    pub fn fits(self, m: usize) -> bool {
        self.is_subset_of(Self::full(m))
    }

    /// Largest member plus one, or 0 for the empty set.
    pub fn span_len(self) -> usize {
        64 - self.0.leading_zeros() as usize
    }

    pub fn iter(self) -> Members {
        Members(self.0)
    }

    /// All subsets of `self`, in increasing bit-value order, starting with the empty set.
    pub fn subsets(self) -> Subsets {
        Subsets { mask: self.0, next: Some(0) }
    }

    /// All subsets of `{0, .., m-1}`.
    pub fn all(m: usize) -> Subsets {
        Self::full(m).subsets()
    }

    /// Lexicographic comparison of indicator bitstrings, coordinate 0 first.
    pub fn lex_cmp(self, other: Self) -> Ordering {
        let diff = self.0 ^ other.0;
        if diff == 0 {
            return Ordering::Equal;
        }
        let first = diff.trailing_zeros();
        if self.0 >> first & 1 == 1 {
            Ordering::Greater
        } else {
            Ordering::Less
        }
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl PartialOrd for AgentSubset {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for AgentSubset {
    fn cmp(&self, other: &Self) -> Ordering {
        self.lex_cmp(*other)
    }
}

impl fmt::Display for AgentSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

impl FromIterator<usize> for AgentSubset {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Self::from_indices(iter)
    }
}

impl IntoIterator for AgentSubset {
    type Item = usize;
    type IntoIter = Members;
    fn into_iter(self) -> Members {
        self.iter()
    }
}

/// Members of a set in increasing index order.
#[derive(Debug, Clone)]
pub struct Members(u64);

impl Iterator for Members {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Members {}

/// Submask enumeration.
#[derive(Debug, Clone)]
pub struct Subsets {
    mask: u64,
    next: Option<u64>,
}

impl Iterator for Subsets {
    type Item = AgentSubset;

    fn next(&mut self) -> Option<AgentSubset> {
        let cur = self.next?;
        // next submask in increasing numeric order
        let succ = (cur | !self.mask).wrapping_add(1) & self.mask;
        self.next = if succ == 0 { None } else { Some(succ) };
        Some(AgentSubset(cur))
    }
}

/// Compare two sets under the lexicographic order on a ground set of size `m`.
///
/// Fails when either set has a member outside `{0, .., m-1}`.
pub fn lex_set_compare(m: usize, s: AgentSubset, t: AgentSubset) -> Result<Ordering> {
    for x in [s, t] {
        if m > MAX_AGENTS || !x.fits(m) {
            return Err(Error::SubsetOutOfRange { subset: x, m });
        }
    }
    Ok(s.lex_cmp(t))
}

/// Guard for drivers that enumerate all `2^m` subsets.
pub fn ensure_enumerable(m: usize, hint: &'static str) -> Result<()> {
    if m > ENUMERATION_LIMIT {
        Err(Error::GroundTooLarge { m, limit: ENUMERATION_LIMIT, hint })
    } else {
        Ok(())
    }
}

//! Marginals, lotteries over sets, and matroid algorithms: span, greedy
//! maximum-weight basis, and splitting a set into two independent sets.

use std::collections::{BTreeMap, VecDeque};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::order::weight_order;
use crate::scores::ScoreMatrix;
use crate::subset::AgentSubset;
use crate::systems::IndependenceSystem;
use crate::Rational;

/// Per-agent selection probabilities.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MarginalVector(Vec<Rational>);

impl MarginalVector {
    pub fn new(p: Vec<Rational>) -> Result<Self> {
        if let Some((i, v)) = p.iter().enumerate().find(|(_, v)| **v < Rational::zero() || **v > Rational::one()) {
            return Err(Error::InvalidDistribution(format!("marginal {v} of agent {i} outside [0, 1]")));
        }
        Ok(MarginalVector(p))
    }

    pub fn get(&self, i: usize) -> Rational {
        self.0[i]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Rational] {
        &self.0
    }

    /// Total marginal mass of the agents in `s`.
    pub fn sum_over(&self, s: AgentSubset) -> Rational {
        s.iter().filter(|&i| i < self.0.len()).map(|i| self.0[i]).sum()
    }
}

/// A lottery over agent subsets with exact probabilities summing to one.
///
/// Support sets are kept merged and sorted by the set order, greatest first,
/// so equal distributions compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SelectionDistribution {
    support: Vec<(AgentSubset, Rational)>,
}

impl SelectionDistribution {
    /// Merge repeated sets, drop zero-probability entries, and check the total mass.
    pub fn new<I: IntoIterator<Item = (AgentSubset, Rational)>>(entries: I) -> Result<Self> {
        let mut merged: BTreeMap<AgentSubset, Rational> = BTreeMap::new();
        for (s, p) in entries {
            if p < Rational::zero() {
                return Err(Error::InvalidDistribution(format!("negative probability {p} on {s}")));
            }
            *merged.entry(s).or_insert_with(Rational::zero) += p;
        }
        let total: Rational = merged.values().sum();
        if !total.is_one() {
            return Err(Error::InvalidDistribution(format!("probabilities sum to {total}, not 1")));
        }
        let support = merged.into_iter().rev().filter(|(_, p)| !p.is_zero()).collect();
        Ok(SelectionDistribution { support })
    }

    pub fn point_mass(s: AgentSubset) -> Self {
        SelectionDistribution { support: vec![(s, Rational::one())] }
    }

    /// The empirical distribution of `counts`, each realization weighted equally.
    pub fn from_counts<I: IntoIterator<Item = (AgentSubset, u64)>>(counts: I) -> Result<Self> {
        let counts: Vec<_> = counts.into_iter().collect();
        let total: u128 = counts.iter().map(|(_, c)| *c as u128).sum();
        if total == 0 {
            return Err(Error::InvalidDistribution("no realizations".into()));
        }
        Self::new(counts.into_iter().map(|(s, c)| (s, Rational::new(c as i128, total as i128))))
    }

    pub fn support(&self) -> &[(AgentSubset, Rational)] {
        &self.support
    }

    pub fn probability(&self, s: AgentSubset) -> Rational {
        self.support.iter().find(|(t, _)| *t == s).map(|(_, p)| *p).unwrap_or_else(Rational::zero)
    }

    /// Probability that agent `i` is selected.
    pub fn marginal(&self, i: usize) -> Rational {
        self.support.iter().filter(|(s, _)| s.contains(i)).map(|(_, p)| *p).sum()
    }

    pub fn marginals(&self, m: usize) -> MarginalVector {
        MarginalVector((0..m).map(|i| self.marginal(i)).collect())
    }

    /// Expected total score of the selected set.
    pub fn expected_score(&self, w: &ScoreMatrix) -> Rational {
        self.support.iter().map(|(s, p)| *p * w.set_score(*s)).sum()
    }

    /// First support set that is dependent in `system`, if any.
    pub fn dependent_support_set(&self, system: &IndependenceSystem) -> Option<AgentSubset> {
        self.support.iter().map(|(s, _)| *s).find(|s| !system.is_independent(*s))
    }
}

pub(crate) fn require_matroid(system: &IndependenceSystem) -> Result<()> {
    if system.is_matroid() {
        Ok(())
    } else {
        Err(Error::WrongKind { expected: "matroid", found: system.kind_name() })
    }
}

/// Elements whose addition to `s` leaves the rank unchanged.
pub fn span(system: &IndependenceSystem, s: AgentSubset) -> Result<AgentSubset> {
    require_matroid(system)?;
    let r = system.rank(s);
    Ok((0..system.ground_size()).filter(|&e| system.rank(s.with(e)) == r).collect())
}

/// Maximum-weight basis by the greedy algorithm.
///
/// Elements are scanned by decreasing weight, equal weights lower index
/// first; an element is kept unless it lies in the span of those kept so far.
pub fn greedy_basis(system: &IndependenceSystem, weights: &[Rational]) -> Result<AgentSubset> {
    require_matroid(system)?;
    if weights.len() != system.ground_size() {
        return Err(Error::GroundMismatch { expected: system.ground_size(), found: weights.len() });
    }
    if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| **w < Rational::zero()) {
        return Err(Error::InvalidParam(format!("negative weight {w} for agent {i}")));
    }
    let mut basis = AgentSubset::EMPTY;
    for e in weight_order(weights) {
        if system.is_independent(basis.with(e)) {
            basis.insert(e);
        }
    }
    Ok(basis)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwoPartition {
    Split(AgentSubset, AgentSubset),
    /// `witness` has more than twice its rank many elements.
    Infeasible { witness: AgentSubset },
}

/// Split `s` into two disjoint independent sets, or exhibit a subset `T` with
/// `|T| > 2 r(T)` showing none exists.
///
/// Elements are inserted one at a time along shortest exchange paths
/// (matroid partitioning). An edge `y -> z` means `y` may enter the set
/// holding `z` if `z` leaves it.
pub fn two_partition(system: &IndependenceSystem, s: AgentSubset) -> Result<TwoPartition> {
    require_matroid(system)?;
    if !s.fits(system.ground_size()) {
        return Err(Error::SubsetOutOfRange { subset: s, m: system.ground_size() });
    }
    let mut parts = [AgentSubset::EMPTY; 2];
    for x in s.iter() {
        let mut label: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
        let mut reached = AgentSubset::singleton(x);
        let mut queue = VecDeque::from([x]);
        let mut sink = None;
        'search: while let Some(y) = queue.pop_front() {
            for (j, part) in parts.iter().enumerate() {
                if part.contains(y) {
                    continue;
                }
                if system.is_independent(part.with(y)) {
                    sink = Some((y, j));
                    break 'search;
                }
                for z in part.difference(reached).iter() {
                    if system.is_independent(part.without(z).with(y)) {
                        label.insert(z, (y, j));
                        reached.insert(z);
                        queue.push_back(z);
                    }
                }
            }
        }
        let Some((mut y, j)) = sink else {
            if reached.len() <= 2 * system.rank(reached) {
                return Err(Error::Invariant(format!("augmentation failed but {reached} is not a rank witness")));
            }
            return Ok(TwoPartition::Infeasible { witness: reached });
        };
        parts[j].insert(y);
        while let Some(&(prev, k)) = label.get(&y) {
            parts[k] = parts[k].without(y).with(prev);
            y = prev;
        }
        if !(system.is_independent(parts[0]) && system.is_independent(parts[1])) {
            return Err(Error::Invariant(format!("exchange path produced a dependent part inserting {x}")));
        }
    }
    Ok(TwoPartition::Split(parts[0], parts[1]))
}

/// Lottery over independent sets whose marginals equal `p`, for `p` valued in `{0, 1/2}`.
///
/// The support of `p` is split into two independent sets, each drawn with
/// probability one half.
pub fn decompose_marginals(system: &IndependenceSystem, p: &MarginalVector) -> Result<SelectionDistribution> {
    require_matroid(system)?;
    if p.len() != system.ground_size() {
        return Err(Error::GroundMismatch { expected: system.ground_size(), found: p.len() });
    }
    let half = Rational::new(1, 2);
    let mut support = AgentSubset::EMPTY;
    for (i, &v) in p.as_slice().iter().enumerate() {
        if v == half {
            support.insert(i);
        } else if !v.is_zero() {
            return Err(Error::UnsupportedMarginal { agent: i, value: v });
        }
    }
    if support.is_empty() {
        return Ok(SelectionDistribution::point_mass(AgentSubset::EMPTY));
    }
    match two_partition(system, support)? {
        TwoPartition::Split(a, b) => SelectionDistribution::new([(a, half), (b, half)]),
        TwoPartition::Infeasible { witness } => Err(Error::RankViolation {
            witness,
            sum: p.sum_over(witness),
            rank: system.rank(witness),
        }),
    }
}

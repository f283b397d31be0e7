//! Score-induced total orders and the greedy (density) order.
//!
//! Sets are ranked first by score and then by the lexicographic order of
//! [`AgentSubset`]. On singletons this means equal scores rank the lower index
//! higher.

use std::cmp::Ordering;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scores::ScoreMatrix;
use crate::subset::{AgentId, AgentSubset};
use crate::Rational;

/// Compare `(score, set)` pairs: score first, then the set order.
pub fn scored_cmp(a: (Rational, AgentSubset), b: (Rational, AgentSubset)) -> Ordering {
    a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1))
}

/// The candidate ranked highest by `phi`, ties going to the greater set.
pub fn scored_argmax<I, F>(candidates: I, mut phi: F) -> Result<AgentSubset>
where
    I: IntoIterator<Item = AgentSubset>,
    F: FnMut(AgentSubset) -> Rational,
{
    candidates
        .into_iter()
        .map(|s| (phi(s), s))
        .max_by(|a, b| scored_cmp(*a, *b))
        .map(|(_, s)| s)
        .ok_or(Error::EmptyCandidates)
}

/// The candidate ranked lowest by `phi`, ties going to the lesser set.
pub fn scored_argmin<I, F>(candidates: I, mut phi: F) -> Result<AgentSubset>
where
    I: IntoIterator<Item = AgentSubset>,
    F: FnMut(AgentSubset) -> Rational,
{
    candidates
        .into_iter()
        .map(|s| (phi(s), s))
        .min_by(|a, b| scored_cmp(*a, *b))
        .map(|(_, s)| s)
        .ok_or(Error::EmptyCandidates)
}

/// Order agents by decreasing `weights`, equal weights by increasing index.
pub fn weight_order(weights: &[Rational]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..weights.len()).collect();
    idx.sort_by(|&a, &b| weights[b].cmp(&weights[a]).then(a.cmp(&b)));
    idx
}

fn check_sizes(sizes: &[Rational]) -> Result<()> {
    match sizes.iter().enumerate().find(|(_, s)| **s <= Rational::zero()) {
        Some((agent, s)) => Err(Error::NonPositiveSize { agent, size: *s }),
        None => Ok(()),
    }
}

/// Score density `sigma(i) / s_i`.
pub fn density(w: &ScoreMatrix, sizes: &[Rational], i: AgentId) -> Result<Rational> {
    let s = sizes[i.0];
    if s <= Rational::zero() {
        return Err(Error::NonPositiveSize { agent: i.0, size: s });
    }
    Ok(w.total(i.0) / s)
}

/// Greedy order from precomputed score totals.
pub fn greedy_order_from_totals(totals: &[Rational], sizes: &[Rational]) -> Result<Vec<usize>> {
    if totals.len() != sizes.len() {
        return Err(Error::GroundMismatch { expected: sizes.len(), found: totals.len() });
    }
    check_sizes(sizes)?;
    let dens: Vec<Rational> = totals.iter().zip(sizes).map(|(t, s)| t / s).collect();
    Ok(weight_order(&dens))
}

/// Agents sorted by decreasing density; equal densities by increasing index.
pub fn greedy_order(w: &ScoreMatrix, sizes: &[Rational]) -> Result<Vec<AgentId>> {
    if w.size() != sizes.len() {
        return Err(Error::GroundMismatch { expected: w.size(), found: sizes.len() });
    }
    Ok(greedy_order_from_totals(&w.totals(), sizes)?.into_iter().map(AgentId).collect())
}

//! Independence systems and optimum oracles.
//!
//! An [`IndependenceSystem`] answers independence and rank queries for
//! subsets of its ground set. Matroid kinds (uniform, partition, graphic)
//! admit greedy optimisation; knapsack and explicit systems are solved
//! exactly by dynamic programming or enumeration.

use std::collections::HashSet;

use itertools::Itertools;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::order::{scored_cmp, weight_order};
use crate::scores::ScoreMatrix;
use crate::subset::{ensure_enumerable, AgentSubset, MAX_AGENTS};
use crate::Rational;

/// Largest scaled capacity for which the knapsack dynamic program is used.
const KNAPSACK_DP_LIMIT: u128 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniformMatroid {
    pub m: usize,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionMatroid {
    m: usize,
    blocks: Vec<AgentSubset>,
    capacities: Vec<usize>,
}

impl PartitionMatroid {
    pub fn new(m: usize, blocks: Vec<AgentSubset>, capacities: Vec<usize>) -> Result<Self> {
        if blocks.len() != capacities.len() {
            return Err(Error::InvalidSystem(format!(
                "{} blocks but {} capacities",
                blocks.len(),
                capacities.len()
            )));
        }
        let mut seen = AgentSubset::EMPTY;
        for b in &blocks {
            if !b.intersection(seen).is_empty() {
                return Err(Error::InvalidSystem(format!("block {b} overlaps an earlier block")));
            }
            seen = seen.union(*b);
        }
        if seen != AgentSubset::full(m) {
            return Err(Error::InvalidSystem(format!("blocks cover {seen}, not the ground set of size {m}")));
        }
        Ok(PartitionMatroid { m, blocks, capacities })
    }

    pub fn blocks(&self) -> &[AgentSubset] {
        &self.blocks
    }

    pub fn capacities(&self) -> &[usize] {
        &self.capacities
    }
}

/// Edges of a multigraph; agent `i` is edge `edges[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphicMatroid {
    vertices: usize,
    edges: Vec<(usize, usize)>,
    simple: bool,
}

impl GraphicMatroid {
    /// With `simple` set, loops and parallel edges are rejected.
    pub fn new(vertices: usize, edges: Vec<(usize, usize)>, simple: bool) -> Result<Self> {
        if edges.len() > MAX_AGENTS {
            return Err(Error::InvalidSystem(format!("{} edges exceed {MAX_AGENTS}", edges.len())));
        }
        let mut pairs = HashSet::new();
        for (i, &(u, v)) in edges.iter().enumerate() {
            if u >= vertices || v >= vertices {
                return Err(Error::InvalidSystem(format!("edge {i} = ({u}, {v}) has an endpoint >= {vertices}")));
            }
            if simple {
                if u == v {
                    return Err(Error::NotSimple(format!("edge {i} is a loop at vertex {u}")));
                }
                if !pairs.insert((u.min(v), u.max(v))) {
                    return Err(Error::NotSimple(format!("edge {i} = ({u}, {v}) is parallel to an earlier edge")));
                }
            }
        }
        Ok(GraphicMatroid { vertices, edges, simple })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn is_simple(&self) -> bool {
        self.simple
    }

    /// Edges incident to vertex `v`.
    pub fn incident(&self, v: usize) -> AgentSubset {
        self.edges.iter().enumerate().filter(|(_, &(a, b))| a == v || b == v).map(|(i, _)| i).collect()
    }

    /// Number of edges of `s` that join distinct components (the rank of `s`).
    fn forest_rank(&self, s: AgentSubset) -> usize {
        let mut dsu = Dsu::new(self.vertices);
        s.iter().filter(|&e| dsu.union(self.edges[e].0, self.edges[e].1)).count()
    }

    fn is_forest(&self, s: AgentSubset) -> bool {
        let mut dsu = Dsu::new(self.vertices);
        s.iter().all(|e| dsu.union(self.edges[e].0, self.edges[e].1))
    }
}

struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false if `a` and `b` were already connected.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnapsackSystem {
    sizes: Vec<Rational>,
    capacity: Rational,
}

impl KnapsackSystem {
    pub fn new(sizes: Vec<Rational>, capacity: Rational) -> Result<Self> {
        if sizes.len() > MAX_AGENTS {
            return Err(Error::InvalidSystem(format!("{} agents exceed {MAX_AGENTS}", sizes.len())));
        }
        if capacity <= Rational::zero() {
            return Err(Error::InvalidSystem(format!("capacity {capacity} is not positive")));
        }
        for (agent, &size) in sizes.iter().enumerate() {
            if size <= Rational::zero() {
                return Err(Error::NonPositiveSize { agent, size });
            }
            if size > capacity {
                return Err(Error::SizeExceedsCapacity { agent, size, capacity });
            }
        }
        Ok(KnapsackSystem { sizes, capacity })
    }

    pub fn sizes(&self) -> &[Rational] {
        &self.sizes
    }

    pub fn capacity(&self) -> Rational {
        self.capacity
    }

    pub fn size_of(&self, s: AgentSubset) -> Rational {
        s.iter().map(|i| self.sizes[i]).sum()
    }

    pub fn max_size(&self) -> Rational {
        self.sizes.iter().copied().max().unwrap_or_else(Rational::zero)
    }
}

/// A system given by its list of independent sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExplicitSystem {
    m: usize,
    family: Vec<AgentSubset>,
    members: HashSet<AgentSubset>,
}

impl ExplicitSystem {
    /// The downward closure of `sets` (the empty set is always included).
    pub fn from_maximal(m: usize, sets: &[AgentSubset]) -> Result<Self> {
        ensure_enumerable(m, "explicit systems are closed by enumeration")?;
        let mut members = HashSet::new();
        members.insert(AgentSubset::EMPTY);
        for s in sets {
            if !s.fits(m) {
                return Err(Error::SubsetOutOfRange { subset: *s, m });
            }
            members.extend(s.subsets());
        }
        Ok(Self::from_members(m, members))
    }

    /// The exact family `sets`, which must contain the empty set and be downward closed.
    pub fn from_family(m: usize, sets: &[AgentSubset]) -> Result<Self> {
        let members: HashSet<AgentSubset> = sets.iter().copied().collect();
        if !members.contains(&AgentSubset::EMPTY) {
            return Err(Error::InvalidSystem("family does not contain the empty set".into()));
        }
        for s in &members {
            if !s.fits(m) {
                return Err(Error::SubsetOutOfRange { subset: *s, m });
            }
            for i in s.iter() {
                if !members.contains(&s.without(i)) {
                    return Err(Error::InvalidSystem(format!("family is not downward closed: {s} minus {i} missing")));
                }
            }
        }
        Ok(Self::from_members(m, members))
    }

    fn from_members(m: usize, members: HashSet<AgentSubset>) -> Self {
        let mut family: Vec<_> = members.iter().copied().collect();
        family.sort();
        ExplicitSystem { m, family, members }
    }

    /// Independent sets in increasing set order.
    pub fn family(&self) -> &[AgentSubset] {
        &self.family
    }

    /// Inclusion-maximal independent sets.
    pub fn maximal_sets(&self) -> Vec<AgentSubset> {
        self.family
            .iter()
            .copied()
            .filter(|s| (0..self.m).all(|i| s.contains(i) || !self.members.contains(&s.with(i))))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IndependenceSystem {
    Uniform(UniformMatroid),
    Partition(PartitionMatroid),
    Graphic(GraphicMatroid),
    Knapsack(KnapsackSystem),
    Explicit(ExplicitSystem),
}

impl IndependenceSystem {
    pub fn uniform(m: usize, k: usize) -> Self {
        assert!(m <= MAX_AGENTS);
        IndependenceSystem::Uniform(UniformMatroid { m, k })
    }

    pub fn ground_size(&self) -> usize {
        match self {
            IndependenceSystem::Uniform(u) => u.m,
            IndependenceSystem::Partition(p) => p.m,
            IndependenceSystem::Graphic(g) => g.edges.len(),
            IndependenceSystem::Knapsack(k) => k.sizes.len(),
            IndependenceSystem::Explicit(e) => e.m,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            IndependenceSystem::Uniform(_) => "uniform",
            IndependenceSystem::Partition(_) => "partition",
            IndependenceSystem::Graphic(_) => "graphic",
            IndependenceSystem::Knapsack(_) => "knapsack",
            IndependenceSystem::Explicit(_) => "explicit",
        }
    }

    /// Whether the kind is structurally guaranteed to be a matroid.
    pub fn is_matroid(&self) -> bool {
        matches!(
            self,
            IndependenceSystem::Uniform(_) | IndependenceSystem::Partition(_) | IndependenceSystem::Graphic(_)
        )
    }

    pub fn as_knapsack(&self) -> Option<&KnapsackSystem> {
        match self {
            IndependenceSystem::Knapsack(k) => Some(k),
            _ => None,
        }
    }

    pub fn as_graphic(&self) -> Option<&GraphicMatroid> {
        match self {
            IndependenceSystem::Graphic(g) => Some(g),
            _ => None,
        }
    }

    pub fn is_independent(&self, s: AgentSubset) -> bool {
        if !s.fits(self.ground_size()) {
            return false;
        }
        match self {
            IndependenceSystem::Uniform(u) => s.len() <= u.k,
            IndependenceSystem::Partition(p) => {
                p.blocks.iter().zip(&p.capacities).all(|(b, &k)| s.intersection(*b).len() <= k)
            }
            IndependenceSystem::Graphic(g) => g.is_forest(s),
            IndependenceSystem::Knapsack(k) => k.size_of(s) <= k.capacity,
            IndependenceSystem::Explicit(e) => e.members.contains(&s),
        }
    }

    /// Size of a largest independent subset of `s`.
    pub fn rank(&self, s: AgentSubset) -> usize {
        let s = s.intersection(AgentSubset::full(self.ground_size()));
        match self {
            IndependenceSystem::Uniform(u) => s.len().min(u.k),
            IndependenceSystem::Partition(p) => {
                p.blocks.iter().zip(&p.capacities).map(|(b, &k)| s.intersection(*b).len().min(k)).sum()
            }
            IndependenceSystem::Graphic(g) => g.forest_rank(s),
            IndependenceSystem::Knapsack(k) => {
                // smallest items first is a maximum-cardinality packing
                let mut sizes: Vec<Rational> = s.iter().map(|i| k.sizes[i]).collect();
                sizes.sort();
                let mut used = Rational::zero();
                let mut count = 0;
                for sz in sizes {
                    used += sz;
                    if used > k.capacity {
                        break;
                    }
                    count += 1;
                }
                count
            }
            IndependenceSystem::Explicit(e) => {
                e.family.iter().filter(|t| t.is_subset_of(s)).map(|t| t.len()).max().unwrap_or(0)
            }
        }
    }

    /// A smallest dependent set, or `None` when every subset is independent.
    ///
    /// Enumeration proceeds by increasing cardinality, and within a cardinality
    /// by lexicographic order of member indices.
    pub fn minimum_dependent_set(&self) -> Result<Option<AgentSubset>> {
        let m = self.ground_size();
        match self {
            IndependenceSystem::Uniform(u) => Ok((m > u.k).then(|| (0..=u.k).collect())),
            IndependenceSystem::Partition(p) => Ok(p
                .blocks
                .iter()
                .zip(&p.capacities)
                .filter(|(b, &k)| b.len() > k)
                .min_by_key(|(_, &k)| k)
                .map(|(b, &k)| b.iter().take(k + 1).collect())),
            _ => {
                ensure_enumerable(m, "girth of this kind is computed by enumeration")?;
                for size in 1..=m {
                    for combo in (0..m).combinations(size) {
                        let s: AgentSubset = combo.into_iter().collect();
                        if !self.is_independent(s) {
                            return Ok(Some(s));
                        }
                    }
                }
                Ok(None)
            }
        }
    }

    /// Size of a smallest dependent set.
    pub fn girth(&self) -> Result<Option<usize>> {
        Ok(self.minimum_dependent_set()?.map(AgentSubset::len))
    }

    /// All independent sets, by enumeration.
    pub fn independent_sets(&self) -> Result<Vec<AgentSubset>> {
        let m = self.ground_size();
        ensure_enumerable(m, "independent sets are listed by enumeration")?;
        Ok(AgentSubset::all(m).filter(|s| self.is_independent(*s)).collect())
    }
}

/// A ground set with an independence system and a score matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub system: IndependenceSystem,
    pub scores: ScoreMatrix,
}

impl Instance {
    pub fn new(system: IndependenceSystem, scores: ScoreMatrix) -> Result<Self> {
        if system.ground_size() != scores.size() {
            return Err(Error::GroundMismatch { expected: system.ground_size(), found: scores.size() });
        }
        Ok(Instance { system, scores })
    }

    pub fn m(&self) -> usize {
        self.scores.size()
    }

    pub fn ground(&self) -> AgentSubset {
        AgentSubset::full(self.m())
    }

    pub fn with_scores(&self, scores: ScoreMatrix) -> Result<Self> {
        Instance::new(self.system.clone(), scores)
    }

    pub fn score(&self, s: AgentSubset) -> Rational {
        self.scores.set_score(s)
    }
}

/// Highest-scoring independent set by exhaustive enumeration.
pub fn brute_opt(instance: &Instance) -> Result<AgentSubset> {
    let m = instance.m();
    ensure_enumerable(m, "use the structural optimum (greedy basis) for large instances")?;
    let totals = instance.scores.totals();
    let mut best = (Rational::zero(), AgentSubset::EMPTY);
    for s in AgentSubset::all(m) {
        if instance.system.is_independent(s) {
            let cand = (s.iter().map(|i| totals[i]).sum(), s);
            if scored_cmp(cand, best).is_gt() {
                best = cand;
            }
        }
    }
    Ok(best.1)
}

/// Highest-ranked independent subset of `allowed` under per-agent `weights`.
///
/// Ties in total weight go to the greater set. Matroids use the greedy
/// algorithm; knapsacks an exact dynamic program or enumeration.
pub fn max_weight_independent(
    system: &IndependenceSystem,
    weights: &[Rational],
    allowed: AgentSubset,
) -> Result<AgentSubset> {
    let m = system.ground_size();
    if weights.len() != m {
        return Err(Error::GroundMismatch { expected: m, found: weights.len() });
    }
    let allowed = allowed.intersection(AgentSubset::full(m));
    match system {
        IndependenceSystem::Uniform(_) | IndependenceSystem::Partition(_) | IndependenceSystem::Graphic(_) => {
            let mut chosen = AgentSubset::EMPTY;
            for e in weight_order(weights) {
                if allowed.contains(e) && system.is_independent(chosen.with(e)) {
                    chosen.insert(e);
                }
            }
            Ok(chosen)
        }
        IndependenceSystem::Knapsack(k) => knapsack_opt(k, weights, allowed),
        IndependenceSystem::Explicit(e) => {
            let mut best = (Rational::zero(), AgentSubset::EMPTY);
            for &s in &e.family {
                if s.is_subset_of(allowed) {
                    let cand = (s.iter().map(|i| weights[i]).sum(), s);
                    if scored_cmp(cand, best).is_gt() {
                        best = cand;
                    }
                }
            }
            Ok(best.1)
        }
    }
}

fn knapsack_opt(k: &KnapsackSystem, weights: &[Rational], allowed: AgentSubset) -> Result<AgentSubset> {
    let items: Vec<usize> = allowed.iter().collect();
    if items.is_empty() {
        return Ok(AgentSubset::EMPTY);
    }
    let scale = items.iter().map(|&i| *k.sizes[i].denom()).fold(*k.capacity.denom(), |a, b| a.lcm(&b));
    let cap = (k.capacity * Rational::from_integer(scale)).to_integer();
    let dp_cost = (cap as u128).saturating_mul(items.len() as u128);
    let enum_cost = if items.len() >= 100 { u128::MAX } else { (1u128 << items.len()) * items.len() as u128 };
    if cap as u128 <= KNAPSACK_DP_LIMIT && dp_cost <= enum_cost {
        let cap = cap.to_usize().expect("bounded capacity");
        let mut best = vec![(Rational::zero(), AgentSubset::EMPTY); cap + 1];
        for &i in &items {
            let sz = (k.sizes[i] * Rational::from_integer(scale)).to_integer() as usize;
            for c in (sz..=cap).rev() {
                let (w, s) = best[c - sz];
                let cand = (w + weights[i], s.with(i));
                if scored_cmp(cand, best[c]).is_gt() {
                    best[c] = cand;
                }
            }
        }
        return Ok(best[cap].1);
    }
    ensure_enumerable(items.len(), "knapsack optimum needs a small common size denominator or few candidates")?;
    let mut best = (Rational::zero(), AgentSubset::EMPTY);
    for s in allowed.subsets() {
        if k.size_of(s) <= k.capacity {
            let cand = (s.iter().map(|i| weights[i]).sum(), s);
            if scored_cmp(cand, best).is_gt() {
                best = cand;
            }
        }
    }
    Ok(best.1)
}

/// Best independent subset of `allowed` scored by votes from `voters`.
pub fn constrained_opt(instance: &Instance, voters: AgentSubset, allowed: AgentSubset) -> Result<AgentSubset> {
    let weights: Vec<Rational> = (0..instance.m()).map(|j| instance.scores.received_from(voters, j)).collect();
    max_weight_independent(&instance.system, &weights, allowed)
}

/// Highest-scoring independent set, computed structurally (greedy on
/// matroids, dynamic program on knapsacks). Agrees with [`brute_opt`].
pub fn opt(instance: &Instance) -> Result<AgentSubset> {
    constrained_opt(instance, instance.ground(), instance.ground())
}

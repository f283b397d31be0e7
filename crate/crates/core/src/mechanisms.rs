//! Selection mechanisms as deterministic functions of an instance and an
//! explicit realization of their randomness.
//!
//! Randomized mechanisms whose lottery is given in closed form ([`kpr`],
//! [`mpr`]) return a [`SelectionDistribution`] directly; the others take
//! their random draw ([`Bipartition`], [`PermutationPair`]) as an argument and
//! are averaged by the engine.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::matroid::{decompose_marginals, greedy_basis, require_matroid, MarginalVector, SelectionDistribution};
use crate::order::{greedy_order_from_totals, scored_argmax};
use crate::scores::ScoreMatrix;
use crate::subset::AgentSubset;
use crate::systems::{constrained_opt, GraphicMatroid, Instance, KnapsackSystem};
use crate::Rational;

/// A split of the agents into voters `P1` and candidates `P2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bipartition {
    m: usize,
    p2: AgentSubset,
}

impl Bipartition {
    pub fn new(m: usize, p2: AgentSubset) -> Result<Self> {
        if !p2.fits(m) {
            return Err(Error::SubsetOutOfRange { subset: p2, m });
        }
        Ok(Bipartition { m, p2 })
    }

    /// The bipartition numbered `index`: bit `i` set means agent `i` is in `P2`.
    pub fn from_index(m: usize, index: u64) -> Result<Self> {
        Self::new(m, AgentSubset::from_bits(index))
    }

    pub fn p1(&self) -> AgentSubset {
        AgentSubset::full(self.m).difference(self.p2)
    }

    pub fn p2(&self) -> AgentSubset {
        self.p2
    }
}

/// Voters in `P1` elect the best independent subset of `P2`.
pub fn partition_run(instance: &Instance, b: &Bipartition) -> Result<AgentSubset> {
    if b.m != instance.m() {
        return Err(Error::GroundMismatch { expected: instance.m(), found: b.m });
    }
    constrained_opt(instance, b.p1(), b.p2())
}

fn knapsack_of(instance: &Instance) -> Result<&KnapsackSystem> {
    instance
        .system
        .as_knapsack()
        .ok_or(Error::WrongKind { expected: "knapsack", found: instance.system.kind_name() })
}

/// The greedy order together with the greedy prefix that fits the capacity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GreedyState {
    pub order: Vec<usize>,
    /// Length of the longest prefix of `order` fitting the capacity.
    pub k: usize,
    pub kgr: AgentSubset,
    /// `kgr` plus the next agent in the order, if any.
    pub ekgr: AgentSubset,
}

impl GreedyState {
    /// Greedy state for the given per-agent scores, sizes and capacity.
    pub fn compute(totals: &[Rational], sizes: &[Rational], capacity: Rational) -> Result<Self> {
        let order = greedy_order_from_totals(totals, sizes)?;
        let mut used = Rational::zero();
        let mut k = 0;
        for &i in &order {
            used += sizes[i];
            if used > capacity {
                break;
            }
            k += 1;
        }
        let kgr: AgentSubset = order[..k].iter().copied().collect();
        let ekgr = order.get(k).map_or(kgr, |&i| kgr.with(i));
        Ok(GreedyState { order, k, kgr, ekgr })
    }

    /// Position of `i` in the greedy order.
    pub fn position(&self, i: usize) -> usize {
        self.order.iter().position(|&j| j == i).expect("agent in order")
    }

    /// Agents strictly before `i` in the greedy order.
    pub fn predecessors(&self, i: usize) -> AgentSubset {
        self.order[..self.position(i)].iter().copied().collect()
    }
}

/// Greedy state of a knapsack instance.
pub fn knapsack_greedy(instance: &Instance) -> Result<GreedyState> {
    let k = knapsack_of(instance)?;
    GreedyState::compute(&instance.scores.totals(), k.sizes(), k.capacity())
}

fn check_sparsity(w: &ScoreMatrix, d: usize) -> Result<()> {
    let sparsity = w.sparsity();
    if sparsity > d {
        return Err(Error::SparsityExceeded { sparsity, d });
    }
    Ok(())
}

/// Full trace of one [`kpr`] evaluation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KprRun {
    pub greedy: GreedyState,
    /// Agents in the extended greedy set once their own votes are removed.
    pub candidates: AgentSubset,
    /// Candidate latest in the greedy order, if any.
    pub last: Option<usize>,
    pub distribution: SelectionDistribution,
}

/// Randomized knapsack mechanism for `d`-sparse scores, with its trace.
pub fn kpr_run(instance: &Instance, d: usize) -> Result<KprRun> {
    let ks = knapsack_of(instance)?;
    let w = &instance.scores;
    check_sparsity(w, d)?;
    let (sizes, cap) = (ks.sizes(), ks.capacity());
    let greedy = GreedyState::compute(&w.totals(), sizes, cap)?;
    let mut candidates = AgentSubset::EMPTY;
    for i in 0..instance.m() {
        if GreedyState::compute(&w.totals_without(i), sizes, cap)?.ekgr.contains(i) {
            candidates.insert(i);
        }
    }
    if !greedy.ekgr.is_subset_of(candidates) {
        return Err(Error::Invariant(format!(
            "extended greedy set {} not contained in candidates {candidates}",
            greedy.ekgr
        )));
    }
    let last = greedy.order.iter().rev().copied().find(|&i| candidates.contains(i));
    let distribution = match last {
        None => SelectionDistribution::point_mass(AgentSubset::EMPTY),
        Some(l) => {
            let q = Rational::new(1, d as i128 + 2);
            let voted = w.targets_of(l);
            let mut entries = vec![(AgentSubset::singleton(l), q)];
            entries.extend(voted.intersection(candidates).iter().map(|j| (AgentSubset::singleton(j), q)));
            entries.push((candidates.difference(voted.with(l)), q));
            let residual = Rational::one() - q * Rational::from_integer(entries.len() as i128);
            entries.push((AgentSubset::EMPTY, residual));
            SelectionDistribution::new(entries)?
        }
    };
    if let Some((s, _)) = distribution.support().iter().find(|(s, _)| ks.size_of(*s) > cap) {
        return Err(Error::Invariant(format!("support set {s} exceeds the capacity")));
    }
    Ok(KprRun { greedy, candidates, last, distribution })
}

/// Randomized knapsack mechanism for `d`-sparse scores.
pub fn kpr(instance: &Instance, d: usize) -> Result<SelectionDistribution> {
    Ok(kpr_run(instance, d)?.distribution)
}

/// Largest agent size, the smallest admissible `s_max`.
pub fn default_smax(instance: &Instance) -> Result<Rational> {
    Ok(knapsack_of(instance)?.max_size())
}

/// Deterministic knapsack mechanism: agents in the greedy set of the
/// capacity reduced by `d * s_max`, computed without their own votes.
pub fn dkpr(instance: &Instance, d: usize, s_max: Rational) -> Result<AgentSubset> {
    let ks = knapsack_of(instance)?;
    let w = &instance.scores;
    check_sparsity(w, d)?;
    if let Some((i, s)) = ks.sizes().iter().enumerate().find(|(_, s)| **s > s_max) {
        return Err(Error::SmaxViolation(format!("agent {i} has size {s} > s_max = {s_max}")));
    }
    let cap = ks.capacity();
    let reserve = s_max * Rational::from_integer(d as i128 + 1);
    if reserve >= cap {
        return Err(Error::SmaxViolation(format!("s_max * (d + 1) = {reserve} is not below C = {cap}")));
    }
    let reduced = cap - s_max * Rational::from_integer(d as i128);
    let mut chosen = AgentSubset::EMPTY;
    for i in 0..instance.m() {
        if GreedyState::compute(&w.totals_without(i), ks.sizes(), reduced)?.kgr.contains(i) {
            chosen.insert(i);
        }
    }
    if ks.size_of(chosen) > cap {
        return Err(Error::Invariant(format!("selected set {chosen} exceeds the capacity")));
    }
    Ok(chosen)
}

/// Marginals of the matroid mechanism: one half for each agent in the
/// optimum computed without its own votes.
pub fn mpr_marginals(instance: &Instance) -> Result<MarginalVector> {
    require_matroid(&instance.system)?;
    let w = &instance.scores;
    check_sparsity(w, 1)?;
    let mut p = vec![Rational::zero(); instance.m()];
    for (e, pe) in p.iter_mut().enumerate() {
        if greedy_basis(&instance.system, &w.totals_without(e))?.contains(e) {
            *pe = Rational::new(1, 2);
        }
    }
    MarginalVector::new(p)
}

/// Matroid mechanism for 1-sparse scores, as a lottery over independent sets.
pub fn mpr(instance: &Instance) -> Result<SelectionDistribution> {
    decompose_marginals(&instance.system, &mpr_marginals(instance)?)
}

/// A vertex permutation `eta` and an edge permutation `pi`, each listed in
/// order: `eta[0]` is the first vertex, `pi[0]` the first edge.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PermutationPair {
    pub eta: Vec<usize>,
    pub pi: Vec<usize>,
}

fn is_permutation(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    p.iter().all(|&x| x < p.len() && !std::mem::replace(&mut seen[x], true))
}

impl PermutationPair {
    pub fn new(eta: Vec<usize>, pi: Vec<usize>) -> Result<Self> {
        if !is_permutation(&eta) || !is_permutation(&pi) {
            return Err(Error::InvalidParam(format!("not a pair of permutations: {eta:?}, {pi:?}")));
        }
        Ok(PermutationPair { eta, pi })
    }

    pub fn identity(n: usize, m: usize) -> Self {
        PermutationPair { eta: (0..n).collect(), pi: (0..m).collect() }
    }
}

/// Part `i` holds the edges at vertex `eta[i]` not already in an earlier part.
pub fn vertex_partition(graph: &GraphicMatroid, eta: &[usize]) -> Result<Vec<AgentSubset>> {
    if eta.len() != graph.vertex_count() || !is_permutation(eta) {
        return Err(Error::InvalidParam(format!("{eta:?} is not a permutation of {} vertices", graph.vertex_count())));
    }
    let mut assigned = AgentSubset::EMPTY;
    Ok(eta
        .iter()
        .map(|&v| {
            let part = graph.incident(v).difference(assigned);
            assigned = assigned.union(part);
            part
        })
        .collect())
}

fn simple_graph_of(instance: &Instance) -> Result<&GraphicMatroid> {
    let g = instance
        .system
        .as_graphic()
        .ok_or(Error::WrongKind { expected: "graphic", found: instance.system.kind_name() })?;
    if !g.is_simple() {
        return Err(Error::NotSimple("the graph is not flagged simple".into()));
    }
    Ok(g)
}

fn check_pair(instance: &Instance, g: &GraphicMatroid, r: &PermutationPair) -> Result<()> {
    if r.eta.len() != g.vertex_count() || r.pi.len() != instance.m() {
        return Err(Error::InvalidParam(format!(
            "permutation sizes ({}, {}) do not match ({}, {})",
            r.eta.len(),
            r.pi.len(),
            g.vertex_count(),
            instance.m()
        )));
    }
    Ok(())
}

/// Position of each element in `perm`.
pub(crate) fn positions(perm: &[usize]) -> Vec<usize> {
    let mut pos = vec![0; perm.len()];
    for (k, &x) in perm.iter().enumerate() {
        pos[x] = k;
    }
    pos
}

/// Scores with every vote from an edge to an earlier edge of the same part removed.
pub fn induced_matrix(instance: &Instance, r: &PermutationPair) -> Result<ScoreMatrix> {
    let g = instance
        .system
        .as_graphic()
        .ok_or(Error::WrongKind { expected: "graphic", found: instance.system.kind_name() })?;
    check_pair(instance, g, r)?;
    let parts = vertex_partition(g, &r.eta)?;
    Ok(induced_from_parts(&instance.scores, &parts, &r.pi))
}

pub(crate) fn induced_from_parts(w: &ScoreMatrix, parts: &[AgentSubset], pi: &[usize]) -> ScoreMatrix {
    let pos = positions(pi);
    let mut out = w.clone();
    for part in parts {
        for e in part.iter() {
            for f in part.iter() {
                if pos[e] > pos[f] {
                    out.set(e, f, Rational::zero()).expect("valid entry");
                }
            }
        }
    }
    out
}

/// Which score matrices [`vertex_partition_run`] accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum VpMode {
    /// Binary scores only, the class with an approximation guarantee.
    #[default]
    Guarantee,
    /// Any nonnegative scores; same procedure, no guarantee claimed.
    Permissive,
}

/// Edge selection on a simple graph: one edge per part of the vertex
/// partition, chosen by a pass over the part in `pi` order that keeps the
/// candidate with the highest observed score.
pub fn vertex_partition_run(instance: &Instance, r: &PermutationPair, mode: VpMode) -> Result<AgentSubset> {
    let g = simple_graph_of(instance)?;
    check_vp_class(instance, mode)?;
    check_pair(instance, g, r)?;
    let parts = vertex_partition(g, &r.eta)?;
    Ok(select_from_parts(&instance.scores, &parts, &r.pi))
}

pub(crate) fn check_vp_class(instance: &Instance, mode: VpMode) -> Result<()> {
    simple_graph_of(instance)?;
    if mode == VpMode::Guarantee && !instance.scores.is_binary() {
        return Err(Error::NotBinary);
    }
    Ok(())
}

pub(crate) fn select_from_parts(w: &ScoreMatrix, parts: &[AgentSubset], pi: &[usize]) -> AgentSubset {
    let all = AgentSubset::full(w.size());
    let mut chosen = AgentSubset::EMPTY;
    for &part in parts.iter().filter(|p| !p.is_empty()) {
        let outside = all.difference(part);
        let mut edges = pi.iter().copied().filter(|&e| part.contains(e));
        let mut cand = edges.next().expect("nonempty part");
        let mut cand_score = w.received_from(outside, cand);
        let mut seen = AgentSubset::singleton(cand);
        for e in edges {
            let r = outside.union(seen.without(cand));
            // plain >=: ties go to the later edge
            if w.received_from(r, e) >= cand_score {
                cand_score = w.received_from(r.with(cand), e);
                cand = e;
            }
            seen.insert(e);
        }
        chosen.insert(cand);
    }
    chosen
}

/// The top-`phi` element of every nonempty part.
pub fn best_from_partition<F>(parts: &[AgentSubset], mut phi: F) -> AgentSubset
where
    F: FnMut(usize) -> Rational,
{
    parts
        .iter()
        .filter(|p| !p.is_empty())
        .map(|p| {
            let best = scored_argmax(p.iter().map(AgentSubset::singleton), |s| phi(s.iter().next().unwrap()));
            best.expect("nonempty part")
        })
        .fold(AgentSubset::EMPTY, AgentSubset::union)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;
    use crate::systems::IndependenceSystem;

    fn set(ix: &[usize]) -> AgentSubset {
        ix.iter().copied().collect()
    }

    fn mutual_pair() -> Instance {
        let w = ScoreMatrix::from_int_triplets(2, &[(0, 1, 1), (1, 0, 1)]).unwrap();
        Instance::new(IndependenceSystem::uniform(2, 1), w).unwrap()
    }

    fn knapsack(sizes: &[Rational], c: Rational, w: ScoreMatrix) -> Instance {
        Instance::new(IndependenceSystem::Knapsack(KnapsackSystem::new(sizes.to_vec(), c).unwrap()), w).unwrap()
    }

    /// Path 0-1-2 with edges a = {0,1}, b = {1,2} voting for each other.
    fn path() -> Instance {
        let g = GraphicMatroid::new(3, vec![(0, 1), (1, 2)], true).unwrap();
        let w = ScoreMatrix::from_int_triplets(2, &[(0, 1, 1), (1, 0, 1)]).unwrap();
        Instance::new(IndependenceSystem::Graphic(g), w).unwrap()
    }

    fn triangle_votes() -> Instance {
        let g = GraphicMatroid::new(3, vec![(0, 1), (1, 2), (0, 2)], true).unwrap();
        let w = ScoreMatrix::from_int_triplets(3, &[(0, 1, 2), (1, 2, 1), (2, 0, 3)]).unwrap();
        Instance::new(IndependenceSystem::Graphic(g), w).unwrap()
    }

    #[test]
    fn partition_examples() {
        let inst = mutual_pair();
        let run = |p2: &[usize]| partition_run(&inst, &Bipartition::new(2, set(p2)).unwrap()).unwrap();
        assert_eq!(run(&[]), AgentSubset::EMPTY);
        assert_eq!(run(&[1]), set(&[1]));
        assert_eq!(run(&[0, 1]), set(&[0]));
        assert_eq!(Bipartition::from_index(3, 0b101).unwrap().p1(), set(&[1]));
    }

    #[test]
    fn greedy_state_examples() {
        let w = ScoreMatrix::from_int_triplets(2, &[(1, 0, 2), (0, 1, 1)]).unwrap();
        let inst = knapsack(&[rat(6, 1), rat(6, 1)], rat(10, 1), w);
        let g = knapsack_greedy(&inst).unwrap();
        assert_eq!((g.k, g.kgr, g.ekgr), (1, set(&[0]), set(&[0, 1])));
        let inst = knapsack(&[rat(1, 1), rat(2, 1)], rat(10, 1), ScoreMatrix::zeros(2));
        let g = knapsack_greedy(&inst).unwrap();
        assert_eq!((g.kgr, g.ekgr), (set(&[0, 1]), set(&[0, 1])));
        assert_eq!(g.predecessors(1), set(&[0]));
    }

    #[test]
    fn kpr_single_agent() {
        let inst = knapsack(&[rat(1, 1)], rat(1, 1), ScoreMatrix::zeros(1));
        let d = kpr(&inst, 1).unwrap();
        assert_eq!(d.support(), &[(set(&[0]), rat(1, 3)), (AgentSubset::EMPTY, rat(2, 3))]);
    }

    #[test]
    fn kpr_rejects_dense_votes() {
        let w = ScoreMatrix::from_int_triplets(3, &[(0, 1, 1), (0, 2, 1)]).unwrap();
        let inst = knapsack(&[rat(1, 1); 3], rat(2, 1), w);
        assert_eq!(kpr(&inst, 1), Err(Error::SparsityExceeded { sparsity: 2, d: 1 }));
        assert!(kpr(&inst, 2).is_ok());
        assert!(matches!(kpr(&mutual_pair(), 1), Err(Error::WrongKind { .. })));
    }

    #[test]
    fn dkpr_chain() {
        let w = ScoreMatrix::from_int_triplets(
            6,
            &[(1, 0, 6), (2, 1, 5), (3, 2, 4), (4, 3, 3), (5, 4, 2), (0, 5, 1)],
        )
        .unwrap();
        let inst = knapsack(&[rat(2, 1); 6], rat(10, 1), w);
        let s = dkpr(&inst, 1, rat(2, 1)).unwrap();
        assert_eq!(s, set(&[0, 1, 2, 3, 4]));
        assert_eq!(inst.score(s), rat(20, 1));
    }

    #[test]
    fn dkpr_preconditions() {
        let inst = knapsack(&[rat(2, 1); 3], rat(10, 1), ScoreMatrix::zeros(3));
        assert!(matches!(dkpr(&inst, 1, rat(1, 1)), Err(Error::SmaxViolation(_))));
        assert!(matches!(dkpr(&inst, 4, rat(2, 1)), Err(Error::SmaxViolation(_))));
        // zero scores: index order, reduced capacity 8 fits all three
        assert_eq!(dkpr(&inst, 1, rat(2, 1)).unwrap(), AgentSubset::full(3));
    }

    #[test]
    fn mpr_examples() {
        let p = mpr_marginals(&triangle_votes()).unwrap();
        assert_eq!(p.as_slice(), &[rat(1, 2); 3]);
        let d = mpr(&triangle_votes()).unwrap();
        assert_eq!(d.support(), &[(set(&[0, 1]), rat(1, 2)), (set(&[2]), rat(1, 2))]);
        let p = mpr_marginals(&mutual_pair()).unwrap();
        assert_eq!(p.as_slice(), &[rat(1, 2); 2]);
        let zero = Instance::new(IndependenceSystem::uniform(3, 2), ScoreMatrix::zeros(3)).unwrap();
        let d = mpr(&zero).unwrap();
        assert_eq!(d.support(), &[(set(&[0, 1]), rat(1, 2)), (AgentSubset::EMPTY, rat(1, 2))]);
    }

    #[test]
    fn induced_matrix_examples() {
        let inst = path();
        let id = PermutationPair::new(vec![0, 1, 2], vec![0, 1]).unwrap();
        assert_eq!(induced_matrix(&inst, &id).unwrap(), inst.scores);
        let hub_first = PermutationPair::new(vec![1, 0, 2], vec![0, 1]).unwrap();
        let wi = induced_matrix(&inst, &hub_first).unwrap();
        assert_eq!((wi.get(0, 1), wi.get(1, 0)), (rat(1, 1), rat(0, 1)));
    }

    #[test]
    fn vertex_partition_examples() {
        let inst = path();
        let g = inst.system.as_graphic().unwrap();
        assert_eq!(vertex_partition(g, &[0, 1, 2]).unwrap(), vec![set(&[0]), set(&[1]), AgentSubset::EMPTY]);
        let run = |eta: Vec<usize>, pi: Vec<usize>| {
            vertex_partition_run(&inst, &PermutationPair::new(eta, pi).unwrap(), VpMode::Guarantee).unwrap()
        };
        assert_eq!(run(vec![0, 1, 2], vec![1, 0]), set(&[0, 1]));
        assert_eq!(run(vec![1, 0, 2], vec![0, 1]), set(&[1]));
        assert_eq!(run(vec![1, 0, 2], vec![1, 0]), set(&[0]));
    }

    #[test]
    fn vertex_partition_class_checks() {
        assert_eq!(
            vertex_partition_run(&triangle_votes(), &PermutationPair::identity(3, 3), VpMode::Guarantee),
            Err(Error::NotBinary)
        );
        assert!(vertex_partition_run(&triangle_votes(), &PermutationPair::identity(3, 3), VpMode::Permissive).is_ok());
        let multi = GraphicMatroid::new(2, vec![(0, 1), (0, 1)], false).unwrap();
        let inst = Instance::new(IndependenceSystem::Graphic(multi), ScoreMatrix::zeros(2)).unwrap();
        assert!(matches!(
            vertex_partition_run(&inst, &PermutationPair::identity(2, 2), VpMode::Guarantee),
            Err(Error::NotSimple(_))
        ));
    }

    #[test]
    fn best_from_partition_examples() {
        let phi = |e: usize| [rat(1, 1), rat(2, 1), rat(0, 1)][e];
        assert_eq!(best_from_partition(&[set(&[0]), set(&[1]), set(&[2])], phi), set(&[0, 1, 2]));
        assert_eq!(best_from_partition(&[set(&[0, 1])], |_| rat(0, 1)), set(&[0]));
        assert_eq!(best_from_partition(&[set(&[0, 1]), set(&[2]), AgentSubset::EMPTY], phi), set(&[1, 2]));
    }
}

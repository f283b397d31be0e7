//! Instance generators: adversarial constructions, worked examples and
//! seeded random instances.

use itertools::Itertools;
use rand::seq::{IteratorRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scores::ScoreMatrix;
use crate::subset::{AgentSubset, MAX_AGENTS};
use crate::systems::{GraphicMatroid, IndependenceSystem, Instance, KnapsackSystem, PartitionMatroid};
use crate::{rat, Rational};

/// Structure planted by a construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstructionMeta {
    /// A minimum dependent set.
    pub dependent_set: AgentSubset,
    pub girth: usize,
    /// Agent outside the dependent set voting for all of it.
    pub external: Option<usize>,
    /// Member of the dependent set whose votes differ between the pair.
    pub designated: Option<usize>,
}

fn min_dependent(system: &IndependenceSystem) -> Result<AgentSubset> {
    let s = system
        .minimum_dependent_set()?
        .ok_or_else(|| Error::InvalidParam("every subset is independent; girth undefined".into()))?;
    if s.len() < 2 {
        return Err(Error::InvalidParam(format!("girth {} leaves no room for a vote cycle", s.len())));
    }
    Ok(s)
}

/// Unit votes around a directed cycle on a minimum dependent set.
pub fn gen_cycle_girth(system: &IndependenceSystem) -> Result<(Instance, ConstructionMeta)> {
    let s = min_dependent(system)?;
    let members = s.to_vec();
    let g = members.len();
    let w = ScoreMatrix::from_triplets(
        system.ground_size(),
        (0..g).map(|k| (members[k], members[(k + 1) % g], rat(1, 1))),
    )?;
    let meta = ConstructionMeta { dependent_set: s, girth: g, external: None, designated: None };
    Ok((Instance::new(system.clone(), w)?, meta))
}

/// A pair of instances differing only in the votes of one member `j` of a
/// minimum dependent set `S`: in the first an outside agent votes for all of
/// `S`; in the second `j` additionally votes for the rest of `S`.
pub fn gen_star_dependent(system: &IndependenceSystem) -> Result<(Instance, Instance, ConstructionMeta)> {
    let m = system.ground_size();
    let s = min_dependent(system)?;
    let g = s.len();
    if g + 1 > m {
        return Err(Error::InvalidParam(format!("girth {g} must be at most m - 1 = {}", m.saturating_sub(1))));
    }
    let external = (0..m).find(|&i| !s.contains(i)).expect("g < m");
    let designated = s.iter().next().expect("nonempty");
    let base: Vec<_> = s.iter().map(|j| (external, j, rat(1, 1))).collect();
    let w = ScoreMatrix::from_triplets(m, base.clone())?;
    let extra = s.without(designated).iter().map(|k| (designated, k, rat(1, 1)));
    let w2 = ScoreMatrix::from_triplets(m, base.into_iter().chain(extra))?;
    let meta = ConstructionMeta { dependent_set: s, girth: g, external: Some(external), designated: Some(designated) };
    Ok((Instance::new(system.clone(), w)?, Instance::new(system.clone(), w2)?, meta))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fig4Variant {
    /// The size-1 agent votes 3 for the size-10 agent and is not selected.
    A,
    /// The size-1 agent votes 10 and is selected.
    B,
}

/// Nine-agent knapsack instance (capacity 10) in which the size-1 agent's
/// vote decides whether it can push the size-10 agent below its own density.
///
/// Agents 0..5 have sizes `3, 11/2, 10, 1, 8` and total scores
/// `10, 15, 25, 2, 10`. Agents 5..9 are voters of size 10 with no score; as
/// they never fit behind the first agents, they are never candidates.
/// Agent 2's score of 25 is made of 15 from agent 4 plus 3 + 7 (variant A)
/// or 10 + 0 (variant B) from agents 3 and 7.
pub fn gen_fig4(variant: Fig4Variant) -> Instance {
    let (from_small, from_filler) = match variant {
        Fig4Variant::A => (3, 7),
        Fig4Variant::B => (10, 0),
    };
    let mut sizes = vec![rat(3, 1), rat(11, 2), rat(10, 1), rat(1, 1), rat(8, 1)];
    sizes.extend([rat(10, 1); 4]);
    let votes = [(4, 2, 15), (3, 2, from_small), (5, 0, 10), (6, 1, 15), (7, 2, from_filler), (8, 4, 10), (0, 3, 2)];
    let w = ScoreMatrix::from_int_triplets(9, &votes.iter().filter(|v| v.2 > 0).copied().collect::<Vec<_>>())
        .expect("valid votes");
    let system = IndependenceSystem::Knapsack(KnapsackSystem::new(sizes, rat(10, 1)).expect("valid sizes"));
    Instance::new(system, w).expect("matching sizes")
}

/// Unit-density knapsack instance (capacity 20, sizes at most 4) where the
/// deterministic mechanism with `d = 1`, `s_max = 4` keeps only the first
/// five agents, approaching its 3/5 guarantee as `eps` shrinks.
///
/// Scores come from two vote cycles, `0 -> 1 -> 2 -> 3 -> 4 -> 0` and
/// `5 -> 6 -> 7 -> 8 -> 5`, weighted so every agent's score equals its size.
pub fn gen_fig5b(eps: Rational) -> Result<Instance> {
    if eps <= rat(0, 1) || eps >= rat(1, 1) {
        return Err(Error::InvalidParam(format!("eps = {eps} must lie in (0, 1)")));
    }
    let three = rat(3, 1);
    let sizes = vec![
        rat(2, 1),
        rat(1, 1),
        rat(4, 1),
        rat(2, 1),
        three + eps,
        rat(4, 1),
        rat(1, 1),
        three - eps,
        three,
    ];
    let cycles = [[0, 1, 2, 3, 4].as_slice(), [5, 6, 7, 8].as_slice()];
    let mut votes = Vec::new();
    for cycle in cycles {
        for k in 0..cycle.len() {
            let to = cycle[(k + 1) % cycle.len()];
            votes.push((cycle[k], to, sizes[to]));
        }
    }
    let w = ScoreMatrix::from_triplets(9, votes)?;
    Instance::new(IndependenceSystem::Knapsack(KnapsackSystem::new(sizes, rat(20, 1))?), w)
}

/// Six agents of size 2 (capacity 10) voting along a chain.
pub fn gen_chain() -> Instance {
    let w = ScoreMatrix::from_int_triplets(6, &[(1, 0, 6), (2, 1, 5), (3, 2, 4), (4, 3, 3), (5, 4, 2), (0, 5, 1)])
        .expect("valid votes");
    let system = IndependenceSystem::Knapsack(KnapsackSystem::new(vec![rat(2, 1); 6], rat(10, 1)).expect("valid"));
    Instance::new(system, w).expect("matching sizes")
}

/// Wheel with hub 0 and rim vertices `1..n`: spokes are agents `0..n-1`,
/// rim edge `{j, j+1}` is agent `n-2+j`; each rim edge votes for the spoke
/// at its first endpoint.
pub fn gen_wheel(n: usize) -> Result<Instance> {
    if n < 4 {
        return Err(Error::InvalidParam(format!("wheel needs n >= 4 vertices, got {n}")));
    }
    let rim = n - 1;
    if 2 * rim > MAX_AGENTS {
        return Err(Error::InvalidParam(format!("wheel with n = {n} has more than {MAX_AGENTS} edges")));
    }
    let mut edges: Vec<(usize, usize)> = (1..=rim).map(|j| (0, j)).collect();
    edges.extend((1..=rim).map(|j| (j, j % rim + 1)));
    let w = ScoreMatrix::from_triplets(2 * rim, (0..rim).map(|j| (rim + j, j, rat(1, 1))))?;
    Instance::new(IndependenceSystem::Graphic(GraphicMatroid::new(n, edges, true)?), w)
}

/// Triangle whose edges vote 0 -> 1 (2), 1 -> 2 (1), 2 -> 0 (3).
pub fn gen_triangle() -> Instance {
    let g = GraphicMatroid::new(3, vec![(0, 1), (1, 2), (0, 2)], true).expect("simple");
    let w = ScoreMatrix::from_int_triplets(3, &[(0, 1, 2), (1, 2, 1), (2, 0, 3)]).expect("valid votes");
    Instance::new(IndependenceSystem::Graphic(g), w).expect("matching sizes")
}

/// Path on three vertices whose two edges vote for each other.
pub fn gen_path() -> Instance {
    let g = GraphicMatroid::new(3, vec![(0, 1), (1, 2)], true).expect("simple");
    let w = ScoreMatrix::from_int_triplets(2, &[(0, 1, 1), (1, 0, 1)]).expect("valid votes");
    Instance::new(IndependenceSystem::Graphic(g), w).expect("matching sizes")
}

/// Two agents voting for each other, at most one selectable.
pub fn gen_mutual_pair() -> Instance {
    let w = ScoreMatrix::from_int_triplets(2, &[(0, 1, 1), (1, 0, 1)]).expect("valid votes");
    Instance::new(IndependenceSystem::uniform(2, 1), w).expect("matching sizes")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RandomKind {
    Uniform,
    Partition,
    Graphic,
    Knapsack,
}

impl RandomKind {
    pub const ALL: [RandomKind; 4] = [RandomKind::Uniform, RandomKind::Partition, RandomKind::Graphic, RandomKind::Knapsack];
    pub const MATROIDS: [RandomKind; 3] = [RandomKind::Uniform, RandomKind::Partition, RandomKind::Graphic];

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(RandomKind::Uniform),
            "partition" => Ok(RandomKind::Partition),
            "graphic" => Ok(RandomKind::Graphic),
            "knapsack" => Ok(RandomKind::Knapsack),
            other => Err(Error::InvalidParam(format!("unknown random kind {other:?}"))),
        }
    }
}

/// Knapsack capacity of random instances; sizes are multiples of 1/2 up to 4.
pub const RANDOM_CAPACITY: i128 = 20;
/// Largest size of a random knapsack agent.
pub const RANDOM_MAX_SIZE: i128 = 4;

/// Seeded random instance with `m` agents and at most `d` votes per agent.
pub fn gen_random(kind: RandomKind, m: usize, d: usize, binary: bool, seed: u64) -> Result<Instance> {
    if m == 0 || m > MAX_AGENTS {
        return Err(Error::InvalidParam(format!("m = {m} must be in 1..={MAX_AGENTS}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let system = match kind {
        RandomKind::Uniform => IndependenceSystem::uniform(m, rng.gen_range(1..=m / 2 + 1)),
        RandomKind::Partition => {
            let blocks = rng.gen_range(1..=m.min(3));
            let mut members = vec![AgentSubset::EMPTY; blocks];
            for i in 0..m {
                // first `blocks` agents seed one block each so none is empty
                let b = if i < blocks { i } else { rng.gen_range(0..blocks) };
                members[b].insert(i);
            }
            let caps = members.iter().map(|b| rng.gen_range(1..=b.len())).collect();
            IndependenceSystem::Partition(PartitionMatroid::new(m, members, caps)?)
        }
        RandomKind::Graphic => {
            let n = (2..).find(|n| n * (n - 1) / 2 >= m).expect("some n fits");
            random_graph(&mut rng, n, m)?
        }
        RandomKind::Knapsack => {
            let sizes = (0..m).map(|_| rat(rng.gen_range(1..=2 * RANDOM_MAX_SIZE), 2)).collect();
            IndependenceSystem::Knapsack(KnapsackSystem::new(sizes, rat(RANDOM_CAPACITY, 1))?)
        }
    };
    let w = random_scores(&mut rng, m, d, binary)?;
    Instance::new(system, w)
}

/// Seeded random simple graph with `n` vertices and `m` edges, with random scores.
pub fn gen_random_graph(n: usize, m: usize, d: usize, binary: bool, seed: u64) -> Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let system = random_graph(&mut rng, n, m)?;
    let w = random_scores(&mut rng, m, d, binary)?;
    Instance::new(system, w)
}

fn random_graph(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Result<IndependenceSystem> {
    let pairs: Vec<(usize, usize)> = (0..n).tuple_combinations().collect();
    if m > pairs.len() || m > MAX_AGENTS {
        return Err(Error::InvalidParam(format!("a simple graph on {n} vertices cannot have {m} edges")));
    }
    let mut edges: Vec<_> = pairs.into_iter().choose_multiple(rng, m);
    edges.shuffle(rng);
    Ok(IndependenceSystem::Graphic(GraphicMatroid::new(n, edges, true)?))
}

/// Random row for agent `i`: up to `d` targets with unit or small rational weights.
pub fn random_row(rng: &mut impl Rng, m: usize, i: usize, d: usize, binary: bool) -> Vec<Rational> {
    let mut row = vec![rat(0, 1); m];
    let count = rng.gen_range(0..=d.min(m.saturating_sub(1)));
    for j in (0..m).filter(|&j| j != i).choose_multiple(rng, count) {
        row[j] = if binary { rat(1, 1) } else { rat(rng.gen_range(1..=12), rng.gen_range(1..=3)) };
    }
    row
}

fn random_scores(rng: &mut ChaCha8Rng, m: usize, d: usize, binary: bool) -> Result<ScoreMatrix> {
    let mut w = ScoreMatrix::zeros(m);
    for i in 0..m {
        for (j, v) in random_row(rng, m, i, d, binary).into_iter().enumerate() {
            if v > rat(0, 1) {
                w.set(i, j, v)?;
            }
        }
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::kpr;
    use crate::systems::brute_opt;

    fn set(ix: &[usize]) -> AgentSubset {
        ix.iter().copied().collect()
    }

    #[test]
    fn cycle_on_uniform() {
        let (inst, meta) = gen_cycle_girth(&IndependenceSystem::uniform(4, 2)).unwrap();
        assert_eq!((meta.dependent_set, meta.girth), (set(&[0, 1, 2]), 3));
        assert_eq!(inst.scores.get(0, 1), rat(1, 1));
        assert_eq!(inst.scores.get(2, 0), rat(1, 1));
        assert_eq!(inst.score(brute_opt(&inst).unwrap()), rat(2, 1));
    }

    #[test]
    fn star_on_uniform() {
        let (a, b, meta) = gen_star_dependent(&IndependenceSystem::uniform(4, 2)).unwrap();
        assert_eq!((meta.external, meta.designated), (Some(3), Some(0)));
        assert_eq!(a.score(brute_opt(&a).unwrap()), rat(2, 1));
        assert_eq!(b.score(brute_opt(&b).unwrap()), rat(4, 1));
        assert_eq!(a.scores.without_votes_of(0), b.scores.without_votes_of(0));
        assert!(gen_star_dependent(&IndependenceSystem::uniform(3, 2)).is_err());
    }

    #[test]
    fn fig4_scores() {
        for v in [Fig4Variant::A, Fig4Variant::B] {
            let inst = gen_fig4(v);
            let totals: Vec<_> = (0..5).map(|j| inst.scores.total(j)).collect();
            assert_eq!(totals, [10, 15, 25, 2, 10].map(|x| rat(x, 1)));
            assert_eq!(inst.scores.sparsity(), 1);
        }
    }

    #[test]
    fn fig4_kpr_goldens() {
        let third = rat(1, 3);
        let d = kpr(&gen_fig4(Fig4Variant::A), 1).unwrap();
        assert_eq!(d.support(), &[(set(&[0, 1]), third), (set(&[2]), third), (set(&[4]), third)]);
        let d = kpr(&gen_fig4(Fig4Variant::B), 1).unwrap();
        assert_eq!(d.support(), &[(set(&[0, 1, 3]), third), (set(&[2]), third), (set(&[4]), third)]);
    }

    #[test]
    fn wheel_shape() {
        let w = gen_wheel(4).unwrap();
        assert_eq!(w.m(), 6);
        assert_eq!(w.scores.triplets().count(), 3);
        assert_eq!(w.score(brute_opt(&w).unwrap()), rat(3, 1));
        assert_eq!(gen_wheel(9).unwrap().m(), 16);
        assert!(gen_wheel(3).is_err());
    }

    #[test]
    fn random_is_deterministic_and_in_class() {
        for kind in RandomKind::ALL {
            let a = gen_random(kind, 9, 1, true, 7).unwrap();
            assert_eq!(a, gen_random(kind, 9, 1, true, 7).unwrap());
            assert!(a.scores.sparsity() <= 1 && a.scores.is_binary());
            let b = gen_random(kind, 9, 3, false, 8).unwrap();
            assert!(b.scores.sparsity() <= 3);
        }
        let g = gen_random_graph(4, 6, 2, true, 1).unwrap();
        assert_eq!(g.system.as_graphic().unwrap().vertex_count(), 4);
        assert!(gen_random_graph(3, 4, 1, true, 1).is_err());
    }
}

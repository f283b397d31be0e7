//! Exact and sampled output distributions of mechanisms.
//!
//! Exact mode enumerates every realization of a mechanism's internal
//! randomness and weights them uniformly. Sampling mode draws realization
//! `t` from a ChaCha stream keyed by `(seed, t)`, so sequential and parallel
//! runs see the same draws and produce identical reports.

use std::collections::HashMap;
use std::fmt;

use itertools::Itertools;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matroid::SelectionDistribution;
use crate::mechanisms::{
    check_vp_class, dkpr, kpr, mpr, partition_run, select_from_parts, vertex_partition, Bipartition, VpMode,
};
use crate::scores::ScoreMatrix;
use crate::subset::AgentSubset;
use crate::systems::{opt, Instance};
use crate::Rational;

/// Largest ground size for enumerating all bipartitions.
pub const BIPARTITION_AGENT_LIMIT: usize = 20;

/// Largest number of permutation pairs enumerated exactly.
pub const PERMUTATION_BUDGET: u128 = 10_000_000;

/// Confidence level of reported half-widths is `1 - CONFIDENCE_DELTA`.
pub const CONFIDENCE_DELTA: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Mechanism {
    Partition,
    Kpr { d: usize },
    Dkpr { d: usize, s_max: Rational },
    Mpr,
    VertexPartition(VpMode),
}

impl Mechanism {
    pub fn name(&self) -> &'static str {
        match self {
            Mechanism::Partition => "partition",
            Mechanism::Kpr { .. } => "kpr",
            Mechanism::Dkpr { .. } => "dkpr",
            Mechanism::Mpr => "mpr",
            Mechanism::VertexPartition(_) => "vertex_partition",
        }
    }

    /// Name including parameters, e.g. `kpr(d=1)`.
    pub fn label(&self) -> String {
        match self {
            Mechanism::Kpr { d } => format!("kpr(d={d})"),
            Mechanism::Dkpr { d, s_max } => format!("dkpr(d={d},smax={s_max})"),
            Mechanism::VertexPartition(VpMode::Permissive) => "vertex_partition(permissive)".into(),
            m => m.name().into(),
        }
    }

    pub fn randomness(&self, instance: &Instance) -> RandomnessSpec {
        match self {
            Mechanism::Partition => RandomnessSpec::Bipartitions { m: instance.m() },
            Mechanism::VertexPartition(_) => RandomnessSpec::PermutationPairs {
                n: instance.system.as_graphic().map_or(0, |g| g.vertex_count()),
                m: instance.m(),
            },
            Mechanism::Dkpr { .. } => RandomnessSpec::Deterministic,
            Mechanism::Kpr { .. } | Mechanism::Mpr => RandomnessSpec::Direct,
        }
    }

    /// The approximation ratio guaranteed on the mechanism's instance class.
    pub fn guarantee(&self, instance: &Instance) -> Result<Rational> {
        Ok(match self {
            Mechanism::Partition => Rational::new(1, 4),
            Mechanism::Kpr { d } => Rational::new(1, *d as i128 + 2),
            Mechanism::Dkpr { d, s_max } => {
                let cap = instance
                    .system
                    .as_knapsack()
                    .ok_or(Error::WrongKind { expected: "knapsack", found: instance.system.kind_name() })?
                    .capacity();
                Rational::from_integer(1) - *s_max * Rational::from_integer(*d as i128 + 1) / cap
            }
            Mechanism::Mpr => Rational::new(1, 2),
            Mechanism::VertexPartition(_) => Rational::new(1, 3),
        })
    }
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(&self.label())
    }
}

/// Shape of a mechanism's internal randomness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RandomnessSpec {
    /// Uniform over the `2^m` bipartitions.
    Bipartitions { m: usize },
    /// Uniform over vertex and edge permutations, `n! * m!` pairs.
    PermutationPairs { n: usize, m: usize },
    Deterministic,
    /// The mechanism returns its lottery in closed form.
    Direct,
}

impl RandomnessSpec {
    /// Number of equally likely realizations (saturating), or 1 for closed forms.
    pub fn realizations(&self) -> u128 {
        match *self {
            RandomnessSpec::Bipartitions { m } => 1u128.checked_shl(m as u32).unwrap_or(u128::MAX),
            RandomnessSpec::PermutationPairs { n, m } => factorial(n).saturating_mul(factorial(m)),
            RandomnessSpec::Deterministic | RandomnessSpec::Direct => 1,
        }
    }
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).fold(1u128, |acc, k| acc.saturating_mul(k))
}

type Counts = HashMap<AgentSubset, u64>;

fn merge(mut a: Counts, b: Counts) -> Counts {
    for (s, c) in b {
        *a.entry(s).or_default() += c;
    }
    a
}

/// The exact output distribution of `mechanism` on `instance`.
pub fn exact_distribution(instance: &Instance, mechanism: &Mechanism) -> Result<SelectionDistribution> {
    match mechanism {
        Mechanism::Partition => {
            let m = instance.m();
            if m > BIPARTITION_AGENT_LIMIT {
                return Err(Error::BudgetExceeded {
                    realizations: mechanism.randomness(instance).realizations(),
                    budget: 1 << BIPARTITION_AGENT_LIMIT,
                });
            }
            let counts = (0..1u64 << m)
                .into_par_iter()
                .try_fold(Counts::new, |mut acc, idx| {
                    let s = partition_run(instance, &Bipartition::from_index(m, idx)?)?;
                    *acc.entry(s).or_default() += 1;
                    Ok::<_, Error>(acc)
                })
                .try_reduce(Counts::new, |a, b| Ok(merge(a, b)))?;
            SelectionDistribution::from_counts(counts)
        }
        Mechanism::VertexPartition(mode) => {
            check_vp_class(instance, *mode)?;
            let realizations = mechanism.randomness(instance).realizations();
            if realizations > PERMUTATION_BUDGET {
                return Err(Error::BudgetExceeded { realizations, budget: PERMUTATION_BUDGET });
            }
            let g = instance.system.as_graphic().expect("checked graphic");
            let (n, m) = (g.vertex_count(), instance.m());
            let etas: Vec<Vec<usize>> = (0..n).permutations(n).collect();
            let counts = etas
                .par_iter()
                .map(|eta| {
                    let parts = vertex_partition(g, eta).expect("valid permutation");
                    let mut acc = Counts::new();
                    for pi in (0..m).permutations(m) {
                        *acc.entry(select_from_parts(&instance.scores, &parts, &pi)).or_default() += 1;
                    }
                    acc
                })
                .reduce(Counts::new, merge);
            SelectionDistribution::from_counts(counts)
        }
        Mechanism::Dkpr { d, s_max } => Ok(SelectionDistribution::point_mass(dkpr(instance, *d, *s_max)?)),
        Mechanism::Kpr { d } => kpr(instance, *d),
        Mechanism::Mpr => mpr(instance),
    }
}

/// Expected total score of the set drawn from `dist`.
pub fn expected_score(dist: &SelectionDistribution, w: &ScoreMatrix) -> Rational {
    dist.expected_score(w)
}

/// Sampled marginals and expected score with 99% Hoeffding half-widths.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub mechanism: String,
    pub trials: u64,
    pub seed: u64,
    /// Number of trials selecting each agent.
    pub selection_counts: Vec<u64>,
    /// Exact sum of the scores of the sampled sets.
    pub score_sum: Rational,
    /// Upper bound on the score of any output, used as the Hoeffding range.
    pub score_range: Rational,
}

impl EstimateReport {
    pub fn marginal(&self, i: usize) -> Rational {
        Rational::new(self.selection_counts[i] as i128, self.trials as i128)
    }

    pub fn marginals(&self) -> Vec<Rational> {
        (0..self.selection_counts.len()).map(|i| self.marginal(i)).collect()
    }

    pub fn expected_score(&self) -> Rational {
        self.score_sum / Rational::from_integer(self.trials as i128)
    }

    /// Half-width of a 99% interval for any marginal.
    pub fn marginal_half_width(&self) -> f64 {
        hoeffding_half_width(1.0, self.trials)
    }

    /// Half-width of a 99% interval for the expected score.
    pub fn score_half_width(&self) -> f64 {
        hoeffding_half_width(to_f64(self.score_range), self.trials)
    }
}

/// `range * sqrt(ln(2 / delta) / (2 n))` with `delta = 0.01`.
pub fn hoeffding_half_width(range: f64, trials: u64) -> f64 {
    range * ((2.0 / CONFIDENCE_DELTA).ln() / (2.0 * trials as f64)).sqrt()
}

/// Trials needed for a 99% half-width of at most `eps` on a quantity of the given range.
pub fn trials_for_half_width(range: f64, eps: f64) -> u64 {
    ((range / eps).powi(2) * (2.0 / CONFIDENCE_DELTA).ln() / 2.0).ceil() as u64
}

pub fn to_f64(q: Rational) -> f64 {
    q.numer().to_f64().unwrap_or(f64::NAN) / q.denom().to_f64().unwrap_or(f64::NAN)
}

/// Generator for trial `t`: independent stream `t` of the seeded ChaCha generator.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Sampler for one realization of a mechanism's output.
enum Sampler<'a> {
    Bipartition(&'a Instance),
    Permutations { instance: &'a Instance, n: usize },
    Table { cumulative: Vec<(u128, AgentSubset)>, scale: u128 },
}

impl Sampler<'_> {
    fn draw(&self, rng: &mut ChaCha8Rng) -> Result<AgentSubset> {
        match self {
            Sampler::Bipartition(inst) => {
                let m = inst.m();
                let bits = rng.gen::<u64>() & AgentSubset::full(m).bits();
                partition_run(inst, &Bipartition::from_index(m, bits)?)
            }
            Sampler::Permutations { instance, n } => {
                let mut eta: Vec<usize> = (0..*n).collect();
                let mut pi: Vec<usize> = (0..instance.m()).collect();
                eta.shuffle(rng);
                pi.shuffle(rng);
                let g = instance.system.as_graphic().expect("checked graphic");
                Ok(select_from_parts(&instance.scores, &vertex_partition(g, &eta)?, &pi))
            }
            Sampler::Table { cumulative, scale } => {
                let u = rng.gen_range(0..*scale);
                Ok(cumulative.iter().find(|(c, _)| u < *c).expect("total mass one").1)
            }
        }
    }
}

fn table(dist: &SelectionDistribution) -> Sampler<'static> {
    let scale = dist.support().iter().fold(1i128, |l, (_, p)| l.lcm(p.denom()));
    let mut acc = 0u128;
    let cumulative = dist
        .support()
        .iter()
        .map(|(s, p)| {
            acc += (*p * Rational::from_integer(scale)).to_integer() as u128;
            (acc, *s)
        })
        .collect();
    Sampler::Table { cumulative, scale: scale as u128 }
}

#[derive(Clone)]
struct Tally {
    counts: Vec<u64>,
    score: Rational,
}

impl Tally {
    fn new(m: usize) -> Self {
        Tally { counts: vec![0; m], score: Rational::zero() }
    }

    fn add(mut self, s: AgentSubset, w: &ScoreMatrix) -> Self {
        for i in s.iter() {
            self.counts[i] += 1;
        }
        self.score += w.set_score(s);
        self
    }

    fn merge(mut self, other: Tally) -> Self {
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
        self.score += other.score;
        self
    }
}

/// Estimate marginals and expected score from `trials` seeded draws.
///
/// With `parallel` set the trials are spread over the thread pool; the
/// report is identical to the sequential one.
pub fn monte_carlo(
    instance: &Instance,
    mechanism: &Mechanism,
    trials: u64,
    seed: u64,
    parallel: bool,
) -> Result<EstimateReport> {
    if trials == 0 {
        return Err(Error::InvalidParam("trials must be at least 1".into()));
    }
    let sampler = match mechanism {
        Mechanism::Partition => Sampler::Bipartition(instance),
        Mechanism::VertexPartition(mode) => {
            check_vp_class(instance, *mode)?;
            let n = instance.system.as_graphic().expect("checked graphic").vertex_count();
            Sampler::Permutations { instance, n }
        }
        direct => table(&exact_distribution(instance, direct)?),
    };
    let score_range = instance.score(opt(instance)?);
    let w = &instance.scores;
    let m = instance.m();
    let run = |t: u64| sampler.draw(&mut trial_rng(seed, t));
    let tally = if parallel {
        (0..trials)
            .into_par_iter()
            .try_fold(|| Tally::new(m), |acc, t| Ok::<_, Error>(acc.add(run(t)?, w)))
            .try_reduce(|| Tally::new(m), |a, b| Ok(a.merge(b)))?
    } else {
        (0..trials).try_fold(Tally::new(m), |acc, t| Ok::<_, Error>(acc.add(run(t)?, w)))?
    };
    Ok(EstimateReport {
        mechanism: mechanism.label(),
        trials,
        seed,
        selection_counts: tally.counts,
        score_sum: tally.score,
        score_range,
    })
}

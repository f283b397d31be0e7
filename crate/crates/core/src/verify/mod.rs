//! Exact checks of feasibility, impartiality, rank-bounded marginals and
//! approximation ratios, plus the instance batteries they run on.

pub mod generators;
pub mod lemmas;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::engine::{exact_distribution, Mechanism};
use crate::error::{Error, Result};
use crate::matroid::SelectionDistribution;
use crate::mechanisms::VpMode;
use crate::scores::validate_row;
use crate::subset::AgentSubset;
use crate::systems::{opt, IndependenceSystem, Instance};
use crate::Rational;

use generators::{
    gen_chain, gen_cycle_girth, gen_fig4, gen_fig5b, gen_mutual_pair, gen_path, gen_random, gen_random_graph,
    gen_star_dependent, gen_triangle, gen_wheel, random_row, Fig4Variant, RandomKind,
};

/// Largest ground size for the rank-marginal check, which enumerates all subsets.
pub const RANK_CHECK_LIMIT: usize = 16;

/// Largest ground size for which single-vote rows are tried exhaustively.
pub const EXHAUSTIVE_ROW_LIMIT: usize = 8;

/// Number of seeded random rows in the standard deviation battery.
pub const RANDOM_ROWS: usize = 5;

/// Outcome of one named check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    /// Number of cases examined.
    pub cases: u64,
    /// Description of the first failing case.
    pub violation: Option<String>,
}

impl Check {
    pub fn pass(name: impl Into<String>, cases: u64) -> Self {
        Check { name: name.into(), cases, violation: None }
    }

    pub fn fail(name: impl Into<String>, cases: u64, why: String) -> Self {
        Check { name: name.into(), cases, violation: Some(why) }
    }

    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

/// Rows the mechanism's instance class admits for one agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RowClass {
    pub max_votes: Option<usize>,
    pub binary: bool,
}

impl RowClass {
    pub fn of(mechanism: &Mechanism) -> Self {
        match mechanism {
            Mechanism::Partition => RowClass { max_votes: None, binary: false },
            Mechanism::Kpr { d } | Mechanism::Dkpr { d, .. } => RowClass { max_votes: Some(*d), binary: false },
            Mechanism::Mpr => RowClass { max_votes: Some(1), binary: false },
            Mechanism::VertexPartition(VpMode::Guarantee) => RowClass { max_votes: None, binary: true },
            Mechanism::VertexPartition(VpMode::Permissive) => RowClass { max_votes: None, binary: false },
        }
    }

    pub fn check(&self, row: &[Rational]) -> Result<()> {
        let votes = row.iter().filter(|v| **v > Rational::from_integer(0)).count();
        if let Some(d) = self.max_votes {
            if votes > d {
                return Err(Error::ClassViolation(format!("row has {votes} positive entries, class allows {d}")));
            }
        }
        if self.binary && row.iter().any(|v| *v != Rational::from_integer(0) && *v != Rational::from_integer(1)) {
            return Err(Error::ClassViolation("row is not binary".into()));
        }
        Ok(())
    }
}

/// Replacement rows for one agent's votes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeviationPlan {
    pub agent: usize,
    pub rows: Vec<Vec<Rational>>,
}

impl DeviationPlan {
    /// Zero row, original row, seeded random in-class rows and, for small
    /// instances, every single unit vote.
    pub fn standard(instance: &Instance, mechanism: &Mechanism, agent: usize, seed: u64) -> Self {
        let m = instance.m();
        let class = RowClass::of(mechanism);
        let mut rows = vec![vec![Rational::from_integer(0); m], instance.scores.row(agent).to_vec()];
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (agent as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let d = class.max_votes.unwrap_or(m.saturating_sub(1));
        rows.extend((0..RANDOM_ROWS).map(|_| random_row(&mut rng, m, agent, d, class.binary)));
        if m <= EXHAUSTIVE_ROW_LIMIT {
            for j in (0..m).filter(|&j| j != agent) {
                let mut row = vec![Rational::from_integer(0); m];
                row[j] = Rational::from_integer(1);
                rows.push(row);
            }
        }
        rows.dedup();
        DeviationPlan { agent, rows }
    }
}

/// Exact selection probability of `plan.agent` is identical under every replacement row.
pub fn check_impartiality(instance: &Instance, mechanism: &Mechanism, plan: &DeviationPlan) -> Result<Check> {
    let i = plan.agent;
    let name = format!("impartiality {} agent {i}", mechanism.label());
    let class = RowClass::of(mechanism);
    let baseline = exact_distribution(instance, mechanism)?.marginal(i);
    for row in &plan.rows {
        validate_row(instance.m(), i, row)?;
        class.check(row)?;
        let deviated = instance.with_scores(instance.scores.with_row(i, row)?)?;
        let p = exact_distribution(&deviated, mechanism)?.marginal(i);
        if p != baseline {
            return Ok(Check::fail(
                name,
                plan.rows.len() as u64,
                format!("row {} moves marginal from {baseline} to {p}", fmt_row(row)),
            ));
        }
    }
    Ok(Check::pass(name, plan.rows.len() as u64))
}

fn fmt_row(row: &[Rational]) -> String {
    format!("[{}]", row.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", "))
}

/// Impartiality of every agent under its standard deviation plan.
pub fn check_impartiality_all(instance: &Instance, mechanism: &Mechanism, seed: u64) -> Result<Check> {
    let name = format!("impartiality {}", mechanism.label());
    let mut cases = 0;
    for agent in 0..instance.m() {
        let plan = DeviationPlan::standard(instance, mechanism, agent, seed);
        let c = check_impartiality(instance, mechanism, &plan)?;
        cases += c.cases;
        if let Some(v) = c.violation {
            return Ok(Check::fail(name, cases, format!("agent {agent}: {v}")));
        }
    }
    Ok(Check::pass(name, cases))
}

/// Every support set of the exact output distribution is independent.
///
/// The support is exactly the set of outputs over all realizations of the
/// mechanism's randomness, so this covers every realization.
pub fn check_feasibility(instance: &Instance, mechanism: &Mechanism) -> Result<Check> {
    let name = format!("feasibility {}", mechanism.label());
    let dist = exact_distribution(instance, mechanism)?;
    let cases = mechanism.randomness(instance).realizations().min(u64::MAX as u128) as u64;
    Ok(check_support(&instance.system, &dist, name, cases))
}

pub(crate) fn check_support(
    system: &IndependenceSystem,
    dist: &SelectionDistribution,
    name: String,
    cases: u64,
) -> Check {
    match dist.dependent_support_set(system) {
        Some(s) => Check::fail(name, cases, format!("support set {s} is dependent")),
        None => Check::pass(name, cases),
    }
}

/// A set whose marginal mass exceeds its rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankWitness {
    pub set: AgentSubset,
    pub sum: Rational,
    pub rank: usize,
}

/// The first subset (in enumeration order) whose marginal mass exceeds its rank.
pub fn rank_marginal_violation(system: &IndependenceSystem, dist: &SelectionDistribution) -> Result<Option<RankWitness>> {
    let m = system.ground_size();
    if m > RANK_CHECK_LIMIT {
        return Err(Error::GroundTooLarge { m, limit: RANK_CHECK_LIMIT, hint: "rank check enumerates all subsets" });
    }
    let p = dist.marginals(m);
    for s in AgentSubset::all(m) {
        let sum = p.sum_over(s);
        let rank = system.rank(s);
        if sum > Rational::from_integer(rank as i128) {
            return Ok(Some(RankWitness { set: s, sum, rank }));
        }
    }
    Ok(None)
}

/// Marginal mass of every subset is at most its rank.
pub fn check_rank_marginals(system: &IndependenceSystem, dist: &SelectionDistribution) -> Result<Check> {
    let cases = 1u64 << system.ground_size().min(63);
    Ok(match rank_marginal_violation(system, dist)? {
        Some(w) => Check::fail("rank marginals", cases, format!("{}: sum {} > rank {}", w.set, w.sum, w.rank)),
        None => Check::pass("rank marginals", cases),
    })
}

/// Exact approximation ratio of one mechanism on one instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatioReport {
    pub instance_id: String,
    pub mechanism: String,
    pub m: usize,
    pub class: String,
    pub expected_score: Rational,
    pub opt_score: Rational,
    pub ratio: Rational,
    pub bound: Rational,
    pub pass: bool,
}

/// Expected score over optimum, compared with `bound`.
pub fn ratio(instance: &Instance, mechanism: &Mechanism, bound: Rational) -> Result<RatioReport> {
    let opt_score = instance.score(opt(instance)?);
    if opt_score == Rational::from_integer(0) {
        return Err(Error::ZeroOptimum);
    }
    let expected_score = exact_distribution(instance, mechanism)?.expected_score(&instance.scores);
    let ratio = expected_score / opt_score;
    Ok(RatioReport {
        instance_id: String::new(),
        mechanism: mechanism.label(),
        m: instance.m(),
        class: instance.system.kind_name().to_string(),
        expected_score,
        opt_score,
        ratio,
        bound,
        pass: ratio >= bound,
    })
}

/// Lowest-ratio report over a battery, skipping instances with zero optimum.
pub fn worst_ratio(battery: &[(String, Instance)], mechanism: &Mechanism, bound: Rational) -> Result<Option<RatioReport>> {
    let mut worst: Option<RatioReport> = None;
    for (id, inst) in battery {
        let mut r = match ratio(inst, mechanism, bound) {
            Err(Error::ZeroOptimum) => continue,
            other => other?,
        };
        r.instance_id = id.clone();
        if worst.as_ref().is_none_or(|w| r.ratio < w.ratio) {
            worst = Some(r);
        }
    }
    Ok(worst)
}

/// Generated instances in a mechanism's class: the worked examples and
/// adversarial constructions for it, topped up with seeded random
/// instances to `count`.
pub fn instance_battery(mechanism: &Mechanism, count: usize, seed: u64) -> Result<Vec<(String, Instance)>> {
    let mut out: Vec<(String, Instance)> = Vec::new();
    let mut k = 0u64;
    let mut next_seed = || {
        k += 1;
        seed.wrapping_mul(1_000_003).wrapping_add(k)
    };
    match mechanism {
        Mechanism::Partition => {
            for (m, kk) in [(4, 2), (5, 3), (6, 1)] {
                let sys = IndependenceSystem::uniform(m, kk);
                out.push((format!("cycle_uniform_{m}_{kk}"), gen_cycle_girth(&sys)?.0));
                let (a, b, _) = gen_star_dependent(&sys)?;
                out.push((format!("star_uniform_{m}_{kk}"), a));
                out.push((format!("star_prime_uniform_{m}_{kk}"), b));
            }
            out.push(("mutual_pair".into(), gen_mutual_pair()));
            out.push(("triangle".into(), gen_triangle()));
            while out.len() < count {
                let s = next_seed();
                let kind = RandomKind::ALL[(s % 4) as usize];
                let m = 2 + (s / 4 % 9) as usize;
                let d = 1 + (s / 36 % 3) as usize;
                out.push((format!("random_{kind:?}_m{m}_d{d}_s{s}").to_lowercase(), gen_random(kind, m, d, s % 2 == 0, s)?));
            }
        }
        Mechanism::Kpr { d } | Mechanism::Dkpr { d, .. } => {
            if *d >= 1 {
                out.push(("fig4a".into(), gen_fig4(Fig4Variant::A)));
                out.push(("fig4b".into(), gen_fig4(Fig4Variant::B)));
                out.push(("fig5b".into(), gen_fig5b(Rational::new(1, 100))?));
                out.push(("chain".into(), gen_chain()));
            }
            out.retain(|(_, inst)| in_class(mechanism, inst));
            while out.len() < count {
                let s = next_seed();
                let m = 2 + (s % 11) as usize;
                let inst = gen_random(RandomKind::Knapsack, m, *d, s % 2 == 0, s)?;
                if !in_class(mechanism, &inst) {
                    return Err(Error::InvalidParam(format!("random knapsack instances do not fit {mechanism}")));
                }
                out.push((format!("random_knapsack_m{m}_d{d}_s{s}"), inst));
            }
        }
        Mechanism::Mpr => {
            out.push(("triangle".into(), gen_triangle()));
            out.push(("mutual_pair".into(), gen_mutual_pair()));
            out.push(("path".into(), gen_path()));
            while out.len() < count {
                let s = next_seed();
                let kind = RandomKind::MATROIDS[(s % 3) as usize];
                let m = 2 + (s / 3 % 11) as usize;
                out.push((format!("random_{kind:?}_m{m}_d1_s{s}").to_lowercase(), gen_random(kind, m, 1, s % 2 == 0, s)?));
            }
        }
        Mechanism::VertexPartition(mode) => {
            out.push(("path".into(), gen_path()));
            out.push(("wheel4".into(), gen_wheel(4)?));
            while out.len() < count {
                let s = next_seed();
                let n = 3 + (s % 2) as usize;
                let m = 2 + (s / 2 % (n * (n - 1) / 2 - 1) as u64) as usize;
                let d = 1 + (s / 16 % 3) as usize;
                let binary = *mode == VpMode::Guarantee || s % 2 == 0;
                out.push((format!("random_graph_n{n}_m{m}_d{d}_s{s}"), gen_random_graph(n, m, d, binary, s)?));
            }
        }
    }
    out.truncate(count.max(1));
    Ok(out)
}

/// Whether `instance` satisfies the preconditions of `mechanism`'s guarantee.
pub fn in_class(mechanism: &Mechanism, instance: &Instance) -> bool {
    let sparsity = instance.scores.sparsity();
    match mechanism {
        Mechanism::Partition => true,
        Mechanism::Kpr { d } => instance.system.as_knapsack().is_some() && sparsity <= *d,
        Mechanism::Dkpr { d, s_max } => instance.system.as_knapsack().is_some_and(|k| {
            sparsity <= *d && k.max_size() <= *s_max && *s_max * Rational::from_integer(*d as i128 + 1) < k.capacity()
        }),
        Mechanism::Mpr => instance.system.is_matroid() && sparsity <= 1,
        Mechanism::VertexPartition(mode) => {
            instance.system.as_graphic().is_some_and(|g| g.is_simple())
                && (*mode == VpMode::Permissive || instance.scores.is_binary())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    Feasibility,
    Impartiality,
    RankMarginals,
    Bounds,
    Lemmas,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Feasibility, Suite::Impartiality, Suite::RankMarginals, Suite::Bounds, Suite::Lemmas];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Feasibility => "feasibility",
            Suite::Impartiality => "impartiality",
            Suite::RankMarginals => "rank_marginals",
            Suite::Bounds => "bounds",
            Suite::Lemmas => "lemmas",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidParam(format!("unknown suite {s:?}")))
    }
}

/// Run one suite of checks for `mechanism` on `instance`.
pub fn run_suite(suite: Suite, instance: &Instance, mechanism: &Mechanism, seed: u64) -> Result<Vec<Check>> {
    Ok(match suite {
        Suite::Feasibility => vec![check_feasibility(instance, mechanism)?],
        Suite::Impartiality => vec![check_impartiality_all(instance, mechanism, seed)?],
        Suite::RankMarginals => vec![check_rank_marginals(&instance.system, &exact_distribution(instance, mechanism)?)?],
        Suite::Bounds => {
            let bound = mechanism.guarantee(instance)?;
            vec![match ratio(instance, mechanism, bound) {
                Ok(r) if r.pass => Check::pass("bounds", 1),
                Ok(r) => Check::fail("bounds", 1, format!("ratio {} < bound {}", r.ratio, r.bound)),
                Err(Error::ZeroOptimum) => Check::pass("bounds (zero optimum, vacuous)", 0),
                Err(e) => return Err(e),
            }]
        }
        Suite::Lemmas => lemmas::lemma_suite(instance, mechanism)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;

    fn set(ix: &[usize]) -> AgentSubset {
        ix.iter().copied().collect()
    }

    #[test]
    fn identity_deviation_passes() {
        let inst = gen_triangle();
        let plan = DeviationPlan { agent: 2, rows: vec![inst.scores.row(2).to_vec()] };
        assert!(check_impartiality(&inst, &Mechanism::Mpr, &plan).unwrap().passed());
    }

    #[test]
    fn mpr_triangle_large_vote() {
        let inst = gen_triangle();
        let plan = DeviationPlan { agent: 2, rows: vec![vec![rat(100, 1), rat(0, 1), rat(0, 1)]] };
        assert!(check_impartiality(&inst, &Mechanism::Mpr, &plan).unwrap().passed());
    }

    #[test]
    fn kpr_fig4a_small_agent_deviation() {
        let inst = gen_fig4(Fig4Variant::A);
        let mut row = inst.scores.row(3).to_vec();
        row[2] = rat(10, 1);
        let plan = DeviationPlan { agent: 3, rows: vec![row.clone()] };
        assert!(check_impartiality(&inst, &Mechanism::Kpr { d: 1 }, &plan).unwrap().passed());
        let deviated = inst.with_scores(inst.scores.with_row(3, &row).unwrap()).unwrap();
        assert_eq!(crate::mechanisms::kpr(&deviated, 1).unwrap().marginal(3), rat(0, 1));
    }

    #[test]
    fn out_of_class_rows_rejected() {
        let inst = gen_triangle();
        let plan = DeviationPlan { agent: 0, rows: vec![vec![rat(0, 1), rat(1, 1), rat(1, 1)]] };
        assert!(matches!(check_impartiality(&inst, &Mechanism::Mpr, &plan), Err(Error::ClassViolation(_))));
    }

    #[test]
    fn rank_marginal_examples() {
        let tri = gen_triangle();
        let point = SelectionDistribution::point_mass(set(&[0, 1]));
        assert!(check_rank_marginals(&tri.system, &point).unwrap().passed());
        let mpr = crate::mechanisms::mpr(&tri).unwrap();
        assert!(check_rank_marginals(&tri.system, &mpr).unwrap().passed());
        let bad = SelectionDistribution::point_mass(AgentSubset::full(3));
        let w = rank_marginal_violation(&tri.system, &bad).unwrap().unwrap();
        assert!(w.sum > Rational::from_integer(w.rank as i128));
    }

    #[test]
    fn ratio_examples() {
        let r = ratio(&gen_mutual_pair(), &Mechanism::Partition, rat(1, 4)).unwrap();
        assert_eq!((r.ratio, r.pass), (rat(3, 4), true));
        let r = ratio(&gen_triangle(), &Mechanism::Mpr, rat(1, 2)).unwrap();
        assert_eq!((r.expected_score, r.opt_score, r.ratio), (rat(3, 1), rat(5, 1), rat(3, 5)));
        let r = ratio(&gen_path(), &Mechanism::VertexPartition(VpMode::Guarantee), rat(1, 3)).unwrap();
        assert_eq!(r.ratio, rat(5, 6));
        let zero = Instance::new(IndependenceSystem::uniform(2, 1), crate::ScoreMatrix::zeros(2)).unwrap();
        assert_eq!(ratio(&zero, &Mechanism::Mpr, rat(1, 2)), Err(Error::ZeroOptimum));
    }

    #[test]
    fn batteries_stay_in_class() {
        let mechs = [
            Mechanism::Partition,
            Mechanism::Kpr { d: 2 },
            Mechanism::Mpr,
            Mechanism::VertexPartition(VpMode::Guarantee),
        ];
        for mech in &mechs {
            let b = instance_battery(mech, 40, 1).unwrap();
            assert_eq!(b.len(), 40);
            let class = RowClass::of(mech);
            for (id, inst) in &b {
                assert!(inst.m() <= 12, "{id}");
                for i in 0..inst.m() {
                    class.check(inst.scores.row(i)).unwrap_or_else(|e| panic!("{id}: {e}"));
                }
            }
        }
    }
}

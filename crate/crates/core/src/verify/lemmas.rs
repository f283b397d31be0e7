//! Structural inequalities behind the guarantees, checked exactly by
//! enumeration on small instances.

use itertools::Itertools;
use num_traits::Zero;

use crate::engine::{exact_distribution, Mechanism};
use crate::error::{Error, Result};
use crate::matroid::{greedy_basis, require_matroid, span};
use crate::mechanisms::{
    best_from_partition, check_vp_class, induced_from_parts, kpr_run, knapsack_greedy, select_from_parts,
    vertex_partition, VpMode,
};
use crate::subset::{ensure_enumerable, AgentSubset};
use crate::systems::{max_weight_independent, opt, IndependenceSystem, Instance};
use crate::verify::Check;
use crate::Rational;

/// Largest ground size for the pairwise basis and span checks.
pub const PAIRWISE_LIMIT: usize = 8;

/// Every greedy prefix of total size `C'` scores at least `min(C'/C, 1)` of the optimum.
pub fn check_greedy_prefix_bound(instance: &Instance) -> Result<Check> {
    let name = "greedy prefix bound";
    let ks = instance
        .system
        .as_knapsack()
        .ok_or(Error::WrongKind { expected: "knapsack", found: instance.system.kind_name() })?;
    let best = instance.score(opt(instance)?);
    let greedy = knapsack_greedy(instance)?;
    let (mut size, mut prefix) = (Rational::zero(), AgentSubset::EMPTY);
    for (l, &i) in greedy.order.iter().enumerate() {
        size += ks.sizes()[i];
        prefix.insert(i);
        let frac = (size / ks.capacity()).min(Rational::from_integer(1));
        if instance.score(prefix) < frac * best {
            return Ok(Check::fail(
                name,
                l as u64 + 1,
                format!("prefix {prefix} scores {} < {frac} * {best}", instance.score(prefix)),
            ));
        }
    }
    Ok(Check::pass(name, greedy.order.len() as u64))
}

/// The extended greedy set lies inside the randomized knapsack mechanism's candidate set.
pub fn check_extended_greedy_in_selection(instance: &Instance, d: usize) -> Result<Check> {
    let name = "extended greedy in candidates";
    match kpr_run(instance, d) {
        Ok(run) => Ok(Check::pass(name, run.greedy.order.len() as u64)),
        Err(Error::Invariant(why)) => Ok(Check::fail(name, 1, why)),
        Err(e) => Err(e),
    }
}

fn bases(system: &IndependenceSystem) -> Vec<AgentSubset> {
    let m = system.ground_size();
    let r = system.rank(AgentSubset::full(m));
    AgentSubset::all(m).filter(|s| s.len() == r && system.is_independent(*s)).collect()
}

/// For bases `B`, `B'` and `x` in `B - B'`, some `y` in `B' - B` makes both
/// `B' + x - y` and `B + y - x` bases.
pub fn check_strong_base_exchange(system: &IndependenceSystem) -> Result<Check> {
    let name = "strong base exchange";
    require_matroid(system)?;
    pairwise_guard(system)?;
    let bs = bases(system);
    let r = system.rank(AgentSubset::full(system.ground_size()));
    let is_base = |s: AgentSubset| s.len() == r && system.is_independent(s);
    let mut cases = 0;
    for &b in &bs {
        for &b2 in &bs {
            for x in b.difference(b2).iter() {
                cases += 1;
                let ok = b2.difference(b).iter().any(|y| is_base(b2.with(x).without(y)) && is_base(b.with(y).without(x)));
                if !ok {
                    return Ok(Check::fail(name, cases, format!("no exchange for {x} between {b} and {b2}")));
                }
            }
        }
    }
    Ok(Check::pass(name, cases))
}

fn pairwise_guard(system: &IndependenceSystem) -> Result<()> {
    let m = system.ground_size();
    if m > PAIRWISE_LIMIT {
        return Err(Error::GroundTooLarge { m, limit: PAIRWISE_LIMIT, hint: "pairwise checks enumerate subset pairs" });
    }
    Ok(())
}

/// `S` contained in `T` implies `span(S)` contained in `span(T)`.
pub fn check_span_monotone(system: &IndependenceSystem) -> Result<Check> {
    let name = "span monotone";
    pairwise_guard(system)?;
    let m = system.ground_size();
    let spans: Vec<AgentSubset> = AgentSubset::all(m).map(|s| span(system, s)).collect::<Result<_>>()?;
    let mut cases = 0;
    for t in AgentSubset::all(m) {
        for s in t.subsets() {
            cases += 1;
            let (ss, st) = (spans[s.bits() as usize], spans[t.bits() as usize]);
            if !s.is_subset_of(ss) || !ss.is_subset_of(st) {
                return Ok(Check::fail(name, cases, format!("span({s}) = {ss} not within span({t}) = {st}")));
            }
        }
    }
    Ok(Check::pass(name, cases))
}

/// The optimal bases with one element deleted together cover at most twice the optimum's size.
pub fn check_runners_up_bound(instance: &Instance) -> Result<Check> {
    let name = "runners-up bound";
    let sys = &instance.system;
    let weights = instance.scores.totals();
    let b = greedy_basis(sys, &weights)?;
    let all = instance.ground();
    let mut union = AgentSubset::EMPTY;
    for e in 0..instance.m() {
        union = union.union(max_weight_independent(sys, &weights, all.without(e))?);
    }
    if union.len() > 2 * b.len() {
        return Ok(Check::fail(name, instance.m() as u64, format!("union {union} exceeds twice |{b}|")));
    }
    Ok(Check::pass(name, instance.m() as u64))
}

/// Exact expectations over all vertex and edge permutations, used by the
/// three graph inequalities below.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionExpectations {
    /// Score of the mechanism's output.
    pub selected: Rational,
    /// Sum over parts of the best induced score within the part.
    pub best_induced: Rational,
    /// Induced score of the per-part best set by induced scores.
    pub induced_best_from_partition: Rational,
    /// True score of the per-part best set by true scores (independent of `pi`).
    pub true_best_from_partition: Rational,
    pub opt: Rational,
}

/// Expectations over all `n! m!` permutation pairs on a simple graph.
pub fn partition_expectations(instance: &Instance) -> Result<PartitionExpectations> {
    check_vp_class(instance, VpMode::Permissive)?;
    let g = instance.system.as_graphic().expect("checked graphic");
    let (n, m) = (g.vertex_count(), instance.m());
    ensure_enumerable(n + m, "permutation enumeration")?;
    let w = &instance.scores;
    let totals = w.totals();
    let (mut sel, mut best, mut ibp, mut tbp, mut count) =
        (Rational::zero(), Rational::zero(), Rational::zero(), Rational::zero(), 0i128);
    for eta in (0..n).permutations(n) {
        let parts = vertex_partition(g, &eta)?;
        let true_bp = instance.score(best_from_partition(&parts, |e| totals[e]));
        for pi in (0..m).permutations(m) {
            let induced = induced_from_parts(w, &parts, &pi);
            let itotals = induced.totals();
            sel += w.set_score(select_from_parts(w, &parts, &pi));
            best += parts
                .iter()
                .filter(|p| !p.is_empty())
                .map(|p| p.iter().map(|e| itotals[e]).max().expect("nonempty"))
                .sum::<Rational>();
            ibp += induced.set_score(best_from_partition(&parts, |e| itotals[e]));
            tbp += true_bp;
            count += 1;
        }
    }
    let c = Rational::from_integer(count);
    Ok(PartitionExpectations {
        selected: sel / c,
        best_induced: best / c,
        induced_best_from_partition: ibp / c,
        true_best_from_partition: tbp / c,
        opt: instance.score(opt(instance)?),
    })
}

/// Expected score of the graph mechanism dominates the expected best induced score per part.
pub fn check_observed_score_dominance(e: &PartitionExpectations) -> Check {
    compare("observed score dominance", e.selected, Rational::from_integer(1), e.best_induced)
}

/// Choosing by induced scores keeps at least 2/3 of choosing by true scores.
pub fn check_induced_score_loss(e: &PartitionExpectations) -> Check {
    compare("induced score loss", e.induced_best_from_partition, Rational::new(2, 3), e.true_best_from_partition)
}

/// Best-per-part by true scores achieves half the optimum in expectation.
pub fn check_partition_half_optimal(e: &PartitionExpectations) -> Check {
    compare("partition half optimal", e.true_best_from_partition, Rational::new(1, 2), e.opt)
}

fn compare(name: &str, lhs: Rational, factor: Rational, rhs: Rational) -> Check {
    if lhs >= factor * rhs {
        Check::pass(name, 1)
    } else {
        Check::fail(name, 1, format!("{lhs} < {factor} * {rhs}"))
    }
}

/// Run every applicable structural check on one instance.
pub fn lemma_suite(instance: &Instance, mechanism: &Mechanism) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let sys = &instance.system;
    if sys.as_knapsack().is_some() {
        out.push(check_greedy_prefix_bound(instance)?);
        if let Mechanism::Kpr { d } = mechanism {
            out.push(check_extended_greedy_in_selection(instance, *d)?);
        }
    }
    if sys.is_matroid() {
        if instance.m() <= PAIRWISE_LIMIT {
            out.push(check_strong_base_exchange(sys)?);
            out.push(check_span_monotone(sys)?);
        }
        out.push(check_runners_up_bound(instance)?);
    }
    if let Mechanism::VertexPartition(_) = mechanism {
        let e = partition_expectations(instance)?;
        out.push(check_observed_score_dominance(&e));
        out.push(check_induced_score_loss(&e));
        out.push(check_partition_half_optimal(&e));
        // the expectation of the mechanism must match the engine's exact distribution
        let exact = exact_distribution(instance, mechanism)?.expected_score(&instance.scores);
        if exact != e.selected {
            out.push(Check::fail("expectation cross-check", 1, format!("{exact} != {}", e.selected)));
        }
    }
    Ok(out)
}

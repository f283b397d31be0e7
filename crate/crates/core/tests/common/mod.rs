//! Brute-force oracles shared by the integration tests. They use only the
//! instance data (independence test and raw scores), never the library's
//! optimizers or mechanisms.

#![allow(dead_code)]

use impartial::{rat, AgentSubset, Instance, Rational};
use itertools::Itertools;

pub fn indicator(s: AgentSubset, m: usize) -> Vec<bool> {
    (0..m).map(|i| s.contains(i)).collect()
}

/// Every subset of `0..m`, built from raw bit patterns.
pub fn all_sets(m: usize) -> Vec<AgentSubset> {
    (0u64..1 << m).map(|bits| (0..m).filter(|i| bits >> i & 1 == 1).collect()).collect()
}

pub fn score_from(inst: &Instance, voters: AgentSubset, s: AgentSubset) -> Rational {
    let m = inst.m();
    let mut total = rat(0, 1);
    for j in (0..m).filter(|&j| s.contains(j)) {
        for i in (0..m).filter(|&i| voters.contains(i)) {
            total += inst.scores.get(i, j);
        }
    }
    total
}

/// Best independent subset of `allowed` by votes from `voters`, ties to the
/// lexicographically greater indicator vector.
pub fn oracle_opt(inst: &Instance, voters: AgentSubset, allowed: AgentSubset) -> AgentSubset {
    let m = inst.m();
    let mut best: Option<(Rational, Vec<bool>, AgentSubset)> = None;
    for s in all_sets(m) {
        if !s.is_subset_of(allowed) || !inst.system.is_independent(s) {
            continue;
        }
        let key = (score_from(inst, voters, s), indicator(s, m), s);
        if best.as_ref().is_none_or(|b| (&key.0, &key.1) > (&b.0, &b.1)) {
            best = Some(key);
        }
    }
    best.expect("the empty set is independent").2
}

pub fn oracle_opt_score(inst: &Instance) -> Rational {
    let all = inst.ground();
    score_from(inst, all, oracle_opt(inst, all, all))
}

/// Size of a smallest dependent set.
pub fn oracle_girth(inst: &Instance) -> Option<usize> {
    all_sets(inst.m()).into_iter().filter(|s| !inst.system.is_independent(*s)).map(|s| s.len()).min()
}

/// The graph mechanism written out step by step from its pseudo-code:
/// parts by vertex order, then a candidate scan over each part in edge order.
pub fn literal_vertex_partition(
    vertices: usize,
    edges: &[(usize, usize)],
    inst: &Instance,
    eta: &[usize],
    pi: &[usize],
) -> Vec<usize> {
    let m = edges.len();
    let mut assigned = vec![false; m];
    let mut parts: Vec<Vec<usize>> = Vec::new();
    for &v in eta {
        let part: Vec<usize> = (0..m).filter(|&e| !assigned[e] && (edges[e].0 == v || edges[e].1 == v)).collect();
        for &e in &part {
            assigned[e] = true;
        }
        parts.push(part);
    }
    assert_eq!(parts.len(), vertices);
    let pos: Vec<usize> = (0..m).map(|e| pi.iter().position(|&x| x == e).unwrap()).collect();
    let votes = |voters: &[usize], e: usize| -> Rational { voters.iter().map(|&x| inst.scores.get(x, e)).sum() };
    let mut selected = Vec::new();
    for part in parts.iter().filter(|p| !p.is_empty()) {
        let ordered: Vec<usize> = part.iter().copied().sorted_by_key(|&e| pos[e]).collect();
        let outside: Vec<usize> = (0..m).filter(|e| !part.contains(e)).collect();
        let mut cand = ordered[0];
        let mut cand_score = votes(&outside, cand);
        for j in 1..ordered.len() {
            let e = ordered[j];
            let mut r = outside.clone();
            r.extend(ordered[..j].iter().copied().filter(|&x| x != cand));
            if votes(&r, e) >= cand_score {
                r.push(cand);
                cand_score = votes(&r, e);
                cand = e;
            }
        }
        selected.push(cand);
    }
    selected.sort_unstable();
    selected
}

/// Exact selection marginals of the graph mechanism over all `n! m!` orders.
pub fn literal_vertex_partition_marginals(vertices: usize, edges: &[(usize, usize)], inst: &Instance) -> Vec<Rational> {
    let m = edges.len();
    let mut counts = vec![0i128; m];
    let mut total = 0i128;
    for eta in (0..vertices).permutations(vertices) {
        for pi in (0..m).permutations(m) {
            for e in literal_vertex_partition(vertices, edges, inst, &eta, &pi) {
                counts[e] += 1;
            }
            total += 1;
        }
    }
    counts.into_iter().map(|c| rat(c, total)).collect()
}

//! Matroid mechanism for 1-sparse votes: each agent is selected with
//! probability 0 or 1/2, and the marginals are realized by splitting the
//! half-probability agents into two independent sets.

use impartial::matroid::{decompose_marginals, greedy_basis, two_partition, TwoPartition};
use impartial::mechanisms::{mpr, mpr_marginals};
use impartial::verify::check_rank_marginals;
use impartial::verify::generators::{gen_random, gen_triangle, RandomKind};
use impartial::{AgentSubset, Result};

fn main() -> Result<()> {
    let tri = gen_triangle();
    let totals = tri.scores.totals();
    let shown: Vec<String> = totals.iter().map(ToString::to_string).collect();
    println!("triangle totals {shown:?}, greedy basis {}", greedy_basis(&tri.system, &totals)?);
    let p = mpr_marginals(&tri)?;
    println!("marginals {:?}", p.as_slice().iter().map(ToString::to_string).collect::<Vec<_>>());
    let dist = decompose_marginals(&tri.system, &p)?;
    for (s, q) in dist.support() {
        println!("  {s:<8} {q}");
    }

    // a triangle is not a forest but splits into two
    match two_partition(&tri.system, AgentSubset::full(3))? {
        TwoPartition::Split(a, b) => println!("split {a} | {b}"),
        TwoPartition::Infeasible { witness } => println!("no split, witness {witness}"),
    }

    for seed in 0..5 {
        let inst = gen_random(RandomKind::Graphic, 8, 1, false, seed)?;
        let d = mpr(&inst)?;
        let c = check_rank_marginals(&inst.system, &d)?;
        println!("random graphic seed {seed}: {} support sets, rank check passed = {}", d.support().len(), c.passed());
    }
    Ok(())
}

//! The bipartition mechanism on any independence system: votes only count
//! across the split, so nobody influences their own side's choice.

use impartial::engine::{exact_distribution, Mechanism};
use impartial::systems::opt;
use impartial::verify::generators::{gen_cycle_girth, gen_mutual_pair, gen_star_dependent};
use impartial::verify::check_impartiality_all;
use impartial::{IndependenceSystem, Instance, Result};

fn show(name: &str, inst: &Instance) -> Result<()> {
    let dist = exact_distribution(inst, &Mechanism::Partition)?;
    let best = inst.score(opt(inst)?);
    println!("{name}: E[score] = {} of optimum {best}", dist.expected_score(&inst.scores));
    for (s, p) in dist.support() {
        println!("  {s:<10} {p}");
    }
    Ok(())
}

fn main() -> Result<()> {
    show("mutual pair", &gen_mutual_pair())?;

    // a vote cycle on a smallest circuit of U(5, 3): the optimum is g - 1 votes
    let system = IndependenceSystem::uniform(5, 3);
    let (cycle, meta) = gen_cycle_girth(&system)?;
    println!("girth {} on {}", meta.girth, meta.dependent_set);
    show("cycle", &cycle)?;

    // the two instances differ only in the designated agent's votes
    let (a, b, meta) = gen_star_dependent(&system)?;
    let j = meta.designated.expect("star has a designated agent");
    let pa = exact_distribution(&a, &Mechanism::Partition)?.marginal(j);
    let pb = exact_distribution(&b, &Mechanism::Partition)?.marginal(j);
    println!("designated agent {j}: P[selected] = {pa} vs {pb}");

    let check = check_impartiality_all(&b, &Mechanism::Partition, 7)?;
    println!("{}: {} deviations, passed = {}", check.name, check.cases, check.passed());
    Ok(())
}

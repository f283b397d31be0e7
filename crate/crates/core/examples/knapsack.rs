//! Randomized and deterministic impartial selection under a knapsack
//! constraint, with the greedy trace behind each lottery.

use impartial::engine::{exact_distribution, Mechanism};
use impartial::mechanisms::{dkpr, kpr_run};
use impartial::systems::opt;
use impartial::verify::generators::{gen_fig4, gen_fig5b, Fig4Variant};
use impartial::{rat, Result};

fn main() -> Result<()> {
    for variant in [Fig4Variant::A, Fig4Variant::B] {
        let inst = gen_fig4(variant);
        let run = kpr_run(&inst, 1)?;
        println!("{variant:?}: greedy order {:?}", run.greedy.order);
        println!("  greedy set {}, extended {}", run.greedy.kgr, run.greedy.ekgr);
        println!("  candidates {}, last {:?}", run.candidates, run.last);
        for (s, p) in run.distribution.support() {
            println!("  {s:<10} {p}");
        }
    }

    // small agents: the deterministic mechanism keeps 1 - s_max (d + 1) / C
    let mech = Mechanism::Dkpr { d: 1, s_max: rat(4, 1) };
    for eps in [rat(1, 10), rat(1, 100), rat(1, 1000)] {
        let inst = gen_fig5b(eps)?;
        let chosen = dkpr(&inst, 1, rat(4, 1))?;
        let best = inst.score(opt(&inst)?);
        let got = exact_distribution(&inst, &mech)?.expected_score(&inst.scores);
        println!("eps {eps}: picks {chosen} scoring {got} of {best} (guarantee {})", mech.guarantee(&inst)?);
    }
    Ok(())
}

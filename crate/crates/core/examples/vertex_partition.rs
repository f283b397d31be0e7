//! Graph mechanism on simple graphs: exact enumeration of all vertex and edge
//! orders for small graphs, seeded Monte Carlo for wheels too large to enumerate.

use impartial::engine::{exact_distribution, monte_carlo, to_f64, trials_for_half_width, Mechanism};
use impartial::mechanisms::VpMode;
use impartial::verify::generators::{gen_path, gen_wheel};
use impartial::Result;

fn main() -> Result<()> {
    let mech = Mechanism::VertexPartition(VpMode::Guarantee);
    let path = gen_path();
    let d = exact_distribution(&path, &mech)?;
    println!("path: marginals {} {}, E[score] {}", d.marginal(0), d.marginal(1), d.expected_score(&path.scores));

    let wheel = gen_wheel(4)?;
    let d = exact_distribution(&wheel, &mech)?;
    println!("wheel n=4 exact: E[score] {} of 3", d.expected_score(&wheel.scores));

    // the score range of a wheel is n - 1, so this many trials give a ratio half-width of 0.01
    let trials = trials_for_half_width(1.0, 0.01);
    for n in 5..=9 {
        let w = gen_wheel(n)?;
        let rep = monte_carlo(&w, &mech, trials, 42, true)?;
        let ratio = to_f64(rep.expected_score()) / (n - 1) as f64;
        println!("wheel n={n}: ratio {ratio:.4} ± 0.01 (1/3 + 1/n = {:.4})", 1.0 / 3.0 + 1.0 / n as f64);
    }
    Ok(())
}

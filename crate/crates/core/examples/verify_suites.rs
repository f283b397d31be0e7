//! Every verification suite for every mechanism over its generated battery.

use impartial::engine::Mechanism;
use impartial::mechanisms::VpMode;
use impartial::verify::{instance_battery, run_suite, worst_ratio, Suite};
use impartial::{rat, Result};

fn main() -> Result<()> {
    let mechanisms = [
        Mechanism::Partition,
        Mechanism::Kpr { d: 1 },
        Mechanism::Kpr { d: 2 },
        Mechanism::Dkpr { d: 1, s_max: rat(4, 1) },
        Mechanism::Mpr,
        Mechanism::VertexPartition(VpMode::Guarantee),
    ];
    for mech in &mechanisms {
        let battery = instance_battery(mech, 20, 1)?;
        let mut failures = 0;
        for (id, inst) in &battery {
            for suite in Suite::ALL {
                for c in run_suite(suite, inst, mech, 1)? {
                    if !c.passed() {
                        failures += 1;
                        println!("{id}: {} failed: {:?}", c.name, c.violation);
                    }
                }
            }
        }
        let bound = mech.guarantee(&battery[0].1)?;
        let worst = worst_ratio(&battery, mech, bound)?.expect("some instance has a positive optimum");
        println!(
            "{mech:<24} {} instances, {failures} failures, worst ratio {} on {} (bound {bound})",
            battery.len(),
            worst.ratio,
            worst.instance_id
        );
    }
    Ok(())
}

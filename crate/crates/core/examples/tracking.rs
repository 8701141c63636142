//! Message-passing reconstruction of a drifting signal, printing per-vertex tracks.

use dlsr::experiment::{build_setup, ExperimentConfig};
use dlsr::reconstruction::Schedule;
use dlsr::signals::{generate_bandlimited, TimeVaryingSignal};
use dlsr::simulator::{simulate, SimOptions};

fn main() -> dlsr::Result<()> {
    let setup = build_setup(&ExperimentConfig::default())?;
    let plan = &setup.plan;
    let steps = 3000;
    let f0 = generate_bandlimited(plan.band(), &setup.basis, 7, 10.0)?;
    let truth = TimeVaryingSignal::synthetic(f0, plan.band(), &setup.basis, 0.005, steps, 8)?;

    let tracked = [plan.sample_set()[0], 0];
    let options = SimOptions {
        track_nodes: tracked.to_vec(),
        ..Default::default()
    };
    let schedule = Schedule::constant(0.1, 1e-3)?;
    let out = simulate(&setup.graph, plan, &schedule, &truth, steps, &options)?;

    for s in out.tracked.iter().filter(|s| s.k % 500 == 0) {
        println!("k={:5} v={:3} estimate {:8.4} truth {:8.4}", s.k, s.v, s.estimate, s.truth);
    }
    let last = out.trace.rows.last().expect("rows");
    println!("final relative error {:.4}", last.relative_error);
    println!("peak messages per node per round {}", out.peak_messages_per_node);
    Ok(())
}

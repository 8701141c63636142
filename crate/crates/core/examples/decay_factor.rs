//! Out-of-band content in the initial estimate only fades when beta > 0.

use dlsr::experiment::{build_setup, ExperimentConfig};
use dlsr::reconstruction::Schedule;
use dlsr::signals::{generate_bandlimited, generate_out_of_band, TimeVaryingSignal};
use dlsr::simulator::{simulate, SimOptions};
use dlsr::spectral::GraphSignal;

fn main() -> dlsr::Result<()> {
    let setup = build_setup(&ExperimentConfig::default())?;
    let plan = &setup.plan;
    let f0 = generate_bandlimited(plan.band(), &setup.basis, 3, 10.0)?;
    let h = generate_out_of_band(plan.band(), &setup.basis, 4, 3.0)?;
    let initial = GraphSignal::from_vector(f0.as_vector() + h.as_vector());
    let truth = TimeVaryingSignal::constant(f0);

    for beta in [0.0, 0.01, 0.05, 0.1] {
        let options = SimOptions {
            initial: Some(initial.clone()),
            ..Default::default()
        };
        let schedule = Schedule::constant(0.2, beta)?;
        let out = simulate(&setup.graph, plan, &schedule, &truth, 1000, &options)?;
        let rows = &out.trace.rows;
        println!(
            "beta {beta:<5} out-of-band {:.3} -> {:.3e}, in-band to biased target {:.3e}",
            rows[0].out_band_error,
            rows[rows.len() - 1].out_band_error,
            rows[rows.len() - 1].in_band_error
        );
    }
    Ok(())
}

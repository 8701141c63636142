//! Diminishing step size and decay factor drive the error to zero on a static target.

use dlsr::experiment::{build_setup, ExperimentConfig};
use dlsr::metrics::rate_exponent_fit;
use dlsr::reconstruction::Schedule;
use dlsr::signals::{generate_bandlimited, TimeVaryingSignal};
use dlsr::simulator::{simulate, SimOptions};

fn main() -> dlsr::Result<()> {
    let setup = build_setup(&ExperimentConfig::default())?;
    let plan = &setup.plan;
    let truth = TimeVaryingSignal::constant(generate_bandlimited(plan.band(), &setup.basis, 5, 10.0)?);
    let steps = 10_000;

    for (mu1, beta1) in [(0.05, 0.1), (0.02, 0.01)] {
        let schedule = Schedule::diminishing(mu1, beta1)?;
        let out = simulate(&setup.graph, plan, &schedule, &truth, steps, &SimOptions::default())?;
        let slope = rate_exponent_fit(&out.trace, 100, steps)?;
        let at = |k: usize| out.trace.rows[k].total_error;
        println!(
            "mu1 {mu1}, beta1 {beta1}: error {:.3} / {:.3} / {:.3} at k = 100 / 1000 / 10000, log-log slope {slope:.3}",
            at(100),
            at(1000),
            at(steps)
        );
    }
    Ok(())
}

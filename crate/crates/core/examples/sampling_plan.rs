//! Draws sensors, takes the largest certified cutoff and reports the frame.

use dlsr::graph::{random_sensor_graph, LaplacianKind};
use dlsr::sampling::{cutoff_bound, random_sample_set, SamplingPlan};
use dlsr::spectral::eigendecompose;

fn main() -> dlsr::Result<()> {
    let (_, graph) = random_sensor_graph(100, 4, 1)?;
    let laplacian = graph.laplacian(LaplacianKind::Normalized)?;
    let basis = eigendecompose(&laplacian)?;

    for seed in 0..5 {
        let s = random_sample_set(100, 20, seed)?;
        let omega = cutoff_bound(&laplacian, &s)?;
        match SamplingPlan::for_graph(&graph, &basis, s, omega) {
            Ok(plan) => {
                let (a, b) = plan.frame_bounds();
                println!(
                    "seed {seed}: omega {omega:.5}, band {}, A {a:.4}, B {b:.4}, |T| {:.4}, tau {}",
                    plan.band().len(),
                    plan.operator_norm(),
                    plan.tau_max()
                );
            }
            Err(e) => println!("seed {seed}: rejected ({e})"),
        }
    }
    Ok(())
}

#![allow(dead_code)]

use dlsr::experiment::{build_setup, ExperimentConfig, Setup};
use dlsr::signals::generate_bandlimited;
use dlsr::spectral::GraphSignal;

/// The 100-vertex, 4-NN network with 20 random sensors used throughout.
pub fn canonical() -> Setup {
    build_setup(&ExperimentConfig::default()).expect("canonical plan")
}

pub fn random_setup(seed: u64, n: usize, m: usize) -> Setup {
    let cfg = ExperimentConfig {
        seed,
        n,
        sample_size: m,
        ..Default::default()
    };
    build_setup(&cfg).expect("random plan")
}

/// In-band truth with unit RMS entry.
pub fn truth(setup: &Setup, seed: u64) -> GraphSignal {
    let n = setup.plan.n() as f64;
    generate_bandlimited(setup.plan.band(), &setup.basis, seed, n.sqrt()).unwrap()
}

pub fn max_diff(a: &GraphSignal, b: &GraphSignal) -> f64 {
    (a.as_vector() - b.as_vector()).amax()
}

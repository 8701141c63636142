//! Small convergence sweep over step size and decay factor.

use dlsr::experiment::{sweep, ExperimentConfig, OneOrMany};
use dlsr::simulator::Mode;

fn main() -> dlsr::Result<()> {
    let out = std::env::temp_dir().join("dlsr-sweep-example");
    let cfg = ExperimentConfig {
        name: "sweep-example".into(),
        mu: OneOrMany::Many(vec![0.01, 0.2, 1.0, 20.0]),
        beta: OneOrMany::Many(vec![0.0, 0.01, 0.1]),
        delta: OneOrMany::Many(vec![0.0, 0.02]),
        data_seeds: vec![1, 2],
        steps: Some(1000),
        mode: Some(Mode::ClosedForm),
        output: Some(out.clone()),
        ..Default::default()
    };
    println!("{:>6} {:>6} {:>6}  converged", "mu", "beta", "delta");
    for cell in sweep(&cfg)? {
        let p = match cell.probability() {
            Some(p) => format!("{p:.2}"),
            None => "invalid".into(),
        };
        println!("{:>6} {:>6} {:>6}  {p}", cell.mu, cell.beta, cell.delta);
    }
    println!("table written to {}", out.join("sweep.csv").display());
    Ok(())
}

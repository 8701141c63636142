//! Reconstructs the Intel Berkeley lab temperature field.
//!
//! Usage: `cargo run --release --example intel_lab -- data.txt mote_locs.txt`
//! Without arguments the small bundled fixture is loaded to show the
//! preprocessing report.

use std::path::PathBuf;

use dlsr::experiment::{real_data, ExperimentConfig};
use dlsr::signals::{load_intel_lab, read_mote_locations, TimeWindow};

fn main() -> dlsr::Result<()> {
    let args: Vec<PathBuf> = std::env::args_os().skip(1).map(PathBuf::from).collect();
    if let [data, locs] = args.as_slice() {
        let cfg = ExperimentConfig {
            intel_data: Some(data.clone()),
            intel_locations: Some(locs.clone()),
            output: Some(std::env::temp_dir().join("dlsr-intel-example")),
            ..Default::default()
        };
        let report = real_data(&cfg)?;
        println!("{} motes, {} frames, {:?}", report.motes.len(), report.frames, report.load);
        println!("plan: {:?}", report.plan);
        println!(
            "final relative error {:.4}, steady {:?}",
            report.run.final_relative_error, report.run.steady_relative_error
        );
        return Ok(());
    }

    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let locs = read_mote_locations(&fixtures.join("intel_small_locs.txt"))?;
    let window = TimeWindow::parse("2004-02-28 00:00:00", "2004-02-28 00:02:00")?;
    let lab = load_intel_lab(&fixtures.join("intel_small.txt"), &locs, &window, 30)?;
    println!("motes {:?}", lab.motes);
    println!("{:?}", lab.report);
    for (k, frame) in lab.signal.frames().iter().enumerate() {
        println!("t={:3}s {:?}", 30 * k, frame.values());
    }
    Ok(())
}

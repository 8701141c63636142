//! Builds a random geometric sensor graph and prints its Laplacian spectrum.

use dlsr::graph::{random_sensor_graph, LaplacianKind};
use dlsr::spectral::eigendecompose;

fn main() -> dlsr::Result<()> {
    let (_, graph) = random_sensor_graph(60, 4, 3)?;
    println!("{} vertices, {} edges", graph.n(), graph.edges().len());
    for kind in [LaplacianKind::Unnormalized, LaplacianKind::Normalized] {
        let basis = eigendecompose(&graph.laplacian(kind)?)?;
        let lambda = basis.eigenvalues();
        let head: Vec<String> = lambda.iter().take(6).map(|x| format!("{x:.4}")).collect();
        println!("{kind:?}: lowest [{}], max {:.4}", head.join(", "), basis.lambda_max());
    }
    let tau = graph.hop_distances()?.tau_max();
    println!("diameter (hops): {tau}");
    Ok(())
}

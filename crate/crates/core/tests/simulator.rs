mod common;

use dlsr::graph::{Edge, Graph, LaplacianKind};
use dlsr::reconstruction::Schedule;
use dlsr::sampling::SamplingPlan;
use dlsr::signals::{generate_out_of_band, TimeVaryingSignal};
use dlsr::simulator::{simulate, Mode, SimOptions};
use dlsr::spectral::{eigendecompose, GraphSignal};

use common::{canonical, truth};

fn complete_graph(n: usize) -> Graph {
    let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| Edge { u, v, weight: 1.0 }));
    Graph::from_edges(n, edges).unwrap()
}

/// On `K_n` the lowest band is the constant vector, so `(P δ_u)(v) = 1/n`,
/// and every off-diagonal delay is one hop.
#[test]
fn complete_graph_matches_hand_rolled_one_step_stale_update() {
    let n = 6;
    let graph = complete_graph(n);
    let basis = eigendecompose(&graph.laplacian(LaplacianKind::Normalized).unwrap()).unwrap();
    let sensors = vec![0, 2];
    let plan = SamplingPlan::for_graph(&graph, &basis, sensors.clone(), 0.5).unwrap();
    assert_eq!(plan.band().len(), 1);
    assert_eq!(plan.tau_max(), 1);

    let c = 3.0;
    let target = TimeVaryingSignal::constant(GraphSignal::from_vector(
        nalgebra::DVector::from_element(n, c),
    ));
    let init = vec![1.0, -2.0, 0.5, 4.0, 0.0, 2.5];
    let (mu, steps) = (1.0, 12);
    let schedule = Schedule::constant(mu, 0.0).unwrap();
    let opts = SimOptions {
        initial: Some(GraphSignal::from_vector(nalgebra::DVector::from_vec(init.clone()))),
        record_trajectory: true,
        ..Default::default()
    };
    let out = simulate(&graph, &plan, &schedule, &target, steps, &opts).unwrap();
    let traj = out.trajectory.unwrap();

    let mut history = vec![init];
    for k in 0..steps {
        let err = |j: i64, u: usize| if j < 0 { 0.0 } else { c - history[j as usize][u] };
        let f = &history[k];
        let next: Vec<f64> = (0..n)
            .map(|v| {
                let acc: f64 = sensors
                    .iter()
                    .map(|&u| err(k as i64 - i64::from(u != v), u) / n as f64)
                    .sum();
                f[v] + mu * acc
            })
            .collect();
        history.push(next);
    }
    for (k, (got, want)) in traj.iter().zip(&history).enumerate() {
        for (a, b) in got.values().iter().zip(want) {
            assert!((a - b).abs() < 1e-12, "k={k}: {a} vs {b}");
        }
    }
}

/// Delayed corrections are in-band only up to the spread of lagged errors, so
/// the out-of-band part shrinks by `1 − μβ` plus a term that vanishes once the
/// sensor errors settle. With a static target the envelope must decay.
#[test]
fn out_of_band_envelope_decays_under_positive_decay_factor() {
    let setup = canonical();
    let f0 = truth(&setup, 5);
    let target = TimeVaryingSignal::constant(f0.clone());
    let h = generate_out_of_band(setup.plan.band(), &setup.basis, 7, 3.0).unwrap();
    let opts = SimOptions {
        initial: Some(GraphSignal::from_vector(f0.as_vector() + h.as_vector())),
        ..Default::default()
    };
    let schedule = Schedule::constant(0.2, 0.05).unwrap();
    let out = simulate(&setup.graph, &setup.plan, &schedule, &target, 1500, &opts).unwrap();
    let e_plus: Vec<f64> = out.trace.rows.iter().map(|r| r.out_band_error).collect();
    let envelope: Vec<f64> = e_plus
        .chunks(50)
        .map(|w| w.iter().cloned().fold(0.0, f64::max))
        .collect();
    for pair in envelope.windows(2) {
        assert!(pair[1] <= pair[0] * (1.0 + 1e-12), "{pair:?}");
    }
    assert!(e_plus[e_plus.len() - 1] < 1e-3 * e_plus[0]);
}

/// Under a drifting target the out-of-band part settles to a floor rather
/// than decaying away; it stays far below its initial size.
#[test]
fn out_of_band_error_stays_bounded_under_drift() {
    let setup = canonical();
    let f0 = truth(&setup, 5);
    let target =
        TimeVaryingSignal::synthetic(f0.clone(), setup.plan.band(), &setup.basis, 0.005, 1500, 6)
            .unwrap();
    let h = generate_out_of_band(setup.plan.band(), &setup.basis, 7, 3.0).unwrap();
    let opts = SimOptions {
        initial: Some(GraphSignal::from_vector(f0.as_vector() + h.as_vector())),
        ..Default::default()
    };
    let schedule = Schedule::constant(0.2, 0.05).unwrap();
    let out = simulate(&setup.graph, &setup.plan, &schedule, &target, 1500, &opts).unwrap();
    let tail = out.trace.rows[750..].iter().map(|r| r.out_band_error).fold(0.0, f64::max);
    assert!(tail > 0.0 && tail < 1e-2, "{tail}");
}

#[test]
fn modes_agree_on_time_varying_truth() {
    let setup = canonical();
    let target = TimeVaryingSignal::synthetic(
        truth(&setup, 2),
        setup.plan.band(),
        &setup.basis,
        0.01,
        300,
        3,
    )
    .unwrap();
    let schedule = Schedule::diminishing(0.3, 0.05).unwrap();
    let run = |mode| {
        let opts = SimOptions { mode, ..Default::default() };
        simulate(&setup.graph, &setup.plan, &schedule, &target, 300, &opts).unwrap()
    };
    let (mp, cf) = (run(Mode::MessagePassing), run(Mode::ClosedForm));
    assert_eq!(mp.final_estimate, cf.final_estimate);
    assert_eq!(mp.trace, cf.trace);
}

#[test]
fn reruns_produce_identical_csv() {
    let setup = canonical();
    let target = TimeVaryingSignal::synthetic(
        truth(&setup, 4),
        setup.plan.band(),
        &setup.basis,
        0.005,
        200,
        9,
    )
    .unwrap();
    let schedule = Schedule::constant(0.1, 1e-3).unwrap();
    let csv = || {
        simulate(&setup.graph, &setup.plan, &schedule, &target, 200, &SimOptions::default())
            .unwrap()
            .trace
            .to_csv()
    };
    assert_eq!(csv(), csv());
}

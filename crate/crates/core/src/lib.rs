//! Distributed least-squares reconstruction of time-varying bandlimited
//! signals on graphs.
//!
//! A sensor network observes a slowly drifting bandlimited signal at a subset
//! `S` of its vertices. Every node keeps an estimate of its own value and
//! refines it from sample errors that flood through the network with
//! hop-count delays. The crate provides the graph and spectral building
//! blocks, sampling plans, the centralized and delayed update rules, a
//! message-passing simulator, and error metrics for the resulting traces.
//!
//! ```
//! use dlsr::graph::{knn_geometric_graph, LaplacianKind};
//! use dlsr::spectral::eigendecompose;
//! use dlsr::sampling::{cutoff_bound, SamplingPlan};
//! use dlsr::signals::{generate_bandlimited, TimeVaryingSignal};
//! use dlsr::reconstruction::Schedule;
//! use dlsr::simulator::{simulate, SimOptions};
//!
//! let pts: Vec<[f64; 2]> = (0..12)
//!     .map(|i| [(i % 4) as f64, (i / 4) as f64 + 0.1 * (i % 3) as f64])
//!     .collect();
//! let graph = knn_geometric_graph(&pts, 3).unwrap();
//! let lap = graph.laplacian(LaplacianKind::Normalized).unwrap();
//! let basis = eigendecompose(&lap).unwrap();
//! let sample_set = vec![0, 3, 5, 6, 9, 11];
//! let omega = cutoff_bound(&lap, &sample_set).unwrap();
//! let plan = SamplingPlan::for_graph(&graph, &basis, sample_set, omega).unwrap();
//!
//! let truth = generate_bandlimited(plan.band(), &basis, 7, 1.0).unwrap();
//! let schedule = Schedule::constant(0.5, 0.0).unwrap();
//! let out = simulate(&graph, &plan, &schedule, &TimeVaryingSignal::constant(truth), 200,
//!                    &SimOptions::default()).unwrap();
//! assert!(out.trace.rows.last().unwrap().total_error < 1e-3);
//! ```

pub mod error;
pub mod experiment;
pub mod graph;
pub mod metrics;
pub mod reconstruction;
pub mod sampling;
pub mod signals;
pub mod simulator;
pub mod spectral;

pub use error::{Error, Result};

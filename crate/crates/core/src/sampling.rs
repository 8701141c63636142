//! Sample-set selection, the admissible cutoff frequency, and the validated
//! [`SamplingPlan`] consumed by the reconstruction routines and simulator.

use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DelayMatrix, Graph};
use crate::spectral::{
    frame_bounds, frame_elements, BandSpec, FrameElements, GraphSignal, SpectralBasis,
};

/// Lower frame bounds at or below this value mean "not a uniqueness set".
pub const UNIQUENESS_TOL: f64 = 1e-10;

/// Sufficient cutoff for `S` to be a uniqueness set of the normalized
/// Laplacian's band: `ω ≤ σ_min`, where `σ_min²` is the smallest singular
/// value of `(L²)` restricted to the rows and columns outside `S`.
///
/// When `S` covers every vertex the complement is empty and the whole
/// spectrum is recoverable, so `λ_max(L)` is returned.
pub fn cutoff_bound(normalized_laplacian: &DMatrix<f64>, sample_set: &[usize]) -> Result<f64> {
    let n = normalized_laplacian.nrows();
    if sample_set.is_empty() {
        return Err(Error::EmptySampleSet);
    }
    let mut in_set = vec![false; n];
    for &u in sample_set {
        if u >= n {
            return Err(Error::InvalidArgument(format!("sample vertex {u} out of range 0..{n}")));
        }
        in_set[u] = true;
    }
    let complement: Vec<usize> = (0..n).filter(|&v| !in_set[v]).collect();
    if complement.is_empty() {
        let eig = SymmetricEigen::new(normalized_laplacian.clone());
        return Ok(eig.eigenvalues.max().max(0.0));
    }
    let squared = normalized_laplacian * normalized_laplacian;
    let sub = squared.select_rows(&complement).select_columns(&complement);
    let sigma_sq = sub.singular_values().min().max(0.0);
    Ok(sigma_sq.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Uniqueness {
    Unique { lower_bound: f64 },
    NotUnique { lower_bound: f64 },
}

impl Uniqueness {
    pub fn is_unique(&self) -> bool {
        matches!(self, Uniqueness::Unique { .. })
    }

    pub fn lower_bound(&self) -> f64 {
        match *self {
            Uniqueness::Unique { lower_bound } | Uniqueness::NotUnique { lower_bound } => {
                lower_bound
            }
        }
    }
}

pub fn verify_uniqueness(
    sample_set: &[usize],
    band: &BandSpec,
    basis: &SpectralBasis,
) -> Result<Uniqueness> {
    if sample_set.is_empty() {
        return Ok(Uniqueness::NotUnique { lower_bound: 0.0 });
    }
    let (a, _) = frame_bounds(sample_set, band, basis)?;
    Ok(if a > UNIQUENESS_TOL {
        Uniqueness::Unique { lower_bound: a }
    } else {
        Uniqueness::NotUnique { lower_bound: a }
    })
}

/// `m` distinct vertices drawn uniformly from `0..n`, sorted ascending.
pub fn random_sample_set(n: usize, m: usize, rng_seed: u64) -> Result<Vec<usize>> {
    if m > n {
        return Err(Error::SampleSizeTooLarge { m, n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut set = rand::seq::index::sample(&mut rng, n, m).into_vec();
    set.sort_unstable();
    Ok(set)
}

/// A validated sampling configuration: `S`, the band, precomputed frame
/// elements, hop delays and frame bounds. Only uniqueness sets are accepted.
#[derive(Debug, Clone)]
pub struct SamplingPlan {
    sample_set: Vec<usize>,
    band: BandSpec,
    band_vectors: DMatrix<f64>,
    frame: FrameElements,
    delays: DelayMatrix,
    tau_max: usize,
    frame_bounds: (f64, f64),
    operator_norm: f64,
}

impl SamplingPlan {
    pub fn new(
        basis: &SpectralBasis,
        sample_set: Vec<usize>,
        omega: f64,
        delays: DelayMatrix,
    ) -> Result<Self> {
        if delays.n() != basis.n() {
            return Err(Error::DimensionMismatch {
                expected: basis.n(),
                found: delays.n(),
            });
        }
        let band = BandSpec::new(omega, basis);
        if band.is_empty() {
            return Err(Error::EmptyBand(omega));
        }
        let frame = frame_elements(&sample_set, &band, basis)?;
        let uniqueness = verify_uniqueness(&sample_set, &band, basis)?;
        if !uniqueness.is_unique() {
            return Err(Error::NotUnique(uniqueness.lower_bound()));
        }
        let bounds = frame_bounds(&sample_set, &band, basis)?;
        let tau_max = delays.max_from(&sample_set);
        let operator_norm = frame.operator_norm();
        Ok(Self {
            band_vectors: basis.band_vectors(&band),
            sample_set,
            band,
            frame,
            delays,
            tau_max,
            frame_bounds: bounds,
            operator_norm,
        })
    }

    /// Plan on a graph with hop-count delays; rejects disconnected graphs.
    pub fn for_graph(
        graph: &Graph,
        basis: &SpectralBasis,
        sample_set: Vec<usize>,
        omega: f64,
    ) -> Result<Self> {
        let delays = graph.hop_distances()?;
        Self::new(basis, sample_set, omega, delays)
    }

    /// Same plan with a different delay model.
    pub fn with_delays(&self, delays: DelayMatrix) -> Result<Self> {
        if delays.n() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: delays.n(),
            });
        }
        let mut plan = self.clone();
        plan.tau_max = delays.max_from(&plan.sample_set);
        plan.delays = delays;
        Ok(plan)
    }

    pub fn n(&self) -> usize {
        self.band_vectors.nrows()
    }

    pub fn sample_set(&self) -> &[usize] {
        &self.sample_set
    }

    pub fn band(&self) -> &BandSpec {
        &self.band
    }

    pub fn omega(&self) -> f64 {
        self.band.omega()
    }

    pub fn band_vectors(&self) -> &DMatrix<f64> {
        &self.band_vectors
    }

    pub fn frame(&self) -> &FrameElements {
        &self.frame
    }

    pub fn delays(&self) -> &DelayMatrix {
        &self.delays
    }

    /// Largest delay from a sensor to any vertex.
    pub fn tau_max(&self) -> usize {
        self.tau_max
    }

    /// `(A, B)`.
    pub fn frame_bounds(&self) -> (f64, f64) {
        self.frame_bounds
    }

    /// `‖T‖` on all of `R^n`.
    pub fn operator_norm(&self) -> f64 {
        self.operator_norm
    }

    pub fn project_low(&self, f: &GraphSignal) -> GraphSignal {
        let u = &self.band_vectors;
        GraphSignal::from_vector(u * u.tr_mul(f.as_vector()))
    }

    pub fn project_high(&self, f: &GraphSignal) -> GraphSignal {
        GraphSignal::from_vector(f.as_vector() - self.project_low(f).as_vector())
    }

    pub fn summary(&self) -> PlanSummary {
        PlanSummary {
            n: self.n(),
            sample_set: self.sample_set.clone(),
            omega: self.omega(),
            band_dim: self.band.len(),
            frame_lower: self.frame_bounds.0,
            frame_upper: self.frame_bounds.1,
            operator_norm: self.operator_norm,
            tau_max: self.tau_max,
        }
    }
}

/// Serializable description of a plan, written next to every experiment trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanSummary {
    pub n: usize,
    pub sample_set: Vec<usize>,
    pub omega: f64,
    pub band_dim: usize,
    pub frame_lower: f64,
    pub frame_upper: f64,
    pub operator_norm: f64,
    pub tau_max: usize,
}

impl PlanSummary {
    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{random_sensor_graph, Edge, LaplacianKind};
    use crate::spectral::eigendecompose;
    use proptest::prelude::*;

    fn random_graph(n: usize, seed: u64) -> Graph {
        random_sensor_graph(n, 4, seed).unwrap().1
    }

    #[test]
    fn cutoff_bound_single_complement_vertex() {
        let g = random_graph(12, 1);
        let l = g.laplacian(LaplacianKind::Normalized).unwrap();
        let s: Vec<usize> = (0..12).filter(|&v| v != 5).collect();
        let l2 = &l * &l;
        let expected = l2[(5, 5)].sqrt();
        assert!((cutoff_bound(&l, &s).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn cutoff_bound_path_graph() {
        let g = Graph::from_edges(
            3,
            [
                Edge { u: 0, v: 1, weight: 1.0 },
                Edge { u: 1, v: 2, weight: 1.0 },
            ],
        )
        .unwrap();
        let l = g.laplacian(LaplacianKind::Normalized).unwrap();
        // hand-derived: L[1,:] = (-1/√2, 1, -1/√2), so (L²)_11 = 1/2 + 1 + 1/2 = 2
        let bound = cutoff_bound(&l, &[0, 2]).unwrap();
        assert!((bound - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn cutoff_bound_full_set_is_lambda_max() {
        let g = random_graph(8, 2);
        let l = g.laplacian(LaplacianKind::Normalized).unwrap();
        let b = eigendecompose(&l).unwrap();
        let all: Vec<usize> = (0..8).collect();
        assert!((cutoff_bound(&l, &all).unwrap() - b.lambda_max()).abs() < 1e-10);
        assert!(cutoff_bound(&l, &[]).is_err());
    }

    #[test]
    fn uniqueness_edge_cases() {
        let g = random_graph(15, 3);
        let b = eigendecompose(&g.laplacian(LaplacianKind::Normalized).unwrap()).unwrap();
        let band = BandSpec::new(b.eigenvalues()[4], &b);
        let all: Vec<usize> = (0..15).collect();
        let full = verify_uniqueness(&all, &band, &b).unwrap();
        assert!(full.is_unique());
        assert!((full.lower_bound() - 1.0).abs() < 1e-12);
        assert!(!verify_uniqueness(&[], &band, &b).unwrap().is_unique());
        // four samples cannot pin down a five-dimensional band
        assert!(!verify_uniqueness(&[0, 1, 2, 3], &band, &b).unwrap().is_unique());
    }

    #[test]
    fn random_sample_set_edges() {
        assert_eq!(random_sample_set(6, 6, 1).unwrap(), vec![0, 1, 2, 3, 4, 5]);
        assert!(random_sample_set(6, 0, 1).unwrap().is_empty());
        assert_eq!(random_sample_set(100, 20, 9).unwrap(), random_sample_set(100, 20, 9).unwrap());
        assert_ne!(random_sample_set(100, 20, 9).unwrap(), random_sample_set(100, 20, 10).unwrap());
        assert!(matches!(
            random_sample_set(3, 4, 0),
            Err(Error::SampleSizeTooLarge { m: 4, n: 3 })
        ));
    }

    #[test]
    fn plan_rejects_non_unique_and_disconnected() {
        let g = random_graph(15, 4);
        let b = eigendecompose(&g.laplacian(LaplacianKind::Normalized).unwrap()).unwrap();
        let omega = b.eigenvalues()[4];
        assert!(matches!(
            SamplingPlan::for_graph(&g, &b, vec![0, 1], omega),
            Err(Error::NotUnique(_))
        ));

        let split = Graph::from_edges(
            4,
            [Edge { u: 0, v: 1, weight: 1.0 }, Edge { u: 2, v: 3, weight: 1.0 }],
        )
        .unwrap();
        let bs = eigendecompose(&split.laplacian(LaplacianKind::Normalized).unwrap()).unwrap();
        assert!(matches!(
            SamplingPlan::for_graph(&split, &bs, vec![0, 2], 0.0),
            Err(Error::Disconnected { .. })
        ));
    }

    #[test]
    fn plan_summary_json() {
        let g = random_graph(20, 5);
        let l = g.laplacian(LaplacianKind::Normalized).unwrap();
        let b = eigendecompose(&l).unwrap();
        let s = random_sample_set(20, 8, 3).unwrap();
        let omega = cutoff_bound(&l, &s).unwrap();
        let plan = SamplingPlan::for_graph(&g, &b, s.clone(), omega).unwrap();
        let json = serde_json::to_string(&plan.summary()).unwrap();
        let back: PlanSummary = serde_json::from_str(&json).unwrap();
        assert_eq!(back.sample_set, s);
        assert_eq!(back.tau_max, plan.tau_max());
        assert!(back.frame_upper <= 1.0 + 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn enlarging_sample_set_never_lowers_cutoff(seed in 0u64..500, m in 2usize..10) {
            let g = random_graph(16, seed);
            let l = g.laplacian(LaplacianKind::Normalized).unwrap();
            let big = random_sample_set(16, m + 3, seed).unwrap();
            let small = big[..m].to_vec();
            prop_assert!(cutoff_bound(&l, &small).unwrap() <= cutoff_bound(&l, &big).unwrap() + 1e-12);
        }

        #[test]
        fn certified_cutoff_gives_uniqueness(seed in 0u64..500, m in 3usize..12) {
            let g = random_graph(16, seed);
            let l = g.laplacian(LaplacianKind::Normalized).unwrap();
            let b = eigendecompose(&l).unwrap();
            let s = random_sample_set(16, m, seed + 1).unwrap();
            let omega = cutoff_bound(&l, &s).unwrap();
            let band = BandSpec::new(omega, &b);
            prop_assert!(band.len() <= s.len());
            prop_assert!(verify_uniqueness(&s, &band, &b).unwrap().is_unique());
        }

        #[test]
        fn uniqueness_matches_least_squares_rank(seed in 0u64..500, m in 1usize..10, cut in 0usize..8) {
            let g = random_graph(14, seed);
            let b = eigendecompose(&g.laplacian(LaplacianKind::Normalized).unwrap()).unwrap();
            let band = BandSpec::new(b.eigenvalues()[cut], &b);
            let s = random_sample_set(14, m, seed + 2).unwrap();
            let unique = verify_uniqueness(&s, &band, &b).unwrap().is_unique();
            // in-band f vanishing on S must be zero iff rows of U_ω on S have full column rank
            let rows = b.band_vectors(&band).select_rows(&s);
            let rank = rows.svd(false, false).rank(1e-8);
            prop_assert_eq!(unique, rank == band.len());
        }
    }
}

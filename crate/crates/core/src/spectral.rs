//! Laplacian eigendecomposition, the graph Fourier transform, band projections
//! and the frame `{P_ω δ_u : u ∈ S}` used by every reconstruction routine.

use std::fmt::Write as _;
use std::ops::Index;
use std::path::Path;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-10;

/// A real value per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSignal(DVector<f64>);

impl GraphSignal {
    pub fn zeros(n: usize) -> Self {
        Self(DVector::zeros(n))
    }

    /// Unit impulse at `u`.
    pub fn delta(n: usize, u: usize) -> Self {
        let mut v = DVector::zeros(n);
        v[u] = 1.0;
        Self(v)
    }

    pub fn from_vector(v: DVector<f64>) -> Self {
        Self(v)
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_vector(self) -> DVector<f64> {
        self.0
    }

    pub fn values(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.amax()
    }

    pub fn distance(&self, other: &GraphSignal) -> f64 {
        (&self.0 - &other.0).norm()
    }

    pub(crate) fn check_len(&self, n: usize) -> Result<()> {
        if self.len() == n {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: n,
                found: self.len(),
            })
        }
    }
}

impl From<Vec<f64>> for GraphSignal {
    fn from(values: Vec<f64>) -> Self {
        Self(DVector::from_vec(values))
    }
}

impl Index<usize> for GraphSignal {
    type Output = f64;

    fn index(&self, v: usize) -> &f64 {
        &self.0[v]
    }
}

/// Eigenvalues in ascending order with matching orthonormal eigenvector columns.
///
/// Each eigenvector is oriented so that its first entry with magnitude above
/// `1e-12` is positive, which makes every downstream trace reproducible.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
}

impl SpectralBasis {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues.iter().copied().fold(0.0, f64::max)
    }

    /// The `n × m` matrix of in-band eigenvectors.
    pub fn band_vectors(&self, band: &BandSpec) -> DMatrix<f64> {
        self.eigenvectors.columns(0, band.len()).into_owned()
    }

    /// Writes one column per eigenvector; the first data row holds the eigenvalues.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let n = self.n();
        let mut out = String::from("row");
        for k in 0..n {
            let _ = write!(out, ",u_{k}");
        }
        out.push_str("\nlambda");
        for k in 0..n {
            let _ = write!(out, ",{}", self.eigenvalues[k]);
        }
        out.push('\n');
        for v in 0..n {
            let _ = write!(out, "{v}");
            for k in 0..n {
                let _ = write!(out, ",{}", self.eigenvectors[(v, k)]);
            }
            out.push('\n');
        }
        std::fs::write(path, out)?;
        Ok(())
    }
}

/// Eigendecomposition of a symmetric positive semidefinite matrix.
///
/// Eigenvalues within `1e-10 · max(1, λ_max)` of zero are snapped to exactly
/// zero so that the constant-like eigenvector of a Laplacian always sits in
/// the band of cutoff `ω = 0`.
pub fn eigendecompose(l: &DMatrix<f64>) -> Result<SpectralBasis> {
    if !l.is_square() {
        return Err(Error::DimensionMismatch {
            expected: l.nrows(),
            found: l.ncols(),
        });
    }
    let asym = (l - l.transpose()).amax();
    if asym > SYMMETRY_TOL {
        return Err(Error::NotSymmetric(asym));
    }
    let n = l.nrows();
    let eig = SymmetricEigen::new(l.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));

    let scale = eig.eigenvalues.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let eigenvalues = DVector::from_iterator(
        n,
        order.iter().map(|&i| {
            let lambda = eig.eigenvalues[i];
            if lambda.abs() <= 1e-10 * scale {
                0.0
            } else {
                lambda
            }
        }),
    );
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(i).into_owned();
        if let Some(first) = col.iter().copied().find(|x| x.abs() > 1e-12) {
            if first < 0.0 {
                col.neg_mut();
            }
        }
        eigenvectors.set_column(k, &col);
    }
    Ok(SpectralBasis {
        eigenvalues,
        eigenvectors,
    })
}

/// Cutoff `ω` and the eigen-indices `k` with `λ_k ≤ ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandSpec {
    omega: f64,
    len: usize,
}

impl BandSpec {
    pub fn new(omega: f64, basis: &SpectralBasis) -> Self {
        // eigenvalues are sorted, so the band is a prefix
        let len = basis.eigenvalues.iter().take_while(|&&l| l <= omega).count();
        Self { omega, len }
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Band dimension `m`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn indices(&self) -> std::ops::Range<usize> {
        0..self.len
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Low,
    High,
}

/// Spectral coefficients `⟨f, u_k⟩`.
pub fn gft(f: &GraphSignal, basis: &SpectralBasis) -> Result<DVector<f64>> {
    f.check_len(basis.n())?;
    Ok(basis.eigenvectors.tr_mul(f.as_vector()))
}

pub fn igft(coefficients: &DVector<f64>, basis: &SpectralBasis) -> Result<GraphSignal> {
    if coefficients.len() != basis.n() {
        return Err(Error::DimensionMismatch {
            expected: basis.n(),
            found: coefficients.len(),
        });
    }
    Ok(GraphSignal(&basis.eigenvectors * coefficients))
}

/// `P_ω f` for [`Side::Low`], `P_{ω+} f = f - P_ω f` for [`Side::High`].
pub fn project(
    f: &GraphSignal,
    band: &BandSpec,
    basis: &SpectralBasis,
    side: Side,
) -> Result<GraphSignal> {
    f.check_len(basis.n())?;
    let u = basis.eigenvectors.columns(0, band.len());
    let low = u * u.tr_mul(f.as_vector());
    Ok(match side {
        Side::Low => GraphSignal(low),
        Side::High => GraphSignal(f.as_vector() - low),
    })
}

/// The frame elements `P_ω δ_u` for an ordered sample set, stored as the
/// columns of an `n × |S|` matrix.
#[derive(Debug, Clone)]
pub struct FrameElements {
    sample_set: Vec<usize>,
    matrix: DMatrix<f64>,
}

impl FrameElements {
    pub fn sample_set(&self) -> &[usize] {
        &self.sample_set
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `(P_ω δ_{S[j]})(v)`.
    pub fn get(&self, v: usize, j: usize) -> f64 {
        self.matrix[(v, j)]
    }

    pub fn element(&self, j: usize) -> GraphSignal {
        GraphSignal(self.matrix.column(j).into_owned())
    }

    /// Spectral norm of `T` as an operator on all of `R^n`.
    pub fn operator_norm(&self) -> f64 {
        if self.matrix.ncols() == 0 {
            return 0.0;
        }
        self.matrix
            .clone()
            .singular_values()
            .iter()
            .copied()
            .fold(0.0, f64::max)
    }
}

fn check_sample_set(sample_set: &[usize], n: usize) -> Result<()> {
    if let Some(&u) = sample_set.iter().find(|&&u| u >= n) {
        return Err(Error::InvalidArgument(format!("sample vertex {u} out of range 0..{n}")));
    }
    let mut sorted = sample_set.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidArgument("sample set has repeated vertices".into()));
    }
    Ok(())
}

pub fn frame_elements(
    sample_set: &[usize],
    band: &BandSpec,
    basis: &SpectralBasis,
) -> Result<FrameElements> {
    if sample_set.is_empty() {
        return Err(Error::EmptySampleSet);
    }
    check_sample_set(sample_set, basis.n())?;
    let u = basis.eigenvectors.columns(0, band.len());
    let mut matrix = DMatrix::zeros(basis.n(), sample_set.len());
    for (j, &s) in sample_set.iter().enumerate() {
        let col = u * u.row(s).transpose();
        matrix.set_column(j, &col);
    }
    Ok(FrameElements {
        sample_set: sample_set.to_vec(),
        matrix,
    })
}

/// `T f = Σ_{u∈S} f(u) P_ω δ_u`.
pub fn frame_operator_apply(f: &GraphSignal, elements: &FrameElements) -> Result<GraphSignal> {
    f.check_len(elements.matrix.nrows())?;
    let mut out = DVector::zeros(f.len());
    for (j, &u) in elements.sample_set.iter().enumerate() {
        out.axpy(f[u], &elements.matrix.column(j), 1.0);
    }
    Ok(GraphSignal(out))
}

/// `U_ω^T I_S U_ω`, the frame operator written in in-band coefficients.
pub fn sampled_gram(sample_set: &[usize], band_vectors: &DMatrix<f64>) -> DMatrix<f64> {
    let m = band_vectors.ncols();
    let mut gram = DMatrix::zeros(m, m);
    for &u in sample_set {
        let row = band_vectors.row(u);
        gram += row.transpose() * row;
    }
    gram
}

/// Frame bounds `(A, B)`: extreme eigenvalues of `U_ω^T I_S U_ω`.
///
/// `A = 0` (to `1e-10`) is a valid answer and means `S` is not a uniqueness
/// set for the band.
pub fn frame_bounds(
    sample_set: &[usize],
    band: &BandSpec,
    basis: &SpectralBasis,
) -> Result<(f64, f64)> {
    if band.is_empty() {
        return Err(Error::EmptyBand(band.omega()));
    }
    check_sample_set(sample_set, basis.n())?;
    let gram = sampled_gram(sample_set, &basis.band_vectors(band));
    let eig = SymmetricEigen::new(gram);
    let lo = eig.eigenvalues.min().max(0.0);
    let hi = eig.eigenvalues.max().max(0.0);
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{knn_geometric_graph, LaplacianKind};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_basis(n: usize, seed: u64, kind: LaplacianKind) -> SpectralBasis {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<[f64; 2]> = (0..n).map(|_| [rng.random(), rng.random()]).collect();
        let g = knn_geometric_graph(&pts, 3).unwrap();
        eigendecompose(&g.laplacian(kind).unwrap()).unwrap()
    }

    fn random_signal(n: usize, seed: u64) -> GraphSignal {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        GraphSignal::from((0..n).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<_>>())
    }

    fn in_band_signal(basis: &SpectralBasis, band: &BandSpec, seed: u64) -> GraphSignal {
        let f = random_signal(basis.n(), seed);
        project(&f, band, basis, Side::Low).unwrap()
    }

    #[test]
    fn two_by_two_spectrum() {
        let l = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        let b = eigendecompose(&l).unwrap();
        assert_eq!(b.eigenvalues()[0], 0.0);
        assert!((b.eigenvalues()[1] - 2.0).abs() < 1e-12);
        // sign convention: first nonzero entry positive
        for k in 0..2 {
            assert!(b.eigenvectors()[(0, k)] > 0.0);
        }
    }

    #[test]
    fn identity_spectrum_is_signed() {
        let b = eigendecompose(&DMatrix::identity(4, 4)).unwrap();
        assert!(b.eigenvalues().iter().all(|&l| (l - 1.0).abs() < 1e-14));
        let u = b.eigenvectors();
        assert!(((u.transpose() * u) - DMatrix::identity(4, 4)).amax() < 1e-12);
        for k in 0..4 {
            let first = u.column(k).iter().copied().find(|x| x.abs() > 1e-12).unwrap();
            assert!(first > 0.0);
        }
    }

    #[test]
    fn rejects_asymmetric_input() {
        let l = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -0.5, 1.0]);
        assert!(matches!(eigendecompose(&l), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn basis_invariants_on_random_graph() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pts: Vec<[f64; 2]> = (0..30).map(|_| [rng.random(), rng.random()]).collect();
        let g = knn_geometric_graph(&pts, 4).unwrap();
        let l = g.laplacian(LaplacianKind::Normalized).unwrap();
        let b = eigendecompose(&l).unwrap();
        let u = b.eigenvectors();
        assert!(((u.transpose() * u) - DMatrix::identity(30, 30)).amax() < 1e-8);
        for k in 0..30 {
            let lambda = b.eigenvalues()[k];
            let resid = (&l * u.column(k) - u.column(k) * lambda).amax();
            assert!(resid <= 1e-6 * lambda.max(1.0));
            if k > 0 {
                assert!(b.eigenvalues()[k - 1] <= lambda);
            }
        }
    }

    #[test]
    fn normalized_laplacian_null_vector() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let pts: Vec<[f64; 2]> = (0..10).map(|_| [rng.random(), rng.random()]).collect();
        let g = knn_geometric_graph(&pts, 3).unwrap();
        assert!(g.is_connected());
        let l = g.laplacian(LaplacianKind::Normalized).unwrap();
        let b = eigendecompose(&l).unwrap();
        assert_eq!(b.eigenvalues()[0], 0.0);
        assert!(b.eigenvalues()[1] > 1e-8, "exactly one zero eigenvalue");
        let d_half = g.degrees().map(f64::sqrt).normalize();
        let u0 = b.eigenvectors().column(0);
        assert!((u0 - &d_half).amax() < 1e-10);
        // rank of L is n - 1
        let rank = l.clone().svd(false, false).rank(1e-9);
        assert_eq!(rank, 9);
    }

    #[test]
    fn gft_of_eigenvector_is_unit_coefficient() {
        let b = random_basis(12, 1, LaplacianKind::Normalized);
        let f = GraphSignal::from_vector(b.eigenvectors().column(3).into_owned());
        let c = gft(&f, &b).unwrap();
        for k in 0..12 {
            let expected = if k == 3 { 1.0 } else { 0.0 };
            assert!((c[k] - expected).abs() < 1e-12);
        }
        let zero = gft(&GraphSignal::zeros(12), &b).unwrap();
        assert!(zero.iter().all(|&x| x == 0.0));
        assert!(gft(&GraphSignal::zeros(11), &b).is_err());
    }

    #[test]
    fn projection_edge_cases() {
        let b = random_basis(15, 2, LaplacianKind::Normalized);
        let band = BandSpec::new(b.eigenvalues()[5], &b);
        assert_eq!(band.len(), 6);

        let f = in_band_signal(&b, &band, 3);
        let low = project(&f, &band, &b, Side::Low).unwrap();
        assert!(low.distance(&f) < 1e-9);

        let high_mode = GraphSignal::from_vector(b.eigenvectors().column(9).into_owned());
        let low = project(&high_mode, &band, &b, Side::Low).unwrap();
        assert!(low.norm() < 1e-12);
    }

    #[test]
    fn band_is_inclusive_at_cutoff() {
        let b = random_basis(10, 3, LaplacianKind::Normalized);
        let band = BandSpec::new(b.eigenvalues()[2], &b);
        assert_eq!(band.len(), 3);
        assert_eq!(BandSpec::new(0.0, &b).len(), 1);
    }

    #[test]
    fn full_band_frame_elements_are_impulses() {
        let b = random_basis(10, 4, LaplacianKind::Normalized);
        let band = BandSpec::new(b.lambda_max(), &b);
        let fe = frame_elements(&[1, 4, 7], &band, &b).unwrap();
        for (j, &u) in [1usize, 4, 7].iter().enumerate() {
            assert!(fe.element(j).distance(&GraphSignal::delta(10, u)) < 1e-12);
        }
    }

    #[test]
    fn zero_cutoff_unnormalized_projects_onto_constants() {
        let b = random_basis(10, 5, LaplacianKind::Unnormalized);
        let band = BandSpec::new(0.0, &b);
        assert_eq!(band.len(), 1);
        let fe = frame_elements(&[0, 3], &band, &b).unwrap();
        for j in 0..2 {
            for v in 0..10 {
                assert!((fe.get(v, j) - 0.1).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn frame_element_norm_matches_expansion() {
        let b = random_basis(14, 6, LaplacianKind::Normalized);
        let band = BandSpec::new(b.eigenvalues()[4], &b);
        let s: Vec<usize> = (0..14).collect();
        let fe = frame_elements(&s, &band, &b).unwrap();
        for (j, &u) in s.iter().enumerate() {
            let expected: f64 = band.indices().map(|k| b.eigenvectors()[(u, k)].powi(2)).sum();
            let got = fe.element(j).norm().powi(2);
            assert!((got - expected).abs() < 1e-12);
            assert!(got <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn frame_elements_reject_empty_and_repeated_samples() {
        let b = random_basis(8, 7, LaplacianKind::Normalized);
        let band = BandSpec::new(0.5, &b);
        assert!(matches!(frame_elements(&[], &band, &b), Err(Error::EmptySampleSet)));
        assert!(frame_elements(&[1, 1], &band, &b).is_err());
        assert!(frame_elements(&[8], &band, &b).is_err());
    }

    #[test]
    fn frame_operator_full_sampling_is_identity_on_band() {
        let b = random_basis(12, 8, LaplacianKind::Normalized);
        let band = BandSpec::new(b.eigenvalues()[4], &b);
        let all: Vec<usize> = (0..12).collect();
        let fe = frame_elements(&all, &band, &b).unwrap();
        let f = in_band_signal(&b, &band, 9);
        assert!(frame_operator_apply(&f, &fe).unwrap().distance(&f) < 1e-12);
        assert_eq!(frame_operator_apply(&GraphSignal::zeros(12), &fe).unwrap().norm(), 0.0);
        assert!((fe.operator_norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn frame_bounds_full_sampling_and_scalar_band() {
        let b = random_basis(12, 9, LaplacianKind::Normalized);
        let band = BandSpec::new(b.eigenvalues()[3], &b);
        let all: Vec<usize> = (0..12).collect();
        let (a, bb) = frame_bounds(&all, &band, &b).unwrap();
        assert!((a - 1.0).abs() < 1e-12 && (bb - 1.0).abs() < 1e-12);

        let band0 = BandSpec::new(0.0, &b);
        let s = [2usize, 5, 11];
        let (a, bb) = frame_bounds(&s, &band0, &b).unwrap();
        let expected: f64 = s.iter().map(|&u| b.eigenvectors()[(u, 0)].powi(2)).sum();
        assert!((a - expected).abs() < 1e-12 && (bb - expected).abs() < 1e-12);
    }

    #[test]
    fn operator_norm_is_sqrt_of_upper_frame_bound() {
        let b = random_basis(20, 10, LaplacianKind::Normalized);
        let band = BandSpec::new(b.eigenvalues()[5], &b);
        let s = [0usize, 3, 6, 9, 12, 15, 18];
        let fe = frame_elements(&s, &band, &b).unwrap();
        let (_, upper) = frame_bounds(&s, &band, &b).unwrap();
        assert!((fe.operator_norm() - upper.sqrt()).abs() < 1e-10);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn gft_round_trip_and_parseval(seed in 0u64..1000, n in 5usize..25) {
            let b = random_basis(n, seed, LaplacianKind::Normalized);
            let f = random_signal(n, seed ^ 0xabc);
            let c = gft(&f, &b).unwrap();
            prop_assert!(igft(&c, &b).unwrap().distance(&f) < 1e-9);
            prop_assert!((f.norm().powi(2) - c.norm_squared()).abs() < 1e-9);
        }

        #[test]
        fn projections_split_orthogonally(seed in 0u64..1000, cut in 0usize..10) {
            let b = random_basis(12, seed, LaplacianKind::Normalized);
            let band = BandSpec::new(b.eigenvalues()[cut], &b);
            let f = random_signal(12, seed + 1);
            let low = project(&f, &band, &b, Side::Low).unwrap();
            let high = project(&f, &band, &b, Side::High).unwrap();
            let sum = GraphSignal::from_vector(low.as_vector() + high.as_vector());
            prop_assert!(sum.distance(&f) < 1e-12);
            prop_assert!((low.norm().powi(2) + high.norm().powi(2) - f.norm().powi(2)).abs() < 1e-9);
        }

        #[test]
        fn frame_operator_is_self_adjoint_and_bounded(seed in 0u64..1000, m in 1usize..8) {
            let b = random_basis(16, seed, LaplacianKind::Normalized);
            let band = BandSpec::new(b.eigenvalues()[m - 1], &b);
            let s: Vec<usize> = (0..16).filter(|v| (v + seed as usize).is_multiple_of(3)).collect();
            let fe = frame_elements(&s, &band, &b).unwrap();
            let (lower, upper) = frame_bounds(&s, &band, &b).unwrap();
            let f = in_band_signal(&b, &band, seed + 7);
            let g = in_band_signal(&b, &band, seed + 8);
            let tf = frame_operator_apply(&f, &fe).unwrap();
            let tg = frame_operator_apply(&g, &fe).unwrap();
            prop_assert!((tf.as_vector().dot(g.as_vector()) - f.as_vector().dot(tg.as_vector())).abs() < 1e-9);

            let quad = f.as_vector().dot(tf.as_vector());
            let nf2 = f.norm().powi(2);
            prop_assert!(lower * nf2 <= quad + 1e-9);
            prop_assert!(quad <= upper * nf2 + 1e-9);
            prop_assert!(tf.norm() <= f.norm() + 1e-12);

            // Σ_u ⟨f, P δ_u⟩ P δ_u agrees with Σ_u f(u) P δ_u on the band
            let mut frame_form = DVector::zeros(16);
            for j in 0..s.len() {
                let e = fe.element(j);
                frame_form.axpy(f.as_vector().dot(e.as_vector()), e.as_vector(), 1.0);
            }
            prop_assert!((frame_form - tf.as_vector()).amax() < 1e-9);

            // T is a contraction on arbitrary signals too
            let r = random_signal(16, seed + 9);
            let tr = frame_operator_apply(&r, &fe).unwrap();
            prop_assert!(tr.norm() <= r.norm() + 1e-12);
        }
    }
}

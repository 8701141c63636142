//! Synthetic bandlimited signals, slowly varying truth sequences, and the
//! Intel Berkeley lab temperature loader.

mod intel_lab;

pub use intel_lab::{load_intel_lab, read_mote_locations, IntelLabData, LoadReport, TimeWindow};

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::spectral::{BandSpec, GraphSignal, SpectralBasis};

/// A sequence of truth frames `f*^{(0)}, f*^{(1)}, …`.
///
/// A single-frame sequence is time-invariant: every index returns that frame.
#[derive(Debug, Clone)]
pub struct TimeVaryingSignal {
    frames: Vec<GraphSignal>,
    delta: f64,
}

impl TimeVaryingSignal {
    pub fn constant(f: GraphSignal) -> Self {
        Self {
            frames: vec![f],
            delta: 0.0,
        }
    }

    /// Wraps explicit frames; `delta` is measured from the data.
    pub fn from_frames(frames: Vec<GraphSignal>) -> Result<Self> {
        let Some(first) = frames.first() else {
            return Err(Error::InvalidArgument("no frames".into()));
        };
        let n = first.len();
        for f in &frames {
            f.check_len(n)?;
        }
        let delta = frames
            .windows(2)
            .map(|w| (w[1].as_vector() - w[0].as_vector()).amax())
            .fold(0.0, f64::max);
        Ok(Self { frames, delta })
    }

    /// `initial` followed by `steps` applications of [`evolve`].
    pub fn synthetic(
        initial: GraphSignal,
        band: &BandSpec,
        basis: &SpectralBasis,
        delta: f64,
        steps: usize,
        rng_seed: u64,
    ) -> Result<Self> {
        if delta == 0.0 {
            return Ok(Self::constant(initial));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        let mut frames = Vec::with_capacity(steps + 1);
        frames.push(initial);
        for _ in 0..steps {
            let next = evolve(frames.last().expect("nonempty"), band, basis, delta, rng.random())?;
            frames.push(next);
        }
        Ok(Self { frames, delta })
    }

    pub fn n(&self) -> usize {
        self.frames[0].len()
    }

    pub fn is_time_invariant(&self) -> bool {
        self.frames.len() == 1
    }

    /// Number of stored frames.
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Per-step per-entry change bound `Δ`.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn frame(&self, k: usize) -> Option<&GraphSignal> {
        if self.is_time_invariant() {
            self.frames.first()
        } else {
            self.frames.get(k)
        }
    }

    pub fn frames(&self) -> &[GraphSignal] {
        &self.frames
    }

    /// Checks that frames `0..=last` exist.
    pub fn require(&self, last: usize) -> Result<()> {
        if self.is_time_invariant() || last < self.frames.len() {
            Ok(())
        } else {
            Err(Error::InsufficientFrames {
                needed: last + 1,
                available: self.frames.len(),
            })
        }
    }

    /// CSV with columns `k,v,value`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("k,v,value\n");
        for (k, f) in self.frames.iter().enumerate() {
            for (v, x) in f.values().iter().enumerate() {
                let _ = writeln!(out, "{k},{v},{x}");
            }
        }
        std::fs::write(path, out)?;
        Ok(())
    }
}

/// A random in-band signal with norm `norm`; in-band spectral coefficients are
/// i.i.d. standard normal before rescaling, out-of-band coefficients are zero.
pub fn generate_bandlimited(
    band: &BandSpec,
    basis: &SpectralBasis,
    rng_seed: u64,
    norm: f64,
) -> Result<GraphSignal> {
    if band.is_empty() {
        return Err(Error::EmptyBand(band.omega()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let coeffs = DVector::from_fn(band.len(), |_, _| rng.sample::<f64, _>(StandardNormal));
    let mut f = basis.band_vectors(band) * coeffs;
    let current = f.norm();
    if current > 0.0 {
        f *= norm / current;
    }
    Ok(GraphSignal::from_vector(f))
}

/// A random signal in the orthogonal complement of the band with norm `norm`.
pub fn generate_out_of_band(
    band: &BandSpec,
    basis: &SpectralBasis,
    rng_seed: u64,
    norm: f64,
) -> Result<GraphSignal> {
    let n = basis.n();
    if band.len() == n {
        return Err(Error::InvalidArgument(
            "band covers the whole spectrum; no out-of-band component exists".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let coeffs = DVector::from_fn(n - band.len(), |_, _| rng.sample::<f64, _>(StandardNormal));
    let mut h = basis.eigenvectors().columns(band.len(), n - band.len()) * coeffs;
    let current = h.norm();
    if current > 0.0 {
        h *= norm / current;
    }
    Ok(GraphSignal::from_vector(h))
}

/// `f + g` with `g` in-band and `max_u |g(u)| = delta`.
pub fn evolve(
    f: &GraphSignal,
    band: &BandSpec,
    basis: &SpectralBasis,
    delta: f64,
    rng_seed: u64,
) -> Result<GraphSignal> {
    f.check_len(basis.n())?;
    if delta < 0.0 {
        return Err(Error::InvalidArgument(format!("delta = {delta} is negative")));
    }
    if delta == 0.0 {
        return Ok(f.clone());
    }
    let g = generate_bandlimited(band, basis, rng_seed, 1.0)?;
    let scale = delta / g.max_abs();
    Ok(GraphSignal::from_vector(f.as_vector() + g.as_vector() * scale))
}

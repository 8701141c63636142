//! Error traces and every measurable quantity of the convergence analysis:
//! in-band and out-of-band errors against the biased target, the step
//! increments `δ^{(k)}` and delay discrepancies `η^{(k)}`, steady-state and
//! rate estimators, and the per-step inequality checks.
//!
//! Row `k` of a trace describes `f^{(k)}`. Its `mu_k`/`beta_k` columns hold the
//! parameters of the step that leaves `f^{(k)}` (that is `μ_{k+1}`, `β_{k+1}`),
//! and the in-band error is measured against `f̃*^{(k)}` built with that `β`.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::reconstruction::{biased_target, Schedule};
use crate::sampling::SamplingPlan;
use crate::spectral::{project, BandSpec, GraphSignal, Side, SpectralBasis};

pub const TRACE_HEADER: &str =
    "k,total_error,relative_error,in_band_error,out_band_error,delta_k,eta_k,mu_k,beta_k";

/// Relative change of consecutive windowed means below which a trace is steady.
pub const STEADY_TOL: f64 = 0.01;

/// Absolute change of consecutive windowed mean relative errors below which a
/// tracking run is steady.
pub const STEADY_BAND: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub k: usize,
    /// `‖f^{(k)} − f*^{(k)}‖`.
    pub total_error: f64,
    /// `total_error / ‖f*^{(k)}‖`.
    pub relative_error: f64,
    /// `e^{(k)}`.
    pub in_band_error: f64,
    /// `e₊^{(k)}`.
    pub out_band_error: f64,
    pub delta_k: f64,
    pub eta_k: f64,
    pub mu_k: f64,
    pub beta_k: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ErrorTrace {
    pub rows: Vec<TraceRow>,
}

impl ErrorTrace {
    /// A trace carrying only total errors, for post-processing synthetic curves.
    pub fn from_totals(totals: &[f64]) -> Self {
        let rows = totals
            .iter()
            .enumerate()
            .map(|(k, &t)| TraceRow {
                k,
                total_error: t,
                relative_error: f64::NAN,
                in_band_error: f64::NAN,
                out_band_error: f64::NAN,
                delta_k: f64::NAN,
                eta_k: f64::NAN,
                mu_k: f64::NAN,
                beta_k: f64::NAN,
            })
            .collect();
        Self { rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn totals(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.total_error).collect()
    }

    pub fn relatives(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.relative_error).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.rows.len() * 120);
        out.push_str(TRACE_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.k,
                r.total_error,
                r.relative_error,
                r.in_band_error,
                r.out_band_error,
                r.delta_k,
                r.eta_k,
                r.mu_k,
                r.beta_k
            );
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn parse_csv(text: &str, origin: &Path) -> Result<Self> {
        let err = |line: usize, msg: &str| Error::Parse {
            path: origin.to_path_buf(),
            line,
            msg: msg.to_string(),
        };
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, header)) if header.trim() == TRACE_HEADER => {}
            _ => return Err(err(1, "missing trace header")),
        }
        let mut rows = Vec::new();
        for (idx, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 9 {
                return Err(err(idx + 1, "expected 9 columns"));
            }
            let k = fields[0].parse().map_err(|_| err(idx + 1, "bad k"))?;
            let mut vals = [0.0; 8];
            for (slot, field) in vals.iter_mut().zip(&fields[1..]) {
                *slot = field.trim().parse().map_err(|_| err(idx + 1, "bad number"))?;
            }
            rows.push(TraceRow {
                k,
                total_error: vals[0],
                relative_error: vals[1],
                in_band_error: vals[2],
                out_band_error: vals[3],
                delta_k: vals[4],
                eta_k: vals[5],
                mu_k: vals[6],
                beta_k: vals[7],
            });
        }
        Ok(Self { rows })
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        Self::parse_csv(&std::fs::read_to_string(path)?, path)
    }
}

/// `(e, e₊)`: `‖P_ω f − P_ω f̃‖` and `‖P_{ω+} f‖`.
pub fn band_errors(
    f_k: &GraphSignal,
    f_tilde_k: &GraphSignal,
    band: &BandSpec,
    basis: &SpectralBasis,
) -> Result<(f64, f64)> {
    f_tilde_k.check_len(f_k.len())?;
    let stray = project(f_tilde_k, band, basis, Side::High)?.norm();
    if stray > 1e-8 {
        return Err(Error::OutOfBandTarget(stray));
    }
    let low = project(f_k, band, basis, Side::Low)?;
    let high = project(f_k, band, basis, Side::High)?;
    let low_target = project(f_tilde_k, band, basis, Side::Low)?;
    Ok((low.distance(&low_target), high.norm()))
}

/// Estimates at the sensors over the last `depth` iterations. Iterations
/// before `0` read as the initial estimate.
#[derive(Debug, Clone)]
pub struct EstimateHistory {
    depth: usize,
    sensors: Vec<usize>,
    values: Vec<f64>,
    initial: Vec<f64>,
    newest: Option<usize>,
}

impl EstimateHistory {
    pub fn new(plan: &SamplingPlan) -> Self {
        let depth = plan.tau_max() + 1;
        let sensors = plan.sample_set().to_vec();
        Self {
            depth,
            values: vec![0.0; depth * sensors.len()],
            initial: vec![0.0; sensors.len()],
            sensors,
            newest: None,
        }
    }

    pub fn push(&mut self, k: usize, f: &GraphSignal) -> Result<()> {
        let expected = self.newest.map_or(0, |j| j + 1);
        if k != expected {
            return Err(Error::InvalidArgument(format!(
                "estimate history expects iteration {expected}, got {k}"
            )));
        }
        let s = self.sensors.len();
        let slot = k % self.depth;
        for (i, &u) in self.sensors.iter().enumerate() {
            self.values[slot * s + i] = f[u];
        }
        if k == 0 {
            self.initial.copy_from_slice(&self.values[slot * s..(slot + 1) * s]);
        }
        self.newest = Some(k);
        Ok(())
    }

    /// `f^{(j)}(S[idx])`.
    pub fn get(&self, j: i64, idx: usize) -> Result<f64> {
        let missing = Error::MissingHistory {
            sensor: self.sensors.get(idx).copied().unwrap_or(idx),
            iteration: j,
        };
        let Some(newest) = self.newest else {
            return Err(missing);
        };
        if j < 0 {
            return Ok(self.initial[idx]);
        }
        let j = j as usize;
        if j > newest || j + self.depth <= newest {
            return Err(missing);
        }
        Ok(self.values[(j % self.depth) * self.sensors.len() + idx])
    }
}

/// `(δ^{(k)}, η^{(k)})` with
/// `δ^{(k)} = ‖f^{(k)} − f^{(k−1)}‖` and
/// `η^{(k)} = ‖Σ_{u∈S} (f^{(k)}(u) I − F_u^{(k)}) P_ω δ_u‖`,
/// where `F_u^{(k)} = diag_v f^{(k−τ(u,v))}(u)`. The history must already
/// contain `f^{(k)}`.
pub fn recursion_diagnostics(
    f_k: &GraphSignal,
    f_km1: &GraphSignal,
    history: &EstimateHistory,
    plan: &SamplingPlan,
) -> Result<(f64, f64)> {
    let k = history.newest.ok_or(Error::MissingHistory {
        sensor: 0,
        iteration: 0,
    })?;
    let delta = f_k.distance(f_km1);
    let frame = plan.frame();
    let delays = plan.delays();
    let mut w = DVector::zeros(plan.n());
    for v in 0..plan.n() {
        let mut acc = 0.0;
        for (j, &u) in plan.sample_set().iter().enumerate() {
            let lagged = history.get(k as i64 - delays.get(u, v) as i64, j)?;
            acc += (f_k[u] - lagged) * frame.get(v, j);
        }
        w[v] = acc;
    }
    Ok((delta, w.norm()))
}

/// Builds trace rows as a trajectory unfolds.
#[derive(Debug)]
pub struct TraceRecorder<'a> {
    plan: &'a SamplingPlan,
    schedule: Schedule,
    history: EstimateHistory,
    previous: Option<GraphSignal>,
    cached_target: Option<(f64, GraphSignal)>,
    truth_invariant: bool,
    trace: ErrorTrace,
}

impl<'a> TraceRecorder<'a> {
    pub fn new(plan: &'a SamplingPlan, schedule: Schedule, truth_invariant: bool) -> Self {
        Self {
            plan,
            schedule,
            history: EstimateHistory::new(plan),
            previous: None,
            cached_target: None,
            truth_invariant,
            trace: ErrorTrace::default(),
        }
    }

    pub fn record(&mut self, k: usize, f_k: &GraphSignal, truth_k: &GraphSignal) -> Result<()> {
        self.history.push(k, f_k)?;
        let mu = self.schedule.mu(k + 1);
        let beta = self.schedule.beta(k + 1);

        let target = match &self.cached_target {
            Some((b, t)) if self.truth_invariant && *b == beta => t.clone(),
            _ => {
                let t = biased_target(truth_k, self.plan, beta)?;
                self.cached_target = Some((beta, t.clone()));
                t
            }
        };
        let low = self.plan.project_low(f_k);
        let in_band = low.distance(&target);
        let out_band = (f_k.as_vector() - low.as_vector()).norm();

        let (delta_k, eta_k) = match &self.previous {
            Some(prev) => recursion_diagnostics(f_k, prev, &self.history, self.plan)?,
            None => (0.0, recursion_diagnostics(f_k, f_k, &self.history, self.plan)?.1),
        };

        let total = f_k.distance(truth_k);
        let truth_norm = truth_k.norm();
        self.trace.rows.push(TraceRow {
            k,
            total_error: total,
            relative_error: if truth_norm > 0.0 { total / truth_norm } else { f64::NAN },
            in_band_error: in_band,
            out_band_error: out_band,
            delta_k,
            eta_k,
            mu_k: mu,
            beta_k: beta,
        });
        self.previous = Some(f_k.clone());
        Ok(())
    }

    pub fn finish(self) -> ErrorTrace {
        self.trace
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Mean of the last `window` values if the trace has settled: the last two
/// windowed means differ by less than [`STEADY_TOL`] relative, or the tail
/// is numerically zero compared with the first value.
pub fn steady_state(values: &[f64], window: usize) -> Option<f64> {
    if window == 0 || values.len() < 2 * window || values.iter().any(|x| !x.is_finite()) {
        return None;
    }
    let last = mean(&values[values.len() - window..]);
    let prev = mean(&values[values.len() - 2 * window..values.len() - window]);
    let scale = values[0].abs();
    if last <= 1e-12 * scale || (last - prev).abs() <= STEADY_TOL * prev.abs() {
        Some(last)
    } else {
        None
    }
}

/// Mean of the last `window` relative errors if the last two windowed means
/// differ by less than [`STEADY_BAND`] in absolute terms.
///
/// Tracking errors fluctuate with the drifting truth, so a relative rule on
/// their windowed means rarely settles; relative errors are already
/// normalized, which makes an absolute band meaningful.
pub fn steady_band(relative_errors: &[f64], window: usize) -> Option<f64> {
    let n = relative_errors.len();
    if window == 0 || n < 2 * window || relative_errors.iter().any(|x| !x.is_finite()) {
        return None;
    }
    let last = mean(&relative_errors[n - window..]);
    let prev = mean(&relative_errors[n - 2 * window..n - window]);
    ((last - prev).abs() < STEADY_BAND).then_some(last)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConvergenceRate {
    Converged {
        rate: f64,
        steady_error: f64,
        /// First iteration at or below 1.2× the steady-state error.
        iterations: usize,
    },
    NotConverged,
}

/// `(total^{(m)} / total^{(0)})^{1/m}` with `m` the first iteration whose
/// total error is within 1.2× the steady-state error.
pub fn convergence_rate(trace: &ErrorTrace, steady_window: usize) -> Result<ConvergenceRate> {
    let totals = trace.totals();
    if steady_window == 0 || totals.len() < 2 * steady_window {
        return Err(Error::InvalidArgument(format!(
            "trace of {} rows is too short for a steady window of {steady_window}",
            totals.len()
        )));
    }
    let Some(steady) = steady_state(&totals, steady_window) else {
        return Ok(ConvergenceRate::NotConverged);
    };
    let m = totals
        .iter()
        .position(|&t| t <= 1.2 * steady)
        .unwrap_or(totals.len() - 1)
        .max(1);
    let rate = if totals[0] > 0.0 {
        (totals[m] / totals[0]).powf(1.0 / m as f64)
    } else {
        0.0
    };
    Ok(ConvergenceRate::Converged {
        rate,
        steady_error: steady,
        iterations: m,
    })
}

/// Least-squares slope of `log(total)` against `log(k)` over `k_min..=k_max`.
pub fn rate_exponent_fit(trace: &ErrorTrace, k_min: usize, k_max: usize) -> Result<f64> {
    if k_min < 1 || k_max <= k_min {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= k_min < k_max, got {k_min}..{k_max}"
        )));
    }
    if k_max >= trace.len() {
        return Err(Error::InvalidArgument(format!(
            "k_max = {k_max} beyond trace of {} rows",
            trace.len()
        )));
    }
    let mut xs = Vec::with_capacity(k_max - k_min + 1);
    let mut ys = Vec::with_capacity(k_max - k_min + 1);
    for row in &trace.rows[k_min..=k_max] {
        if row.total_error.is_nan() || row.total_error <= 0.0 {
            return Err(Error::NonPositiveError(row.k));
        }
        xs.push((row.k as f64).ln());
        ys.push(row.total_error.ln());
    }
    let (mx, my) = (mean(&xs), mean(&ys));
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Worst slack (right side minus left side) of one inequality over a trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityCheck {
    pub name: &'static str,
    pub worst_slack: f64,
    pub worst_k: usize,
    pub checked: usize,
}

impl InequalityCheck {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            worst_slack: f64::INFINITY,
            worst_k: 0,
            checked: 0,
        }
    }

    fn observe(&mut self, k: usize, slack: f64) {
        self.checked += 1;
        if slack < self.worst_slack || slack.is_nan() {
            self.worst_slack = slack;
            self.worst_k = k;
        }
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.worst_slack >= -tol
    }
}

/// Evaluates the per-step inequalities relating `e₊`, `δ` and `η`, with `Δ`
/// the truth's per-step change bound (0 for time-invariant truth):
///
/// * out-of-band recursion, for `k ≥ τ`:
///   `e₊^{(k+1)} ≤ (1 − μβ) e₊^{(k)} + μ η^{(k)} + (√N + μ|S|τ) Δ`
/// * delay discrepancy, for `k ≥ 1`:
///   `η^{(k)} ≤ √|S| Σ_{i=0}^{τ−1} δ^{(k−i)}`
/// * step size, for `k ≥ τ + 1`:
///   `δ^{(k)} ≤ μ((β + ‖T‖)(e^{(k−1)} + e₊^{(k−1)}) + η^{(k−1)}) + μ|S|τΔ`
///
/// The first and third only apply once every delayed index is nonnegative.
pub fn check_recursion_inequalities(
    trace: &ErrorTrace,
    plan: &SamplingPlan,
    truth_delta: f64,
) -> [InequalityCheck; 3] {
    let rows = &trace.rows;
    let n = plan.n() as f64;
    let s = plan.sample_set().len() as f64;
    let tau = plan.tau_max();
    let t_norm = plan.operator_norm();

    let mut out_band = InequalityCheck::new("out-of-band recursion");
    let mut eta = InequalityCheck::new("delay discrepancy");
    let mut step = InequalityCheck::new("step size");

    for k in 0..rows.len() {
        let r = &rows[k];
        if k >= tau && k + 1 < rows.len() {
            let rhs = (1.0 - r.mu_k * r.beta_k) * r.out_band_error
                + r.mu_k * r.eta_k
                + (n.sqrt() + r.mu_k * s * tau as f64) * truth_delta;
            out_band.observe(k, rhs - rows[k + 1].out_band_error);
        }
        if k >= 1 {
            let sum: f64 = (0..tau)
                .filter(|&i| i < k)
                .map(|i| rows[k - i].delta_k)
                .sum();
            eta.observe(k, s.sqrt() * sum - r.eta_k);
        }
        if k > tau {
            let p = &rows[k - 1];
            let rhs = p.mu_k
                * ((p.beta_k + t_norm) * (p.in_band_error + p.out_band_error) + p.eta_k)
                + p.mu_k * s * tau as f64 * truth_delta;
            step.observe(k, rhs - r.delta_k);
        }
    }
    [out_band, eta, step]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{random_sensor_graph, LaplacianKind};
    use crate::sampling::{cutoff_bound, random_sample_set};
    use crate::signals::generate_bandlimited;
    use crate::spectral::eigendecompose;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn basis_and_band() -> (SpectralBasis, BandSpec) {
        let g = random_sensor_graph(20, 4, 21).unwrap().1;
        let b = eigendecompose(&g.laplacian(LaplacianKind::Normalized).unwrap()).unwrap();
        let band = BandSpec::new(b.eigenvalues()[4], &b);
        (b, band)
    }

    #[test]
    fn band_errors_cases() {
        let (b, band) = basis_and_band();
        let target = generate_bandlimited(&band, &b, 1, 1.0).unwrap();
        let (e, ep) = band_errors(&target, &target, &band, &b).unwrap();
        assert_eq!(e, 0.0);
        assert!(ep < 1e-12);

        let c = -0.7;
        let mode = b.eigenvectors().column(12) * c;
        let f = GraphSignal::from_vector(target.as_vector() + mode);
        let (e, ep) = band_errors(&f, &target, &band, &b).unwrap();
        assert!(e < 1e-12);
        assert!((ep - 0.7).abs() < 1e-12);

        let bad = GraphSignal::from_vector(b.eigenvectors().column(15).into_owned());
        assert!(matches!(band_errors(&f, &bad, &band, &b), Err(Error::OutOfBandTarget(_))));
    }

    #[test]
    fn band_errors_pythagoras() {
        let (b, band) = basis_and_band();
        let target = generate_bandlimited(&band, &b, 2, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = GraphSignal::from((0..20).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<_>>());
        let (e, ep) = band_errors(&f, &target, &band, &b).unwrap();
        assert!((e * e + ep * ep - f.distance(&target).powi(2)).abs() < 1e-9);
    }

    fn plan() -> SamplingPlan {
        let g = random_sensor_graph(20, 4, 31).unwrap().1;
        let l = g.laplacian(LaplacianKind::Normalized).unwrap();
        let b = eigendecompose(&l).unwrap();
        let s = random_sample_set(20, 8, 1).unwrap();
        let omega = cutoff_bound(&l, &s).unwrap();
        SamplingPlan::for_graph(&g, &b, s, omega).unwrap()
    }

    #[test]
    fn diagnostics_vanish_on_constant_trajectory() {
        let plan = plan();
        let f = GraphSignal::from(vec![0.4; 20]);
        let mut h = EstimateHistory::new(&plan);
        for k in 0..=plan.tau_max() + 2 {
            h.push(k, &f).unwrap();
            let (d, e) = recursion_diagnostics(&f, &f, &h, &plan).unwrap();
            assert_eq!((d, e), (0.0, 0.0));
        }
    }

    #[test]
    fn zero_delays_give_zero_eta() {
        let plan = plan().with_delays(crate::graph::DelayMatrix::zeros(20)).unwrap();
        let mut h = EstimateHistory::new(&plan);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut prev = GraphSignal::zeros(20);
        for k in 0..6 {
            let f = GraphSignal::from((0..20).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<_>>());
            h.push(k, &f).unwrap();
            let (d, e) = recursion_diagnostics(&f, &prev, &h, &plan).unwrap();
            assert_eq!(e, 0.0);
            assert!((d - f.distance(&prev)).abs() < 1e-15);
            prev = f;
        }
    }

    #[test]
    fn history_window_and_prehistory() {
        let plan = plan();
        let mut h = EstimateHistory::new(&plan);
        assert!(h.get(0, 0).is_err());
        let f0 = GraphSignal::from(vec![2.0; 20]);
        h.push(0, &f0).unwrap();
        assert_eq!(h.get(-5, 0).unwrap(), 2.0);
        for k in 1..=plan.tau_max() + 1 {
            h.push(k, &GraphSignal::zeros(20)).unwrap();
        }
        assert!(h.get(0, 0).is_err());
        assert!(h.push(99, &f0).is_err());
    }

    #[test]
    fn geometric_trace_rate() {
        let totals: Vec<f64> = (0..600).map(|k| 0.9f64.powi(k)).collect();
        match convergence_rate(&ErrorTrace::from_totals(&totals), 50).unwrap() {
            ConvergenceRate::Converged { rate, .. } => assert!((rate - 0.9).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn steady_band_cases() {
        let noisy: Vec<f64> = (0..400).map(|k| 0.05 + 0.004 * ((k % 7) as f64 - 3.0)).collect();
        assert!((steady_band(&noisy, 100).unwrap() - 0.05).abs() < 0.002);
        let falling: Vec<f64> = (0..400).map(|k| 1.0 - k as f64 / 400.0).collect();
        assert_eq!(steady_band(&falling, 100), None);
        assert_eq!(steady_band(&noisy, 300), None);
        assert_eq!(steady_band(&[f64::NAN; 10], 2), None);
    }

    #[test]
    fn geometric_to_floor_rate() {
        // decays to a floor: steady state is the floor, m where it gets within 1.2x
        let totals: Vec<f64> = (0..2000).map(|k| 0.95f64.powi(k) + 0.01).collect();
        match convergence_rate(&ErrorTrace::from_totals(&totals), 100).unwrap() {
            ConvergenceRate::Converged { rate, steady_error, iterations } => {
                assert!((steady_error - 0.01).abs() < 1e-9);
                // brute force: first k with 0.95^k + 0.01 <= 0.012
                let m = (0..).find(|&k| 0.95f64.powi(k) + 0.01 <= 0.012).unwrap();
                assert_eq!(iterations, m as usize);
                assert!((rate - (totals[iterations] / totals[0]).powf(1.0 / m as f64)).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn constant_and_diverging_traces() {
        let flat = ErrorTrace::from_totals(&[2.0; 200]);
        match convergence_rate(&flat, 20).unwrap() {
            ConvergenceRate::Converged { rate, iterations, .. } => {
                assert_eq!(rate, 1.0);
                assert_eq!(iterations, 1);
            }
            other => panic!("{other:?}"),
        }
        let growing: Vec<f64> = (0..200).map(|k| 1.05f64.powi(k)).collect();
        assert_eq!(
            convergence_rate(&ErrorTrace::from_totals(&growing), 20).unwrap(),
            ConvergenceRate::NotConverged
        );
        let blown = vec![1.0, f64::INFINITY, f64::NAN, 1.0];
        assert_eq!(
            convergence_rate(&ErrorTrace::from_totals(&blown), 2).unwrap(),
            ConvergenceRate::NotConverged
        );
        assert!(convergence_rate(&flat, 150).is_err());
    }

    #[test]
    fn power_law_exponent() {
        let totals: Vec<f64> = (0..500).map(|k| (k.max(1) as f64).powf(-0.25)).collect();
        let slope = rate_exponent_fit(&ErrorTrace::from_totals(&totals), 10, 400).unwrap();
        assert!((slope + 0.25).abs() < 1e-6);

        let flat = ErrorTrace::from_totals(&[3.0; 100]);
        assert!(rate_exponent_fit(&flat, 1, 90).unwrap().abs() < 1e-12);

        let mut with_zero = vec![1.0; 100];
        with_zero[50] = 0.0;
        assert!(matches!(
            rate_exponent_fit(&ErrorTrace::from_totals(&with_zero), 1, 90),
            Err(Error::NonPositiveError(50))
        ));
        assert!(rate_exponent_fit(&flat, 0, 10).is_err());
        assert!(rate_exponent_fit(&flat, 10, 10).is_err());
        assert!(rate_exponent_fit(&flat, 10, 100).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let trace = ErrorTrace {
            rows: vec![TraceRow {
                k: 0,
                total_error: 1.5,
                relative_error: 0.1,
                in_band_error: 1e-300,
                out_band_error: 0.0,
                delta_k: 0.0,
                eta_k: 2.0 / 3.0,
                mu_k: 0.1,
                beta_k: f64::NAN,
            }],
        };
        let text = trace.to_csv();
        let back = ErrorTrace::parse_csv(&text, Path::new("t.csv")).unwrap();
        assert_eq!(back.rows[0].eta_k, 2.0 / 3.0);
        assert_eq!(back.rows[0].in_band_error, 1e-300);
        assert!(back.rows[0].beta_k.is_nan());
        assert_eq!(back.to_csv(), text);
        assert!(ErrorTrace::parse_csv("k,x\n", Path::new("t.csv")).is_err());
    }
}

//! Declarative experiments: config files, the run/sweep/real-data drivers and
//! their on-disk artifacts.
//!
//! A config is a flat TOML table. Every key is optional; see
//! [`ExperimentConfig`] for defaults. `mu`, `beta` and `delta` accept a scalar
//! or a list, and `run` expands lists into one job per combination and data
//! seed.
//!
//! ```toml
//! name = "tracking"
//! seed = 1
//! n = 100
//! k_nn = 4
//! sample_size = 20
//! schedule = "constant"
//! mu = 0.1
//! beta = 0.001
//! delta = 0.005
//! steps = 5000
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{knn_geometric_graph, random_sensor_graph, DelayMatrix, Graph, LaplacianKind};
use crate::metrics::{convergence_rate, rate_exponent_fit, steady_band, ConvergenceRate, ErrorTrace};
use crate::reconstruction::Schedule;
use crate::sampling::{cutoff_bound, random_sample_set, PlanSummary, SamplingPlan};
use crate::signals::{
    generate_bandlimited, generate_out_of_band, load_intel_lab, read_mote_locations, LoadReport,
    TimeVaryingSignal, TimeWindow,
};
use crate::simulator::{simulate, simulate_closed_form, Mode, SimOptions, SimulationOutput};
use crate::spectral::{eigendecompose, GraphSignal, SpectralBasis};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x.clone()],
            OneOrMany::Many(xs) => xs.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OmegaPolicy {
    /// Largest cutoff certified by the singular-value bound on `(𝓛²)_{Sᶜ}`.
    #[default]
    SingularValueBound,
    Explicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    #[default]
    Constant,
    Diminishing,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    /// Graph, sample-set and default data seed.
    pub seed: u64,

    pub n: usize,
    pub k_nn: usize,
    /// Read the graph from an edge list instead of drawing random points.
    pub edge_list: Option<PathBuf>,
    /// Build the k-NN graph on `x y` coordinates from this file.
    pub coordinates: Option<PathBuf>,
    pub laplacian: LaplacianKind,

    pub sample_size: usize,
    pub sample_set: Option<Vec<usize>>,
    pub omega_policy: OmegaPolicy,
    pub omega: Option<f64>,
    /// Sample sets drawn before giving up on a non-unique plan.
    pub plan_attempts: usize,

    pub schedule: ScheduleKind,
    pub mu: OneOrMany<f64>,
    pub beta: OneOrMany<f64>,

    pub delta: OneOrMany<f64>,
    pub signal_norm: f64,
    /// Fraction of the initial estimate's energy placed out of band; zero
    /// starts from the zero signal.
    pub initial_out_of_band: f64,
    /// Seeds for signal generation; empty means `[seed]`.
    pub data_seeds: Vec<u64>,

    pub steps: Option<usize>,
    pub mode: Option<Mode>,
    /// Every node sees every sensor error immediately (closed form only).
    pub zero_delays: bool,
    pub steady_window: Option<usize>,
    pub track_nodes: Vec<usize>,
    pub output: Option<PathBuf>,

    /// Sweep: steady relative error below which a run counts as converged.
    pub converge_threshold: f64,

    pub intel_data: Option<PathBuf>,
    pub intel_locations: Option<PathBuf>,
    pub window_start: String,
    pub window_end: String,
    pub resample_seconds: u32,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "run".into(),
            seed: 1,
            n: 100,
            k_nn: 4,
            edge_list: None,
            coordinates: None,
            laplacian: LaplacianKind::Normalized,
            sample_size: 20,
            sample_set: None,
            omega_policy: OmegaPolicy::SingularValueBound,
            omega: None,
            plan_attempts: 20,
            schedule: ScheduleKind::Constant,
            mu: OneOrMany::One(0.1),
            beta: OneOrMany::One(1e-3),
            delta: OneOrMany::One(0.0),
            signal_norm: 10.0,
            initial_out_of_band: 0.0,
            data_seeds: Vec::new(),
            steps: None,
            mode: None,
            zero_delays: false,
            steady_window: None,
            track_nodes: Vec::new(),
            output: None,
            converge_threshold: 0.1,
            intel_data: None,
            intel_locations: None,
            window_start: "2004-02-28 01:06:15".into(),
            window_end: "2004-02-28 17:56:15".into(),
            resample_seconds: 30,
        }
    }
}

const DEFAULT_STEPS: usize = 1000;

impl ExperimentConfig {
    /// Parses a TOML config; relative paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: Self =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [
            &mut cfg.edge_list,
            &mut cfg.coordinates,
            &mut cfg.intel_data,
            &mut cfg.intel_locations,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn steps(&self) -> usize {
        self.steps.unwrap_or(DEFAULT_STEPS)
    }

    pub fn steady_window(&self, steps: usize) -> usize {
        self.steady_window.unwrap_or((steps / 10).max(1))
    }

    pub fn data_seeds(&self) -> Vec<u64> {
        if self.data_seeds.is_empty() {
            vec![self.seed]
        } else {
            self.data_seeds.clone()
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output
            .clone()
            .unwrap_or_else(|| PathBuf::from("out").join(&self.name))
    }

    pub fn mode(&self) -> Result<Mode> {
        match (self.mode, self.zero_delays) {
            (Some(Mode::MessagePassing), true) => Err(Error::Config(
                "zero_delays has no network to pass messages over; use mode = \"closed_form\"".into(),
            )),
            (Some(m), _) => Ok(m),
            (None, true) => Ok(Mode::ClosedForm),
            (None, false) => Ok(Mode::MessagePassing),
        }
    }

    pub fn make_schedule(&self, mu: f64, beta: f64) -> Result<Schedule> {
        match self.schedule {
            ScheduleKind::Constant => Schedule::constant(mu, beta),
            ScheduleKind::Diminishing => Schedule::diminishing(mu, beta),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.edge_list.is_some() && self.coordinates.is_some() {
            return bad("set at most one of edge_list and coordinates".into());
        }
        for p in [&self.edge_list, &self.coordinates, &self.intel_data, &self.intel_locations]
            .into_iter()
            .flatten()
        {
            if !p.exists() {
                return bad(format!("{} does not exist", p.display()));
            }
        }
        if self.edge_list.is_none() && self.coordinates.is_none() && self.n < 2 {
            return bad(format!("n = {} is too small", self.n));
        }
        if self.k_nn == 0 {
            return bad("k_nn must be positive".into());
        }
        if self.sample_set.is_none() && self.sample_size == 0 {
            return bad("sample_size must be positive".into());
        }
        match (self.omega_policy, self.omega) {
            (OmegaPolicy::Explicit, None) => return bad("omega_policy = \"explicit\" needs omega".into()),
            (OmegaPolicy::Explicit, Some(w)) if !(w >= 0.0 && w.is_finite()) => {
                return bad(format!("omega = {w} must be finite and nonnegative"))
            }
            (OmegaPolicy::SingularValueBound, _) if self.laplacian != LaplacianKind::Normalized => {
                return bad("the singular-value cutoff is defined for the normalized Laplacian".into())
            }
            _ => {}
        }
        if self.plan_attempts == 0 {
            return bad("plan_attempts must be positive".into());
        }
        let (mus, betas, deltas) = (self.mu.to_vec(), self.beta.to_vec(), self.delta.to_vec());
        if mus.is_empty() || betas.is_empty() || deltas.is_empty() {
            return bad("mu, beta and delta need at least one value".into());
        }
        if mus.iter().chain(&betas).any(|x| !(x.is_finite() && *x >= 0.0)) {
            return bad("mu and beta must be finite and nonnegative".into());
        }
        if deltas.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return bad("delta must be finite and nonnegative".into());
        }
        if !(self.signal_norm > 0.0 && self.signal_norm.is_finite()) {
            return bad("signal_norm must be positive".into());
        }
        if !(0.0..1.0).contains(&self.initial_out_of_band) {
            return bad("initial_out_of_band must lie in [0, 1)".into());
        }
        if self.steps == Some(0) {
            return bad("steps must be at least 1".into());
        }
        if self.steady_window == Some(0) {
            return bad("steady_window must be positive".into());
        }
        if self.resample_seconds == 0 {
            return bad("resample_seconds must be positive".into());
        }
        self.mode()?;
        Ok(())
    }
}

/// Deterministic seed for an independent random stream.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.next_u64()
}

/// Graph, spectrum and sampling plan shared by every job of an experiment.
#[derive(Debug, Clone)]
pub struct Setup {
    pub points: Option<Vec<[f64; 2]>>,
    pub graph: Graph,
    pub laplacian: nalgebra::DMatrix<f64>,
    pub basis: SpectralBasis,
    pub plan: SamplingPlan,
}

/// Reads `x y` lines.
pub fn read_coordinates(path: &Path) -> Result<Vec<[f64; 2]>> {
    let text = std::fs::read_to_string(path)?;
    let mut points = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let xy: Vec<f64> = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: idx + 1,
                msg: format!("{e}"),
            })?;
        let [x, y] = xy[..] else {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: idx + 1,
                msg: "expected `x y`".into(),
            });
        };
        points.push([x, y]);
    }
    Ok(points)
}

pub fn build_graph(cfg: &ExperimentConfig) -> Result<(Option<Vec<[f64; 2]>>, Graph)> {
    if let Some(path) = &cfg.edge_list {
        return Ok((None, Graph::read_edge_list(path)?));
    }
    if let Some(path) = &cfg.coordinates {
        let points = read_coordinates(path)?;
        let graph = knn_geometric_graph(&points, cfg.k_nn)?;
        return Ok((Some(points), graph));
    }
    let (points, graph) = random_sensor_graph(cfg.n, cfg.k_nn, cfg.seed)?;
    Ok((Some(points), graph))
}

/// Builds a uniqueness plan, redrawing random sample sets that fail.
pub fn build_plan(
    cfg: &ExperimentConfig,
    graph: &Graph,
    laplacian: &nalgebra::DMatrix<f64>,
    basis: &SpectralBasis,
) -> Result<SamplingPlan> {
    let n = graph.n();
    let attempts = if cfg.sample_set.is_some() { 1 } else { cfg.plan_attempts };
    let mut last_err = None;
    for attempt in 0..attempts {
        let sample_set = match &cfg.sample_set {
            Some(s) => s.clone(),
            None => {
                let seed = if attempt == 0 { cfg.seed } else { derive_seed(cfg.seed, attempt as u64) };
                random_sample_set(n, cfg.sample_size, seed)?
            }
        };
        let omega = match cfg.omega_policy {
            OmegaPolicy::SingularValueBound => cutoff_bound(laplacian, &sample_set)?,
            OmegaPolicy::Explicit => {
                let omega = cfg.omega.expect("validated");
                if cfg.laplacian == LaplacianKind::Normalized {
                    let bound = cutoff_bound(laplacian, &sample_set)?;
                    if omega > bound {
                        info!("omega = {omega} exceeds the certified bound {bound:.6}; relying on A > 0");
                    }
                }
                omega
            }
        };
        match SamplingPlan::for_graph(graph, basis, sample_set, omega) {
            Ok(plan) => {
                if attempt > 0 {
                    info!("unique sampling plan found on draw {}", attempt + 1);
                }
                return Ok(plan);
            }
            Err(e @ (Error::NotUnique(_) | Error::EmptyBand(_))) => {
                warn!("sampling plan draw {} rejected: {e}", attempt + 1);
                last_err = Some(e);
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err.expect("at least one attempt"))
}

pub fn build_setup(cfg: &ExperimentConfig) -> Result<Setup> {
    let (points, graph) = build_graph(cfg)?;
    setup_on_graph(cfg, points, graph)
}

fn setup_on_graph(cfg: &ExperimentConfig, points: Option<Vec<[f64; 2]>>, graph: Graph) -> Result<Setup> {
    graph.hop_distances()?;
    let laplacian = graph.laplacian(cfg.laplacian)?;
    let basis = eigendecompose(&laplacian)?;
    let plan = build_plan(cfg, &graph, &laplacian, &basis)?;
    Ok(Setup {
        points,
        graph,
        laplacian,
        basis,
        plan,
    })
}

/// One simulation of a run or sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Job {
    pub mu: f64,
    pub beta: f64,
    pub delta: f64,
    pub data_seed: u64,
}

impl Job {
    pub fn label(&self) -> String {
        format!(
            "mu{}_beta{}_delta{}_seed{}",
            self.mu, self.beta, self.delta, self.data_seed
        )
    }
}

/// Truth sequence and initial estimate for a synthetic job.
pub fn synthetic_inputs(
    cfg: &ExperimentConfig,
    setup: &Setup,
    job: &Job,
    steps: usize,
) -> Result<(TimeVaryingSignal, GraphSignal)> {
    let band = setup.plan.band();
    let f0 = generate_bandlimited(band, &setup.basis, job.data_seed, cfg.signal_norm)?;
    let initial = if cfg.initial_out_of_band > 0.0 {
        let frac = cfg.initial_out_of_band;
        let norm = cfg.signal_norm * (frac / (1.0 - frac)).sqrt();
        let h = generate_out_of_band(band, &setup.basis, derive_seed(job.data_seed, 2), norm)?;
        GraphSignal::from_vector(f0.as_vector() + h.as_vector())
    } else {
        GraphSignal::zeros(f0.len())
    };
    let truth = TimeVaryingSignal::synthetic(
        f0,
        band,
        &setup.basis,
        job.delta,
        steps,
        derive_seed(job.data_seed, 1),
    )?;
    Ok((truth, initial))
}

/// Executes one job in the configured mode.
pub fn execute(
    cfg: &ExperimentConfig,
    setup: &Setup,
    schedule: &Schedule,
    truth: &TimeVaryingSignal,
    initial: GraphSignal,
    steps: usize,
) -> Result<SimulationOutput> {
    if cfg.zero_delays {
        let plan = setup.plan.with_delays(DelayMatrix::zeros(setup.graph.n()))?;
        return simulate_closed_form(&plan, schedule, truth, steps, Some(initial), false);
    }
    let options = SimOptions {
        mode: cfg.mode()?,
        initial: Some(initial),
        record_trajectory: false,
        track_nodes: cfg.track_nodes.clone(),
    };
    simulate(&setup.graph, &setup.plan, schedule, truth, steps, &options)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub label: String,
    pub mu: f64,
    pub beta: f64,
    pub delta: f64,
    pub data_seed: u64,
    pub schedule: Schedule,
    pub steps: usize,
    pub final_total_error: f64,
    pub final_relative_error: f64,
    /// Mean total error over the last window when the relative rule settles.
    pub steady_error: Option<f64>,
    /// Mean relative error over the last window when the absolute band rule settles.
    pub steady_relative_error: Option<f64>,
    pub convergence_rate: Option<f64>,
    pub convergence_iterations: Option<usize>,
    pub rate_exponent: Option<f64>,
    pub peak_messages_per_node: usize,
    pub diverged: bool,
}

/// A trace is flagged as diverged when it stops being finite or grows far
/// beyond both its start and the signal it tracks.
pub fn is_diverged(trace: &ErrorTrace, signal_norm: f64) -> bool {
    let Some(first) = trace.rows.first() else {
        return false;
    };
    let limit = 1e6 * first.total_error.max(signal_norm).max(1.0);
    trace
        .rows
        .iter()
        .any(|r| !r.total_error.is_finite() || r.total_error > limit)
}

pub fn summarize(job: &Job, schedule: &Schedule, out: &SimulationOutput, window: usize, signal_norm: f64) -> RunSummary {
    let trace = &out.trace;
    let last = trace.rows.last().expect("trace has rows");
    let steps = last.k;
    let (convergence_rate, convergence_iterations, steady_error) =
        match convergence_rate(trace, window) {
            Ok(ConvergenceRate::Converged {
                rate,
                steady_error,
                iterations,
            }) => (Some(rate), Some(iterations), Some(steady_error)),
            _ => (None, None, None),
        };
    let k_min = (steps / 100).clamp(1, 100);
    let rate_exponent = (steps >= 2 * k_min + 2)
        .then(|| rate_exponent_fit(trace, k_min, steps).ok())
        .flatten();
    RunSummary {
        label: job.label(),
        mu: job.mu,
        beta: job.beta,
        delta: job.delta,
        data_seed: job.data_seed,
        schedule: *schedule,
        steps,
        final_total_error: last.total_error,
        final_relative_error: last.relative_error,
        steady_error,
        steady_relative_error: steady_band(&trace.relatives(), window),
        convergence_rate,
        convergence_iterations,
        rate_exponent,
        peak_messages_per_node: out.peak_messages_per_node,
        diverged: is_diverged(trace, signal_norm),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub plan: PlanSummary,
    pub mode: Mode,
    pub runs: Vec<RunSummary>,
}

#[derive(Serialize)]
struct Metadata<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    seed: u64,
    mode: Mode,
    zero_delays: bool,
    vertices: usize,
    edges: usize,
    plan: &'a PlanSummary,
    config: &'a ExperimentConfig,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn write_metadata(dir: &Path, command: &str, cfg: &ExperimentConfig, setup: &Setup, plan: &PlanSummary) -> Result<()> {
    let meta = Metadata {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command,
        seed: cfg.seed,
        mode: cfg.mode()?,
        zero_delays: cfg.zero_delays,
        vertices: setup.graph.n(),
        edges: setup.graph.edges().len(),
        plan,
        config: cfg,
    };
    write_json(&dir.join("metadata.json"), &meta)
}

fn write_tracked(path: &Path, out: &SimulationOutput) -> Result<()> {
    let mut csv = String::from("k,v,estimate,truth\n");
    for s in &out.tracked {
        let _ = writeln!(csv, "{},{},{},{}", s.k, s.v, s.estimate, s.truth);
    }
    std::fs::write(path, csv)?;
    Ok(())
}

/// Expands `mu × beta × delta × data_seeds` in config order.
pub fn jobs(cfg: &ExperimentConfig) -> Vec<Job> {
    let mut jobs = Vec::new();
    for &mu in &cfg.mu.to_vec() {
        for &beta in &cfg.beta.to_vec() {
            for &delta in &cfg.delta.to_vec() {
                for data_seed in cfg.data_seeds() {
                    jobs.push(Job {
                        mu,
                        beta,
                        delta,
                        data_seed,
                    });
                }
            }
        }
    }
    jobs
}

/// Runs every job of a synthetic experiment and writes `plan.json`,
/// `metadata.json`, `summary.json` and one `trace_<label>.csv` per job.
///
/// Artifacts are written before a divergence is reported as an error.
pub fn run(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let setup = build_setup(cfg)?;
    let steps = cfg.steps();
    let window = cfg.steady_window(steps);
    let dir = cfg.output_dir();
    std::fs::create_dir_all(&dir)?;
    let plan = setup.plan.summary();
    plan.write_json(&dir.join("plan.json"))?;
    write_metadata(&dir, "run", cfg, &setup, &plan)?;

    let runs = jobs(cfg)
        .par_iter()
        .map(|job| -> Result<RunSummary> {
            let schedule = cfg.make_schedule(job.mu, job.beta)?;
            let (truth, initial) = synthetic_inputs(cfg, &setup, job, steps)?;
            let out = execute(cfg, &setup, &schedule, &truth, initial, steps)?;
            out.trace.write_csv(&dir.join(format!("trace_{}.csv", job.label())))?;
            if !out.tracked.is_empty() {
                write_tracked(&dir.join(format!("tracked_{}.csv", job.label())), &out)?;
            }
            Ok(summarize(job, &schedule, &out, window, cfg.signal_norm))
        })
        .collect::<Result<Vec<_>>>()?;

    let report = RunReport {
        plan,
        mode: cfg.mode()?,
        runs,
    };
    write_json(&dir.join("summary.json"), &report)?;
    if let Some(r) = report.runs.iter().find(|r| r.diverged) {
        return Err(Error::Diverged(format!("job {}", r.label)));
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    pub mu: f64,
    pub beta: f64,
    pub delta: f64,
    /// False when `μβ ≥ 1` or the schedule is otherwise inadmissible.
    pub valid: bool,
    pub runs: usize,
    pub converged: usize,
}

impl SweepCell {
    pub fn probability(&self) -> Option<f64> {
        (self.valid && self.runs > 0).then(|| self.converged as f64 / self.runs as f64)
    }
}

/// A run converges when its trace stays finite and bounded, its relative error
/// settles into the steady band, and the settled value is below `threshold`.
pub fn is_converged(trace: &ErrorTrace, window: usize, threshold: f64, signal_norm: f64) -> bool {
    !is_diverged(trace, signal_norm)
        && steady_band(&trace.relatives(), window).is_some_and(|r| r < threshold)
}

/// Convergence-probability table over `mu × beta × delta`, written to
/// `sweep.csv` with one row per cell.
pub fn sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepCell>> {
    cfg.validate()?;
    let setup = build_setup(cfg)?;
    let steps = cfg.steps();
    let window = cfg.steady_window(steps);
    let dir = cfg.output_dir();
    std::fs::create_dir_all(&dir)?;
    let plan = setup.plan.summary();
    plan.write_json(&dir.join("plan.json"))?;
    write_metadata(&dir, "sweep", cfg, &setup, &plan)?;

    let all = jobs(cfg);
    let outcomes = all
        .par_iter()
        .map(|job| -> Result<Option<bool>> {
            let Ok(schedule) = cfg.make_schedule(job.mu, job.beta) else {
                return Ok(None);
            };
            let (truth, initial) = synthetic_inputs(cfg, &setup, job, steps)?;
            let out = execute(cfg, &setup, &schedule, &truth, initial, steps)?;
            Ok(Some(is_converged(&out.trace, window, cfg.converge_threshold, cfg.signal_norm)))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut cells: Vec<SweepCell> = Vec::new();
    let mut index: BTreeMap<(u64, u64, u64), usize> = BTreeMap::new();
    for (job, outcome) in all.iter().zip(outcomes) {
        let key = (job.mu.to_bits(), job.beta.to_bits(), job.delta.to_bits());
        let i = *index.entry(key).or_insert_with(|| {
            cells.push(SweepCell {
                mu: job.mu,
                beta: job.beta,
                delta: job.delta,
                valid: true,
                runs: 0,
                converged: 0,
            });
            cells.len() - 1
        });
        match outcome {
            None => cells[i].valid = false,
            Some(ok) => {
                cells[i].runs += 1;
                cells[i].converged += usize::from(ok);
            }
        }
    }

    let mut csv = String::from("mu,beta,delta,valid,runs,converged,probability\n");
    for c in &cells {
        let p = c.probability().map(|p| p.to_string()).unwrap_or_default();
        let _ = writeln!(csv, "{},{},{},{},{},{},{}", c.mu, c.beta, c.delta, c.valid, c.runs, c.converged, p);
    }
    std::fs::write(dir.join("sweep.csv"), csv)?;
    Ok(cells)
}

#[derive(Debug, Clone, Serialize)]
pub struct RealDataReport {
    pub motes: Vec<u32>,
    pub frames: usize,
    pub load: LoadReport,
    pub plan: PlanSummary,
    pub run: RunSummary,
}

/// Reconstructs the Intel lab temperature field from a random subset of
/// motes. Uses the first `mu` and `beta` values; `steps` defaults to every
/// resampled frame.
pub fn real_data(cfg: &ExperimentConfig) -> Result<RealDataReport> {
    cfg.validate()?;
    let (Some(data), Some(locations)) = (&cfg.intel_data, &cfg.intel_locations) else {
        return Err(Error::Config("real-data needs intel_data and intel_locations".into()));
    };
    let window = TimeWindow::parse(&cfg.window_start, &cfg.window_end)?;
    let locs = read_mote_locations(locations)?;
    let lab = load_intel_lab(data, &locs, &window, cfg.resample_seconds)?;
    info!(
        "loaded {} motes x {} frames ({} rows in range)",
        lab.motes.len(),
        lab.signal.len(),
        lab.report.rows_in_range
    );
    let graph = knn_geometric_graph(&lab.points, cfg.k_nn)?;
    let setup = setup_on_graph(cfg, Some(lab.points.clone()), graph)?;

    let available = lab.signal.len() - 1;
    let steps = cfg.steps.map_or(available, |s| s.min(available));
    if steps == 0 {
        return Err(Error::Config("time window holds a single frame".into()));
    }
    let job = Job {
        mu: cfg.mu.to_vec()[0],
        beta: cfg.beta.to_vec()[0],
        delta: lab.signal.delta(),
        data_seed: cfg.seed,
    };
    let schedule = cfg.make_schedule(job.mu, job.beta)?;
    let initial = GraphSignal::zeros(lab.motes.len());
    let out = execute(cfg, &setup, &schedule, &lab.signal, initial, steps)?;

    let dir = cfg.output_dir();
    std::fs::create_dir_all(&dir)?;
    let plan = setup.plan.summary();
    plan.write_json(&dir.join("plan.json"))?;
    write_metadata(&dir, "real-data", cfg, &setup, &plan)?;
    out.trace.write_csv(&dir.join("trace.csv"))?;
    lab.signal.write_csv(&dir.join("truth.csv"))?;
    if !out.tracked.is_empty() {
        write_tracked(&dir.join("tracked.csv"), &out)?;
    }
    let norm = lab.signal.frames()[0].norm();
    let report = RealDataReport {
        motes: lab.motes,
        frames: lab.signal.len(),
        load: lab.report.clone(),
        plan,
        run: summarize(&job, &schedule, &out, cfg.steady_window(steps), norm),
    };
    write_json(&dir.join("summary.json"), &report)?;
    if report.run.diverged {
        return Err(Error::Diverged("real-data run".into()));
    }
    Ok(report)
}

/// Writes `graph.edges`, `spectrum.csv` and, for geometric graphs,
/// `points.csv`.
pub fn gen_graph(cfg: &ExperimentConfig) -> Result<Graph> {
    cfg.validate()?;
    let (points, graph) = build_graph(cfg)?;
    let basis = eigendecompose(&graph.laplacian(cfg.laplacian)?)?;
    let dir = cfg.output_dir();
    std::fs::create_dir_all(&dir)?;
    graph.write_edge_list(&dir.join("graph.edges"))?;
    basis.write_csv(&dir.join("spectrum.csv"))?;
    if let Some(points) = points {
        let mut csv = String::from("v,x,y\n");
        for (v, [x, y]) in points.iter().enumerate() {
            let _ = writeln!(csv, "{v},{x},{y}");
        }
        std::fs::write(dir.join("points.csv"), csv)?;
    }
    Ok(graph)
}

/// Builds and certifies the sampling plan; writes `plan.json`.
pub fn plan(cfg: &ExperimentConfig) -> Result<PlanSummary> {
    cfg.validate()?;
    let setup = build_setup(cfg)?;
    let dir = cfg.output_dir();
    std::fs::create_dir_all(&dir)?;
    let summary = setup.plan.summary();
    summary.write_json(&dir.join("plan.json"))?;
    Ok(summary)
}

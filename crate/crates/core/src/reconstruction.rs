//! Centralized reference iterations and the step machinery shared with the
//! simulator: ILSR, the delayed vector-form DLSR step, step-size schedules and
//! the biased fixed point `f̃* = (βI + T)^{-1} T f*`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::SamplingPlan;
use crate::spectral::GraphSignal;

/// Step size `μ_k` and decay factor `β_k`, indexed from `k = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Schedule {
    Constant { mu: f64, beta: f64 },
    /// `μ_k = μ₁/√k`, `β_k = β₁/k^{1/4}`.
    Diminishing { mu1: f64, beta1: f64 },
}

impl Schedule {
    pub fn constant(mu: f64, beta: f64) -> Result<Self> {
        let s = Schedule::Constant { mu, beta };
        s.validate()?;
        Ok(s)
    }

    pub fn diminishing(mu1: f64, beta1: f64) -> Result<Self> {
        let s = Schedule::Diminishing { mu1, beta1 };
        s.validate()?;
        Ok(s)
    }

    /// `μ ≥ 0`, `β ≥ 0`, and `μ_k β_k < 1` for every `k` (the product is
    /// largest at `k = 1` for the diminishing kind).
    pub fn validate(&self) -> Result<()> {
        let (mu, beta) = match *self {
            Schedule::Constant { mu, beta } => (mu, beta),
            Schedule::Diminishing { mu1, beta1 } => (mu1, beta1),
        };
        if !(mu.is_finite() && mu >= 0.0) {
            return Err(Error::InvalidSchedule(format!("step size {mu} must be a nonnegative number")));
        }
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::InvalidSchedule(format!("decay factor {beta} must be a nonnegative number")));
        }
        if mu * beta >= 1.0 {
            return Err(Error::InvalidSchedule(format!(
                "mu * beta = {} must be below 1",
                mu * beta
            )));
        }
        Ok(())
    }

    /// `μ_k`; `k = 0` is treated as `k = 1`.
    pub fn mu(&self, k: usize) -> f64 {
        match *self {
            Schedule::Constant { mu, .. } => mu,
            Schedule::Diminishing { mu1, .. } => mu1 / (k.max(1) as f64).sqrt(),
        }
    }

    /// `β_k`; `k = 0` is treated as `k = 1`.
    pub fn beta(&self, k: usize) -> f64 {
        match *self {
            Schedule::Constant { beta, .. } => beta,
            Schedule::Diminishing { beta1, .. } => beta1 / (k.max(1) as f64).powf(0.25),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Schedule::Constant { .. })
    }
}

/// Per-sensor errors `ε^{(j)}(u)` for the most recent `depth` iterations.
#[derive(Debug, Clone)]
pub struct ErrorHistory {
    depth: usize,
    sensors: usize,
    values: Vec<f64>,
    newest: Option<usize>,
}

impl ErrorHistory {
    pub fn new(depth: usize, sensors: usize) -> Self {
        assert!(depth > 0, "history depth must be positive");
        Self {
            depth,
            sensors,
            values: vec![0.0; depth * sensors],
            newest: None,
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn newest(&self) -> Option<usize> {
        self.newest
    }

    /// Appends iteration `k`; iterations must arrive in order.
    pub fn push(&mut self, k: usize, errors: &[f64]) -> Result<()> {
        let expected = self.newest.map_or(0, |j| j + 1);
        if k != expected {
            return Err(Error::InvalidArgument(format!(
                "error history expects iteration {expected}, got {k}"
            )));
        }
        if errors.len() != self.sensors {
            return Err(Error::DimensionMismatch {
                expected: self.sensors,
                found: errors.len(),
            });
        }
        let slot = k % self.depth;
        self.values[slot * self.sensors..(slot + 1) * self.sensors].copy_from_slice(errors);
        self.newest = Some(k);
        Ok(())
    }

    /// `ε^{(j)}` of the sensor at position `idx` of `S`; zero for `j < 0`.
    pub fn get(&self, j: i64, idx: usize) -> Result<f64> {
        if j < 0 {
            return Ok(0.0);
        }
        let j_u = j as usize;
        match self.newest {
            Some(newest) if j_u <= newest && j_u + self.depth > newest => {
                Ok(self.values[(j_u % self.depth) * self.sensors + idx])
            }
            _ => Err(Error::MissingHistory {
                sensor: idx,
                iteration: j,
            }),
        }
    }
}

/// Estimate `f^{(k)}` plus the sensor errors needed to take the next delayed step.
#[derive(Debug, Clone)]
pub struct ReconState {
    f: GraphSignal,
    k: usize,
    errors: ErrorHistory,
}

impl ReconState {
    /// Starts at `k = 0` from `initial`, with history depth `tau_max + 1`.
    pub fn new(plan: &SamplingPlan, initial: GraphSignal) -> Result<Self> {
        initial.check_len(plan.n())?;
        Ok(Self {
            f: initial,
            k: 0,
            errors: ErrorHistory::new(plan.tau_max() + 1, plan.sample_set().len()),
        })
    }

    pub fn estimate(&self) -> &GraphSignal {
        &self.f
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn errors(&self) -> &ErrorHistory {
        &self.errors
    }

    /// Records `ε^{(k)}(u) = f*^{(k)}(u) − f^{(k)}(u)` for every sensor.
    pub fn observe(&mut self, truth: &GraphSignal, plan: &SamplingPlan) -> Result<()> {
        truth.check_len(plan.n())?;
        let errs: Vec<f64> = plan.sample_set().iter().map(|&u| truth[u] - self.f[u]).collect();
        self.errors.push(self.k, &errs)
    }

    /// Observes `truth` and replaces the estimate with the next delayed step.
    pub fn advance(
        &mut self,
        truth: &GraphSignal,
        plan: &SamplingPlan,
        schedule: &Schedule,
    ) -> Result<()> {
        self.observe(truth, plan)?;
        self.f = dlsr_closed_form_step(self, plan, schedule)?;
        self.k += 1;
        Ok(())
    }
}

/// One centralized ILSR step: `f + P_ω(Σ_{u∈S} (f*(u) − f(u)) δ_u)`.
pub fn ilsr_step(f: &GraphSignal, truth: &GraphSignal, plan: &SamplingPlan) -> Result<GraphSignal> {
    f.check_len(plan.n())?;
    truth.check_len(plan.n())?;
    let mut residual = DVector::zeros(plan.n());
    for &u in plan.sample_set() {
        residual[u] = truth[u] - f[u];
    }
    let correction = plan.project_low(&GraphSignal::from_vector(residual));
    Ok(GraphSignal::from_vector(f.as_vector() + correction.as_vector()))
}

/// The delayed vector-form step from `f^{(k)}` to `f^{(k+1)}`:
///
/// `f^{(k+1)}(v) = (1 − μ_{k+1}β_{k+1}) f^{(k)}(v) + μ_{k+1} Σ_{u∈S} ε^{(k−τ(u,v))}(u) (P_ω δ_u)(v)`
///
/// Errors with a negative iteration index contribute zero. The state must
/// already hold `ε^{(k)}` (see [`ReconState::observe`]).
pub fn dlsr_closed_form_step(
    state: &ReconState,
    plan: &SamplingPlan,
    schedule: &Schedule,
) -> Result<GraphSignal> {
    let k = state.k;
    if state.errors.newest() != Some(k) {
        return Err(Error::MissingHistory {
            sensor: 0,
            iteration: k as i64,
        });
    }
    let mu = schedule.mu(k + 1);
    let shrink = 1.0 - mu * schedule.beta(k + 1);
    let frame = plan.frame();
    let delays = plan.delays();
    let sensors = plan.sample_set();
    let mut next = DVector::zeros(plan.n());
    for v in 0..plan.n() {
        let mut acc = 0.0;
        for (j, &u) in sensors.iter().enumerate() {
            let lag = k as i64 - delays.get(u, v) as i64;
            acc += state.errors.get(lag, j)? * frame.get(v, j);
        }
        next[v] = shrink * state.f[v] + mu * acc;
    }
    Ok(GraphSignal::from_vector(next))
}

/// `f̃* = (βI + T)^{-1} T f*`, solved on the band in spectral coefficients:
/// `(β I_m + U_ω^T I_S U_ω) x̃ = U_ω^T I_S f*`.
///
/// For in-band `f*` the right-hand side equals `U_ω^T I_S U_ω x`.
pub fn biased_target(f_star: &GraphSignal, plan: &SamplingPlan, beta: f64) -> Result<GraphSignal> {
    f_star.check_len(plan.n())?;
    if beta < 0.0 {
        return Err(Error::InvalidArgument(format!("decay factor {beta} is negative")));
    }
    let (lower, _) = plan.frame_bounds();
    if beta + lower <= 0.0 {
        return Err(Error::Singular);
    }
    let u = plan.band_vectors();
    let m = u.ncols();
    let mut system = crate::spectral::sampled_gram(plan.sample_set(), u);
    let mut rhs = DVector::zeros(m);
    for &s in plan.sample_set() {
        rhs.axpy(f_star[s], &u.row(s).transpose(), 1.0);
    }
    for i in 0..m {
        system[(i, i)] += beta;
    }
    let coeffs = system.cholesky().ok_or(Error::Singular)?.solve(&rhs);
    Ok(GraphSignal::from_vector(u * coeffs))
}

//! Discrete-time distributed execution of DLSR.
//!
//! Each round `k` runs four phases behind barriers:
//!
//! 1. every representative node `u ∈ S` reads `f*^{(k)}(u)` and stores its
//!    fresh error `ε^{(k)}(u)` in its own table;
//! 2. every node merges the messages that arrived this round (sent in round
//!    `k − 1`), keeping the highest iteration per sensor;
//! 3. every node sends its whole table of freshest errors to each neighbor;
//!    a message spends one round on the link;
//! 4. every node updates its estimate from its table, treating sensors it has
//!    not heard from yet as contributing zero.
//!
//! With one round per hop, node `v` holds `ε^{(k−τ(u,v))}(u)` after round `k`
//! whenever `k ≥ τ(u,v)`, which is exactly the delayed vector-form step. The
//! [`Mode::ClosedForm`] path computes that step directly and serves as the
//! oracle for the message-passing path.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::metrics::{ErrorTrace, TraceRecorder};
use crate::reconstruction::{ReconState, Schedule};
use crate::sampling::SamplingPlan;
use crate::signals::TimeVaryingSignal;
use crate::spectral::GraphSignal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    MessagePassing,
    ClosedForm,
}

/// One sensor error in flight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorMessage {
    /// Position of the sensor in the plan's sample set.
    pub sensor: usize,
    pub iteration: usize,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct NodeState {
    pub id: usize,
    /// Position in the sample set when this node carries a sensor.
    pub sensor_slot: Option<usize>,
    pub estimate: f64,
    /// Freshest `(iteration, ε)` known per sensor slot.
    pub latest_errors: Vec<Option<(usize, f64)>>,
    pub inbox: Vec<ErrorMessage>,
}

impl NodeState {
    pub fn is_representative(&self) -> bool {
        self.sensor_slot.is_some()
    }

    fn merge(&mut self, msg: ErrorMessage) {
        let slot = &mut self.latest_errors[msg.sensor];
        match slot {
            Some((j, _)) if *j >= msg.iteration => {}
            _ => *slot = Some((msg.iteration, msg.value)),
        }
    }
}

/// The simulated sensor network: nodes plus links carrying one-round messages.
#[derive(Debug, Clone)]
pub struct Network<'a> {
    graph: &'a Graph,
    plan: &'a SamplingPlan,
    nodes: Vec<NodeState>,
    round: usize,
    messages_last_round: Vec<usize>,
}

impl<'a> Network<'a> {
    pub fn new(graph: &'a Graph, plan: &'a SamplingPlan, initial: &GraphSignal) -> Result<Self> {
        if graph.n() != plan.n() {
            return Err(Error::DimensionMismatch {
                expected: plan.n(),
                found: graph.n(),
            });
        }
        initial.check_len(plan.n())?;
        let hops = graph.hop_distances()?;
        if hops != *plan.delays() {
            return Err(Error::InvalidArgument(
                "plan delays are not the hop distances of this graph".into(),
            ));
        }
        let sensors = plan.sample_set();
        let nodes = (0..graph.n())
            .map(|v| NodeState {
                id: v,
                sensor_slot: sensors.iter().position(|&u| u == v),
                estimate: initial[v],
                latest_errors: vec![None; sensors.len()],
                inbox: Vec::new(),
            })
            .collect();
        Ok(Self {
            graph,
            plan,
            nodes,
            round: 0,
            messages_last_round: vec![0; graph.n()],
        })
    }

    pub fn nodes(&self) -> &[NodeState] {
        &self.nodes
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn estimates(&self) -> GraphSignal {
        GraphSignal::from(self.nodes.iter().map(|n| n.estimate).collect::<Vec<_>>())
    }

    /// Messages each node sent in the most recent round.
    pub fn messages_sent(&self) -> &[usize] {
        &self.messages_last_round
    }

    /// Runs one round against the truth frame `f*^{(k)}`.
    pub fn step(&mut self, truth: &GraphSignal, schedule: &Schedule) -> Result<()> {
        let k = self.round;
        truth.check_len(self.nodes.len())?;

        // input + estimation
        for node in &mut self.nodes {
            if let Some(slot) = node.sensor_slot {
                let eps = truth[node.id] - node.estimate;
                node.latest_errors[slot] = Some((k, eps));
            }
        }

        // update storage: merge what arrived this round (sent in round k - 1)
        for node in &mut self.nodes {
            for msg in std::mem::take(&mut node.inbox) {
                node.merge(msg);
            }
        }

        // communication: every node forwards its freshest table
        let mut outgoing: Vec<Vec<ErrorMessage>> = vec![Vec::new(); self.nodes.len()];
        for node in &self.nodes {
            let table: Vec<ErrorMessage> = node
                .latest_errors
                .iter()
                .enumerate()
                .filter_map(|(sensor, e)| {
                    e.map(|(iteration, value)| ErrorMessage {
                        sensor,
                        iteration,
                        value,
                    })
                })
                .collect();
            let neighbors = self.graph.neighbors(node.id);
            self.messages_last_round[node.id] = table.len() * neighbors.len();
            for &w in neighbors {
                outgoing[w].extend_from_slice(&table);
            }
        }
        for (node, next) in self.nodes.iter_mut().zip(outgoing) {
            node.inbox = next;
        }

        #[cfg(debug_assertions)]
        self.check_propagation()?;

        // update estimation
        let mu = schedule.mu(k + 1);
        let shrink = 1.0 - mu * schedule.beta(k + 1);
        let frame = self.plan.frame();
        for node in &mut self.nodes {
            let mut acc = 0.0;
            for (j, entry) in node.latest_errors.iter().enumerate() {
                if let Some((_, eps)) = entry {
                    acc += eps * frame.get(node.id, j);
                }
            }
            node.estimate = shrink * node.estimate + mu * acc;
        }
        self.round += 1;
        Ok(())
    }

    /// After the merge of round `k`, node `v` must hold sensor `u`'s error from
    /// iteration `k − τ(u,v)` exactly, and nothing if `k < τ(u,v)`.
    pub fn check_propagation(&self) -> Result<()> {
        let k = self.round;
        for node in &self.nodes {
            for (j, &u) in self.plan.sample_set().iter().enumerate() {
                let tau = self.plan.delays().get(u, node.id);
                let expected = k.checked_sub(tau);
                let held = node.latest_errors[j].map(|(it, _)| it);
                if held != expected {
                    return Err(Error::InvalidArgument(format!(
                        "round {k}: node {} holds iteration {held:?} of sensor {u}, expected {expected:?}",
                        node.id
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct SimOptions {
    pub mode: Mode,
    /// Initial estimate; zero when absent.
    pub initial: Option<GraphSignal>,
    /// Keep every `f^{(k)}`.
    pub record_trajectory: bool,
    /// Vertices whose estimate and truth are logged each round.
    pub track_nodes: Vec<usize>,
}

/// Per-round `(k, v, estimate, truth)` samples for tracked vertices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackSample {
    pub k: usize,
    pub v: usize,
    pub estimate: f64,
    pub truth: f64,
}

#[derive(Debug, Clone)]
pub struct SimulationOutput {
    pub trace: ErrorTrace,
    pub final_estimate: GraphSignal,
    pub trajectory: Option<Vec<GraphSignal>>,
    pub tracked: Vec<TrackSample>,
    /// Largest number of messages any node sent in one round.
    pub peak_messages_per_node: usize,
}

/// Runs `steps` rounds of DLSR, recording trace rows for `f^{(0)}..f^{(steps)}`.
///
/// Time-varying truth must provide frames `0..=steps`.
pub fn simulate(
    graph: &Graph,
    plan: &SamplingPlan,
    schedule: &Schedule,
    truth: &TimeVaryingSignal,
    steps: usize,
    options: &SimOptions,
) -> Result<SimulationOutput> {
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be at least 1".into()));
    }
    schedule.validate()?;
    truth.require(steps)?;
    if truth.n() != plan.n() {
        return Err(Error::DimensionMismatch {
            expected: plan.n(),
            found: truth.n(),
        });
    }
    if !graph.is_connected() {
        return Err(graph.hop_distances().expect_err("disconnected graph"));
    }
    if let Some(&v) = options.track_nodes.iter().find(|&&v| v >= plan.n()) {
        return Err(Error::InvalidArgument(format!("tracked vertex {v} out of range")));
    }

    let initial = options
        .initial
        .clone()
        .unwrap_or_else(|| GraphSignal::zeros(plan.n()));
    let mut recorder = TraceRecorder::new(plan, *schedule, truth.is_time_invariant());
    let mut trajectory = options.record_trajectory.then(Vec::new);
    let mut tracked = Vec::new();
    let mut peak = 0;

    let frame = |k: usize| truth.frame(k).expect("frames checked");
    let mut observe = |k: usize, f: &GraphSignal| -> Result<()> {
        recorder.record(k, f, frame(k))?;
        for &v in &options.track_nodes {
            tracked.push(TrackSample {
                k,
                v,
                estimate: f[v],
                truth: frame(k)[v],
            });
        }
        if let Some(t) = trajectory.as_mut() {
            t.push(f.clone());
        }
        Ok(())
    };

    let final_estimate = match options.mode {
        Mode::MessagePassing => {
            let mut net = Network::new(graph, plan, &initial)?;
            observe(0, &initial)?;
            for k in 0..steps {
                net.step(frame(k), schedule)?;
                peak = peak.max(net.messages_sent().iter().copied().max().unwrap_or(0));
                observe(k + 1, &net.estimates())?;
            }
            net.estimates()
        }
        Mode::ClosedForm => {
            let mut state = ReconState::new(plan, initial.clone())?;
            observe(0, &initial)?;
            for k in 0..steps {
                state.advance(frame(k), plan, schedule)?;
                observe(k + 1, state.estimate())?;
            }
            state.estimate().clone()
        }
    };

    Ok(SimulationOutput {
        trace: recorder.finish(),
        final_estimate,
        trajectory,
        tracked,
        peak_messages_per_node: peak,
    })
}

/// Closed-form DLSR on an explicit delay model (for example all-zero delays),
/// without a graph to pass messages over.
pub fn simulate_closed_form(
    plan: &SamplingPlan,
    schedule: &Schedule,
    truth: &TimeVaryingSignal,
    steps: usize,
    initial: Option<GraphSignal>,
    record_trajectory: bool,
) -> Result<SimulationOutput> {
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be at least 1".into()));
    }
    schedule.validate()?;
    truth.require(steps)?;
    let initial = initial.unwrap_or_else(|| GraphSignal::zeros(plan.n()));
    let mut recorder = TraceRecorder::new(plan, *schedule, truth.is_time_invariant());
    let mut trajectory = record_trajectory.then(Vec::new);
    let mut state = ReconState::new(plan, initial.clone())?;
    let frame = |k: usize| truth.frame(k).expect("frames checked");
    recorder.record(0, &initial, frame(0))?;
    if let Some(t) = trajectory.as_mut() {
        t.push(initial);
    }
    for k in 0..steps {
        state.advance(frame(k), plan, schedule)?;
        recorder.record(k + 1, state.estimate(), frame(k + 1))?;
        if let Some(t) = trajectory.as_mut() {
            t.push(state.estimate().clone());
        }
    }
    Ok(SimulationOutput {
        trace: recorder.finish(),
        final_estimate: state.estimate().clone(),
        trajectory,
        tracked: Vec::new(),
        peak_messages_per_node: 0,
    })
}

//! Single-threaded reference interpreter.
//!
//! Fires actors one at a time in the order of the static schedule, over
//! unbounded queues, with the same gating and end-of-stream rules as the
//! threaded runtime. Its sink digests serve as the oracle for runtime runs.

use std::collections::{BTreeMap, VecDeque};

use thiserror::Error;

use crate::analysis::analyze;
use crate::behavior::{Behavior, ControlToken, Firing, Registry};
use crate::gating::RatePlan;
use crate::graph::{ActorId, FifoId, Graph, PortId};
use crate::runtime::{SinkOutput, SinkRecorder};
use crate::trace::{TraceEvent, TraceOp};

#[derive(Debug, Clone, Default)]
pub struct InterpConfig {
    pub default_firings: u64,
    pub source_firings: BTreeMap<String, u64>,
    pub seed: u64,
    pub trace: bool,
    pub capture_sinks: bool,
}

impl InterpConfig {
    pub fn firings_for(&self, name: &str) -> u64 {
        self.source_firings.get(name).copied().unwrap_or(self.default_firings)
    }
}

#[derive(Debug, Error)]
pub enum InterpError {
    #[error("graph is not consistent\n{0}")]
    InconsistentGraph(String),
    #[error("actor `{actor}`: {message}")]
    Behavior { actor: String, message: String },
    #[error("no actor can fire but {} have not reached end of stream: {}", .stuck.len(), .stuck.join(", "))]
    OracleDeadlock { stuck: Vec<String> },
    #[error("expected {expected} behaviors, got {got}")]
    BehaviorCount { expected: usize, got: usize },
}

#[derive(Debug, Clone)]
pub struct InterpResult {
    pub firings: BTreeMap<String, u64>,
    pub sinks: BTreeMap<String, SinkOutput>,
    pub max_occupancy: BTreeMap<String, usize>,
    pub trace: Vec<TraceEvent>,
}

enum Step {
    Fired,
    /// Waiting on this FIFO, or on nothing for an exhausted source.
    Blocked(Option<FifoId>),
}

struct State<'g> {
    graph: &'g Graph,
    queues: Vec<VecDeque<u8>>,
    max_occ: Vec<usize>,
    trace: Option<Vec<TraceEvent>>,
}

impl State<'_> {
    fn tokens(&self, f: FifoId) -> usize {
        self.queues[f.0].len() / self.graph.fifo(f).token_bytes
    }

    fn pop(&mut self, f: FifoId, n: usize) -> Vec<u8> {
        let bytes = n * self.graph.fifo(f).token_bytes;
        let out: Vec<u8> = self.queues[f.0].drain(..bytes).collect();
        let occ = self.tokens(f);
        self.log(f, TraceOp::Read, occ);
        out
    }

    fn push(&mut self, f: FifoId, data: &[u8]) {
        self.queues[f.0].extend(data);
        let occ = self.tokens(f);
        self.max_occ[f.0] = self.max_occ[f.0].max(occ);
        self.log(f, TraceOp::Write, occ);
    }

    fn log(&mut self, f: FifoId, op: TraceOp, occupancy: usize) {
        if let Some(t) = &mut self.trace {
            t.push(TraceEvent { fifo: self.graph.fifo(f).name.clone(), op, occupancy });
        }
    }
}

/// Runs the graph to completion with `behaviors`, one per actor.
pub fn interpret(
    graph: &Graph,
    mut behaviors: Vec<Box<dyn Behavior>>,
    config: &InterpConfig,
) -> Result<InterpResult, InterpError> {
    if behaviors.len() != graph.num_actors() {
        return Err(InterpError::BehaviorCount { expected: graph.num_actors(), got: behaviors.len() });
    }
    let report = analyze(graph);
    if !report.is_consistent() {
        return Err(InterpError::InconsistentGraph(report.render(graph)));
    }
    let mut order: Vec<ActorId> = Vec::new();
    if let Some(s) = report.static_schedule() {
        for &(a, _) in &s.firings {
            if !order.contains(&a) {
                order.push(a);
            }
        }
    }
    for a in graph.actor_ids() {
        if !order.contains(&a) {
            order.push(a);
        }
    }

    let mut st = State {
        graph,
        queues: graph.fifos().map(|(_, f)| f.initial_tokens().into()).collect(),
        max_occ: graph.fifos().map(|(_, f)| f.delay as usize).collect(),
        trace: config.trace.then(Vec::new),
    };
    let plans: Vec<RatePlan> = graph.actor_ids().map(|a| RatePlan::new(graph, a)).collect();
    let limits: Vec<Option<u64>> = graph
        .actors()
        .map(|(a, actor)| graph.is_source(a).then(|| config.firings_for(&actor.name)))
        .collect();
    let mut sinks: Vec<Option<SinkRecorder>> =
        graph.actor_ids().map(|a| graph.is_sink(a).then(|| SinkRecorder::new(config.capture_sinks))).collect();
    let mut fired = vec![0u64; graph.num_actors()];
    let mut done = vec![false; graph.num_actors()];

    for (a, b) in graph.actor_ids().zip(behaviors.iter_mut()) {
        b.init().map_err(|e| behavior_err(graph, a, e.0))?;
    }

    loop {
        let mut progress = false;
        for &a in &order {
            if done[a.0] {
                continue;
            }
            let step = try_fire(
                &mut st,
                a,
                &plans[a.0],
                behaviors[a.0].as_mut(),
                limits[a.0],
                fired[a.0],
                sinks[a.0].as_mut(),
            )?;
            match step {
                Step::Fired => {
                    fired[a.0] += 1;
                    progress = true;
                }
                Step::Blocked(f) => {
                    let eos = match f {
                        None => true,
                        Some(f) => done[graph.fifo_src_actor(f).0],
                    };
                    if eos {
                        done[a.0] = true;
                        behaviors[a.0].finish().map_err(|e| behavior_err(graph, a, e.0))?;
                        progress = true;
                    }
                }
            }
        }
        if !progress {
            break;
        }
    }
    let stuck: Vec<String> =
        graph.actor_ids().filter(|a| !done[a.0]).map(|a| graph.actor_name(a).to_string()).collect();
    if !stuck.is_empty() {
        return Err(InterpError::OracleDeadlock { stuck });
    }

    Ok(InterpResult {
        firings: graph.actors().map(|(a, actor)| (actor.name.clone(), fired[a.0])).collect(),
        sinks: graph
            .actors()
            .zip(sinks)
            .filter_map(|((_, actor), s)| s.map(|s| (actor.name.clone(), s.finish())))
            .collect(),
        max_occupancy: graph.fifos().map(|(f, fifo)| (fifo.name.clone(), st.max_occ[f.0])).collect(),
        trace: st.trace.unwrap_or_default(),
    })
}

/// Builds behaviors from `registry` and interprets the graph.
pub fn interpret_graph(graph: &Graph, registry: &Registry, config: &InterpConfig) -> Result<InterpResult, InterpError> {
    let behaviors = registry
        .instantiate(graph, config.seed)
        .map_err(|e| InterpError::Behavior { actor: String::new(), message: e.0 })?;
    interpret(graph, behaviors, config)
}

fn behavior_err(graph: &Graph, a: ActorId, message: String) -> InterpError {
    InterpError::Behavior { actor: graph.actor_name(a).to_string(), message }
}

fn try_fire(
    st: &mut State<'_>,
    a: ActorId,
    plan: &RatePlan,
    behavior: &mut dyn Behavior,
    limit: Option<u64>,
    index: u64,
    sink: Option<&mut SinkRecorder>,
) -> Result<Step, InterpError> {
    let graph = st.graph;
    if limit.is_some_and(|n| index >= n) {
        return Ok(Step::Blocked(None));
    }
    let cfifo = graph.cport(a).map(|c| graph.input_fifo(c));
    let token = match cfifo {
        Some(f) => {
            if st.tokens(f) < 1 {
                return Ok(Step::Blocked(Some(f)));
            }
            let len = plan.control_len.unwrap_or(0);
            let bytes: Vec<u8> = st.queues[f.0].iter().take(len).copied().collect();
            Some(ControlToken::decode(&bytes, len).map_err(|e| behavior_err(graph, a, e.0))?)
        }
        None => None,
    };
    let in_rates: Vec<u32> = plan.inputs.iter().map(|(_, r)| r.tokens(token.as_ref())).collect();
    for (&(p, _), &r) in plan.inputs.iter().zip(&in_rates) {
        let f = graph.input_fifo(p);
        if r > 0 && st.tokens(f) < r as usize {
            return Ok(Step::Blocked(Some(f)));
        }
    }

    if let (Some(f), Some(t)) = (cfifo, &token) {
        st.pop(f, 1);
        behavior.control(t).map_err(|e| behavior_err(graph, a, e.0))?;
    }
    let inputs: Vec<Vec<u8>> = plan
        .inputs
        .iter()
        .zip(&in_rates)
        .map(|(&(p, _), &r)| if r > 0 { st.pop(graph.input_fifo(p), r as usize) } else { Vec::new() })
        .collect();
    let mut outputs: Vec<Vec<u8>> = plan
        .outputs
        .iter()
        .map(|&(p, rate)| vec![0u8; rate.tokens(token.as_ref()) as usize * out_token_bytes(graph, p)])
        .collect();
    {
        let mut firing = Firing {
            index,
            control: token.as_ref(),
            inputs: inputs.iter().map(Vec::as_slice).collect(),
            outputs: outputs.iter_mut().map(Vec::as_mut_slice).collect(),
        };
        behavior.fire(&mut firing).map_err(|e| behavior_err(graph, a, e.0))?;
    }
    if let Some(s) = sink {
        inputs.iter().for_each(|i| s.record(i));
    }
    for (&(p, _), data) in plan.outputs.iter().zip(&outputs) {
        if data.is_empty() {
            continue;
        }
        for &f in graph.port_fifos(p) {
            st.push(f, data);
        }
    }
    Ok(Step::Fired)
}

fn out_token_bytes(graph: &Graph, p: PortId) -> usize {
    graph.fifo(graph.port_fifos(p)[0]).token_bytes
}

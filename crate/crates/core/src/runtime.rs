//! Thread-per-actor executor over bounded FIFOs.
//!
//! Each FIFO is sized from the buffering factor and capped at its analysed
//! bound, so a consistent graph runs without artificial deadlock. Actors stop
//! at the first end-of-stream seen at a firing boundary; sources stop after
//! their configured number of firings.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::{mpsc, Arc};
use std::thread;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::analysis::analyze;
use crate::behavior::{actor_seed, Behavior, BehaviorError, ControlToken, Firing, Registry};
use crate::fifo::{channel, plan, CapacityPlan, Consumer, FifoError, FifoHandle, Producer};
use crate::gating::{check_firing, RatePlan};
use crate::graph::{ActorId, FifoId, Graph, PortId};
use crate::trace::{TraceEvent, TraceLog};

#[derive(Debug, Clone)]
pub struct Jitter {
    pub seed: u64,
    /// Chance of sleeping before a firing.
    pub probability: f64,
    pub max_delay: Duration,
}

#[derive(Debug, Clone)]
pub struct RuntimeConfig {
    /// Firings per source actor unless overridden in `source_firings`.
    pub default_firings: u64,
    pub source_firings: BTreeMap<String, u64>,
    /// Minimum buffering factor `C`; raised per FIFO when its bound needs more room.
    pub factor: usize,
    /// Refuse FIFOs larger than this many bytes.
    pub max_fifo_bytes: Option<usize>,
    /// Seed for behaviors built from a registry.
    pub seed: u64,
    /// Actor name to CPU index.
    pub pinning: BTreeMap<String, usize>,
    pub jitter: Option<Jitter>,
    pub timeout: Option<Duration>,
    pub trace: bool,
    /// Keep sink input bytes in the report, not only their digest.
    pub capture_sinks: bool,
}

impl Default for RuntimeConfig {
    fn default() -> Self {
        RuntimeConfig {
            default_firings: 1,
            source_firings: BTreeMap::new(),
            factor: 2,
            max_fifo_bytes: None,
            seed: 0,
            pinning: BTreeMap::new(),
            jitter: None,
            timeout: Some(Duration::from_secs(60)),
            trace: false,
            capture_sinks: false,
        }
    }
}

impl RuntimeConfig {
    pub fn firings_for(&self, name: &str) -> u64 {
        self.source_firings.get(name).copied().unwrap_or(self.default_firings)
    }
}

#[derive(Debug, Error)]
pub enum RuntimeError {
    #[error("graph is not consistent\n{0}")]
    InconsistentGraph(String),
    #[error("cannot allocate FIFO `{fifo}`: {message}")]
    AllocationFailure { fifo: String, message: String },
    #[error("{0}")]
    Behavior(#[from] BehaviorError),
    #[error("actor `{actor}`: {message}")]
    ActorFailed { actor: String, message: String },
    #[error("actor `{actor}` panicked: {message}")]
    ActorPanic { actor: String, message: String },
    #[error("actor `{actor}`: {source}")]
    Fifo { actor: String, source: FifoError },
    #[error("run did not finish within {0:?}")]
    Timeout(Duration),
    #[error("cannot pin actor `{actor}` to CPU {cpu}: {message}")]
    Pinning { actor: String, cpu: usize, message: String },
    #[error("expected {expected} behaviors, got {got}")]
    BehaviorCount { expected: usize, got: usize },
}

impl RuntimeError {
    fn is_secondary(&self) -> bool {
        matches!(self, RuntimeError::Fifo { source: FifoError::Poisoned(_), .. })
    }
}

/// Everything an actor with no outputs consumed, in firing and port order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SinkOutput {
    pub bytes: u64,
    pub digest: String,
    pub data: Option<Vec<u8>>,
}

pub(crate) struct SinkRecorder {
    hasher: Sha256,
    bytes: u64,
    data: Option<Vec<u8>>,
}

impl SinkRecorder {
    pub(crate) fn new(capture: bool) -> Self {
        SinkRecorder { hasher: Sha256::new(), bytes: 0, data: capture.then(Vec::new) }
    }

    pub(crate) fn record(&mut self, span: &[u8]) {
        self.hasher.update(span);
        self.bytes += span.len() as u64;
        if let Some(d) = &mut self.data {
            d.extend_from_slice(span);
        }
    }

    pub(crate) fn finish(self) -> SinkOutput {
        SinkOutput { bytes: self.bytes, digest: hex::encode(self.hasher.finalize()), data: self.data }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FifoReport {
    pub beta: usize,
    pub slots: usize,
    pub max_occupancy: usize,
    pub written_tokens: usize,
    pub copies: usize,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub firings: BTreeMap<String, u64>,
    pub sinks: BTreeMap<String, SinkOutput>,
    pub fifos: BTreeMap<String, FifoReport>,
    /// Firings whose transfers disagreed with the control table.
    pub rate_violations: u64,
    pub wall_time: Duration,
    pub trace: Vec<TraceEvent>,
}

struct ActorCtx {
    id: ActorId,
    name: String,
    behavior: Box<dyn Behavior>,
    rates: RatePlan,
    control: Option<Consumer>,
    inputs: Vec<Consumer>,
    outputs: Vec<Vec<Producer>>,
    limit: Option<u64>,
    sink: Option<SinkRecorder>,
    cpu: Option<usize>,
    jitter: Option<(ChaCha8Rng, f64, Duration)>,
}

struct ActorOutcome {
    firings: u64,
    violations: u64,
    sink: Option<SinkOutput>,
}

/// A graph with allocated FIFOs and initialised behaviors, ready to run.
pub struct Runtime {
    graph: Arc<Graph>,
    actors: Vec<ActorCtx>,
    handles: Vec<FifoHandle>,
    plans: Vec<CapacityPlan>,
    betas: Vec<usize>,
    trace: Option<Arc<TraceLog>>,
    timeout: Option<Duration>,
}

/// Analyses the graph, allocates every FIFO and runs the `init` hooks.
pub fn instantiate(
    graph: &Graph,
    behaviors: Vec<Box<dyn Behavior>>,
    config: &RuntimeConfig,
) -> Result<Runtime, RuntimeError> {
    if behaviors.len() != graph.num_actors() {
        return Err(RuntimeError::BehaviorCount { expected: graph.num_actors(), got: behaviors.len() });
    }
    let report = analyze(graph);
    if !report.is_consistent() {
        return Err(RuntimeError::InconsistentGraph(report.render(graph)));
    }
    let trace = config.trace.then(|| Arc::new(TraceLog::new()));

    let mut producers: Vec<Option<Producer>> = Vec::new();
    let mut consumers: Vec<Option<Consumer>> = Vec::new();
    let (mut handles, mut plans, mut betas) = (Vec::new(), Vec::new(), Vec::new());
    for (fid, f) in graph.fifos() {
        let alloc_err = |message: String| RuntimeError::AllocationFailure { fifo: f.name.clone(), message };
        let beta = report.beta(fid).unwrap_or(0) as usize;
        let beta = beta.max(f.delay as usize).max(f.rate as usize);
        let p = fifo_plan(f.rate as usize, f.token_bytes, f.delay as usize, config.factor, beta)
            .map_err(|e| alloc_err(e.to_string()))?;
        if let Some(max) = config.max_fifo_bytes {
            if p.bytes > max {
                return Err(alloc_err(format!("needs {} bytes, limit is {max}", p.bytes)));
            }
        }
        let (tx, rx, h) = channel(&f.name, &p, &f.initial_tokens(), Some(beta), trace.clone())
            .map_err(|e| alloc_err(e.to_string()))?;
        producers.push(Some(tx));
        consumers.push(Some(rx));
        handles.push(h);
        plans.push(p);
        betas.push(beta);
    }

    let mut actors = Vec::with_capacity(graph.num_actors());
    for ((id, actor), mut behavior) in graph.actors().zip(behaviors) {
        behavior.init().map_err(|e| RuntimeError::ActorFailed { actor: actor.name.clone(), message: e.0 })?;
        let rates = RatePlan::new(graph, id);
        let take_in = |consumers: &mut Vec<Option<Consumer>>, p: PortId| {
            consumers[graph.input_fifo(p).0].take().expect("each FIFO has one reader")
        };
        let control = graph.cport(id).map(|c| take_in(&mut consumers, c));
        let inputs = rates.inputs.iter().map(|&(p, _)| take_in(&mut consumers, p)).collect();
        let outputs = rates
            .outputs
            .iter()
            .map(|&(p, _)| {
                graph
                    .port_fifos(p)
                    .iter()
                    .map(|f: &FifoId| producers[f.0].take().expect("each FIFO has one writer"))
                    .collect()
            })
            .collect();
        let jitter = config.jitter.as_ref().map(|j| {
            (ChaCha8Rng::seed_from_u64(actor_seed(j.seed, &actor.name)), j.probability, j.max_delay)
        });
        actors.push(ActorCtx {
            id,
            name: actor.name.clone(),
            behavior,
            rates,
            control,
            inputs,
            outputs,
            limit: graph.is_source(id).then(|| config.firings_for(&actor.name)),
            sink: graph.is_sink(id).then(|| SinkRecorder::new(config.capture_sinks)),
            cpu: config.pinning.get(&actor.name).copied(),
            jitter,
        });
    }
    Ok(Runtime { graph: Arc::new(graph.clone()), actors, handles, plans, betas, trace, timeout: config.timeout })
}

/// Layout for a FIFO capped at `beta` tokens: the smallest factor of at least
/// `factor` whose buffer holds `beta` queued tokens plus one span in flight.
pub fn fifo_plan(r: usize, b: usize, q: usize, factor: usize, beta: usize) -> Result<CapacityPlan, FifoError> {
    let mut c = factor;
    loop {
        let p = plan(r, b, q, c)?;
        if p.headroom() >= beta + r {
            return Ok(p);
        }
        c += 1;
    }
}

/// Builds behaviors from `registry`, then instantiates and runs the graph.
pub fn run_graph(
    graph: &Graph,
    registry: &Registry,
    config: &RuntimeConfig,
) -> Result<RunReport, RuntimeError> {
    let behaviors = registry.instantiate(graph, config.seed)?;
    instantiate(graph, behaviors, config)?.run()
}

impl Runtime {
    pub fn plan(&self, f: FifoId) -> &CapacityPlan {
        &self.plans[f.0]
    }

    pub fn cap(&self, f: FifoId) -> usize {
        self.betas[f.0]
    }

    /// Spawns one thread per actor and waits for all of them.
    pub fn run(self) -> Result<RunReport, RuntimeError> {
        let start = Instant::now();
        let Runtime { graph, actors, handles, plans, betas, trace, timeout } = self;
        let names: Vec<String> = actors.iter().map(|a| a.name.clone()).collect();
        let (tx, rx) = mpsc::channel();
        let mut joins = Vec::new();
        for (idx, ctx) in actors.into_iter().enumerate() {
            let tx = tx.clone();
            let graph = graph.clone();
            let name = ctx.name.clone();
            let spawned = thread::Builder::new().name(name.clone()).spawn(move || {
                let res = catch_unwind(AssertUnwindSafe(|| actor_main(&graph, ctx)))
                    .unwrap_or_else(|p| Err(RuntimeError::ActorPanic { actor: name, message: panic_message(&p) }));
                let _ = tx.send((idx, res));
            });
            match spawned {
                Ok(j) => joins.push(j),
                Err(e) => {
                    handles.iter().for_each(FifoHandle::poison);
                    return Err(RuntimeError::ActorFailed { actor: names[idx].clone(), message: e.to_string() });
                }
            }
        }
        drop(tx);

        let deadline = timeout.map(|t| start + t);
        let mut outcomes: Vec<Option<ActorOutcome>> = (0..names.len()).map(|_| None).collect();
        let mut error: Option<RuntimeError> = None;
        let mut timed_out = false;
        let mut pending = names.len();
        while pending > 0 {
            let msg = match (deadline, timed_out) {
                (Some(d), false) => match rx.recv_timeout(d.saturating_duration_since(Instant::now())) {
                    Ok(m) => m,
                    Err(mpsc::RecvTimeoutError::Timeout) => {
                        timed_out = true;
                        error = Some(RuntimeError::Timeout(timeout.unwrap_or_default()));
                        handles.iter().for_each(FifoHandle::poison);
                        continue;
                    }
                    Err(mpsc::RecvTimeoutError::Disconnected) => break,
                },
                // After a timeout, give stuck behaviors a short grace period.
                (_, true) => match rx.recv_timeout(Duration::from_secs(1)) {
                    Ok(m) => m,
                    Err(_) => break,
                },
                (None, false) => match rx.recv() {
                    Ok(m) => m,
                    Err(_) => break,
                },
            };
            pending -= 1;
            match msg {
                (idx, Ok(o)) => outcomes[idx] = Some(o),
                (_, Err(e)) => {
                    if error.as_ref().is_none_or(|cur| cur.is_secondary() && !e.is_secondary()) {
                        error = Some(e);
                    }
                    handles.iter().for_each(FifoHandle::poison);
                }
            }
        }
        if let Some(e) = error {
            if !timed_out {
                joins.into_iter().for_each(|j| drop(j.join()));
            }
            return Err(e);
        }
        joins.into_iter().for_each(|j| drop(j.join()));

        let mut report = RunReport {
            firings: BTreeMap::new(),
            sinks: BTreeMap::new(),
            fifos: BTreeMap::new(),
            rate_violations: 0,
            wall_time: start.elapsed(),
            trace: trace.map(|t| t.take()).unwrap_or_default(),
        };
        for (name, o) in names.into_iter().zip(outcomes) {
            let o = o.expect("every actor reported");
            report.rate_violations += o.violations;
            if let Some(s) = o.sink {
                report.sinks.insert(name.clone(), s);
            }
            report.firings.insert(name, o.firings);
        }
        for ((h, p), beta) in handles.iter().zip(&plans).zip(&betas) {
            let s = h.stats();
            report.fifos.insert(
                h.name().to_string(),
                FifoReport {
                    beta: *beta,
                    slots: p.slots,
                    max_occupancy: s.max_occupancy,
                    written_tokens: s.written_tokens,
                    copies: s.copies,
                },
            );
        }
        Ok(report)
    }
}

fn panic_message(p: &Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = p.downcast_ref::<&str>() {
        s.to_string()
    } else if let Some(s) = p.downcast_ref::<String>() {
        s.clone()
    } else {
        "non-string panic payload".to_string()
    }
}

#[cfg(target_os = "linux")]
fn pin_current(cpu: usize) -> Result<(), String> {
    if cpu >= libc::CPU_SETSIZE as usize {
        return Err("CPU index out of range".into());
    }
    // SAFETY: cpu_set_t is plain data; the set is initialised before use.
    unsafe {
        let mut set: libc::cpu_set_t = std::mem::zeroed();
        libc::CPU_ZERO(&mut set);
        libc::CPU_SET(cpu, &mut set);
        if libc::sched_setaffinity(0, std::mem::size_of::<libc::cpu_set_t>(), &set) != 0 {
            return Err(std::io::Error::last_os_error().to_string());
        }
    }
    Ok(())
}

#[cfg(not(target_os = "linux"))]
fn pin_current(_cpu: usize) -> Result<(), String> {
    Err("pinning is only supported on Linux".into())
}

fn actor_main(graph: &Graph, mut ctx: ActorCtx) -> Result<ActorOutcome, RuntimeError> {
    if let Some(cpu) = ctx.cpu {
        pin_current(cpu).map_err(|message| RuntimeError::Pinning { actor: ctx.name.clone(), cpu, message })?;
    }
    let looped = fire_loop(graph, &mut ctx);
    // Close every FIFO before `finish` so neighbours see end-of-stream promptly.
    ctx.control = None;
    ctx.inputs.clear();
    ctx.outputs.clear();
    let finished = ctx.behavior.finish();
    let (firings, violations) = looped?;
    finished.map_err(|e| RuntimeError::ActorFailed { actor: ctx.name.clone(), message: e.0 })?;
    Ok(ActorOutcome { firings, violations, sink: ctx.sink.take().map(SinkRecorder::finish) })
}

fn fire_loop(graph: &Graph, ctx: &mut ActorCtx) -> Result<(u64, u64), RuntimeError> {
    let name = ctx.name.clone();
    let fifo_err = |source: FifoError| RuntimeError::Fifo { actor: name.clone(), source };
    let fail = |e: BehaviorError| RuntimeError::ActorFailed { actor: name.clone(), message: e.0 };
    let mut fired = 0u64;
    let mut violations = 0u64;
    let mut observed: Vec<(PortId, u32)> = Vec::new();
    loop {
        if ctx.limit.is_some_and(|n| fired >= n) {
            break;
        }
        if let Some((rng, p, max)) = &mut ctx.jitter {
            if rng.gen_bool(*p) {
                thread::sleep(max.mul_f64(rng.gen::<f64>()));
            }
        }
        let token = match &mut ctx.control {
            Some(c) => {
                let len = ctx.rates.control_len.unwrap_or(0);
                let t = match c.read_start().map_err(fifo_err)? {
                    None => break,
                    Some(bytes) => ControlToken::decode(bytes, len).map_err(fail)?,
                };
                c.read_end().map_err(fifo_err)?;
                ctx.behavior.control(&t).map_err(fail)?;
                Some(t)
            }
            None => None,
        };
        let in_rates: Vec<u32> = ctx.rates.inputs.iter().map(|(_, r)| r.tokens(token.as_ref())).collect();
        let out_rates: Vec<u32> = ctx.rates.outputs.iter().map(|(_, r)| r.tokens(token.as_ref())).collect();

        let mut in_spans: Vec<&[u8]> = Vec::with_capacity(in_rates.len());
        let mut eos = false;
        for (c, &r) in ctx.inputs.iter_mut().zip(&in_rates) {
            if r == 0 {
                in_spans.push(&[]);
                continue;
            }
            match c.read_start().map_err(fifo_err)? {
                Some(s) => in_spans.push(s),
                None => {
                    eos = true;
                    break;
                }
            }
        }
        if eos {
            break;
        }
        let mut out_spans: Vec<Vec<&mut [u8]>> = Vec::with_capacity(out_rates.len());
        for (ps, &r) in ctx.outputs.iter_mut().zip(&out_rates) {
            let mut spans = Vec::new();
            if r > 0 {
                for p in ps.iter_mut() {
                    spans.push(p.write_start().map_err(fifo_err)?);
                }
            }
            out_spans.push(spans);
        }

        {
            let outputs: Vec<&mut [u8]> = out_spans
                .iter_mut()
                .map(|v| match v.first_mut() {
                    Some(s) => &mut **s,
                    None => &mut [][..],
                })
                .collect();
            let mut firing = Firing { index: fired, control: token.as_ref(), inputs: in_spans.clone(), outputs };
            ctx.behavior.fire(&mut firing).map_err(fail)?;
        }
        for v in out_spans.iter_mut() {
            if let Some((first, rest)) = v.split_first_mut() {
                for s in rest {
                    s.copy_from_slice(first);
                }
            }
        }
        if let Some(sink) = &mut ctx.sink {
            in_spans.iter().for_each(|s| sink.record(s));
        }

        observed.clear();
        for ((&(p, _), s), _) in ctx.rates.inputs.iter().zip(&in_spans).zip(&in_rates) {
            observed.push((p, (s.len() / token_bytes(graph, p)) as u32));
        }
        for (&(p, _), v) in ctx.rates.outputs.iter().zip(&out_spans) {
            let n = v.first().map_or(0, |s| s.len() / token_bytes(graph, p));
            if v.iter().any(|s| s.len() != n * token_bytes(graph, p)) {
                violations += 1;
            }
            observed.push((p, n as u32));
        }
        if !check_firing(graph, ctx.id, token.as_ref(), &observed).is_empty() {
            violations += 1;
        }
        drop(in_spans);
        drop(out_spans);

        for (ps, &r) in ctx.outputs.iter_mut().zip(&out_rates) {
            if r > 0 {
                for p in ps.iter_mut() {
                    p.write_end().map_err(fifo_err)?;
                }
            }
        }
        for (c, &r) in ctx.inputs.iter_mut().zip(&in_rates) {
            if r > 0 {
                c.read_end().map_err(fifo_err)?;
            }
        }
        fired += 1;
    }
    Ok((fired, violations))
}

fn token_bytes(graph: &Graph, port: PortId) -> usize {
    graph.fifo(graph.port_fifos(port)[0]).token_bytes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::build_graph;
    use crate::builder::GraphBuilder;

    struct Counter(u32);
    impl Behavior for Counter {
        fn fire(&mut self, f: &mut Firing<'_>) -> Result<(), BehaviorError> {
            for o in f.outputs.iter_mut() {
                for chunk in o.chunks_mut(4) {
                    chunk.copy_from_slice(&self.0.to_le_bytes());
                    self.0 += 1;
                }
            }
            Ok(())
        }
    }

    struct Copy;
    impl Behavior for Copy {
        fn fire(&mut self, f: &mut Firing<'_>) -> Result<(), BehaviorError> {
            let i = f.inputs[0];
            f.outputs[0].copy_from_slice(i);
            Ok(())
        }
    }

    struct Drain;
    impl Behavior for Drain {
        fn fire(&mut self, _: &mut Firing<'_>) -> Result<(), BehaviorError> {
            Ok(())
        }
    }

    struct Boom;
    impl Behavior for Boom {
        fn fire(&mut self, _: &mut Firing<'_>) -> Result<(), BehaviorError> {
            panic!("boom");
        }
    }

    fn chain() -> Graph {
        let mut b = GraphBuilder::new("chain");
        b.source("s", 1).stat("a", &["i"], &["o"]).sink("k", 1);
        b.fifo("s.o", "a.i").fifo("a.o", "k.i");
        build_graph(&b.build()).unwrap()
    }

    fn expected_digest(n: u32) -> String {
        let mut h = Sha256::new();
        for i in 0..n {
            h.update(i.to_le_bytes());
        }
        hex::encode(h.finalize())
    }

    #[test]
    fn chain_delivers_every_token_in_order() {
        let g = chain();
        let cfg = RuntimeConfig { default_firings: 500, trace: true, ..Default::default() };
        let rt = instantiate(&g, vec![Box::new(Counter(0)), Box::new(Copy), Box::new(Drain)], &cfg).unwrap();
        let r = rt.run().unwrap();
        assert_eq!(r.firings["s"], 500);
        assert_eq!(r.firings["k"], 500);
        assert_eq!(r.sinks["k"].digest, expected_digest(500));
        assert_eq!(r.rate_violations, 0);
        for f in r.fifos.values() {
            assert!(f.max_occupancy <= f.beta);
        }
        assert_eq!(r.trace.len(), 2 * 2 * 500);
    }

    #[test]
    fn panic_is_reported_and_run_ends() {
        let g = chain();
        let cfg = RuntimeConfig { default_firings: 10, ..Default::default() };
        let rt = instantiate(&g, vec![Box::new(Counter(0)), Box::new(Boom), Box::new(Drain)], &cfg).unwrap();
        match rt.run() {
            Err(RuntimeError::ActorPanic { actor, message }) => {
                assert_eq!(actor, "a");
                assert_eq!(message, "boom");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn stuck_actor_times_out() {
        struct Hang;
        impl Behavior for Hang {
            fn fire(&mut self, _: &mut Firing<'_>) -> Result<(), BehaviorError> {
                thread::sleep(Duration::from_millis(300));
                Ok(())
            }
        }
        let g = chain();
        let cfg = RuntimeConfig { default_firings: 100, timeout: Some(Duration::from_millis(100)), ..Default::default() };
        let rt = instantiate(&g, vec![Box::new(Counter(0)), Box::new(Hang), Box::new(Drain)], &cfg).unwrap();
        assert!(matches!(rt.run(), Err(RuntimeError::Timeout(_))));
    }

    #[test]
    fn inconsistent_graph_is_refused() {
        let mut b = GraphBuilder::new("loop");
        b.source("s", 1).stat("a", &["i", "fb"], &["o", "back"]).sink("k", 1);
        b.fifo("s.o", "a.i").fifo("a.o", "k.i").fifo("a.back", "a.fb");
        let g = build_graph(&b.build()).unwrap();
        let err = instantiate(&g, (0..3).map(|_| Box::new(Drain) as Box<dyn Behavior>).collect(), &Default::default());
        assert!(matches!(err, Err(RuntimeError::InconsistentGraph(_))));
    }

    #[test]
    fn factor_grows_until_bound_fits() {
        // Aligned ring of max(2*2, 4) = 4 slots cannot hold 4 queued tokens plus a span.
        let p = fifo_plan(2, 1, 4, 2, 4).unwrap();
        assert_eq!(p.factor, 3);
        assert!(p.headroom() >= 6);
        let p = fifo_plan(2, 1, 5, 2, 5).unwrap();
        assert_eq!(p.factor, 2);
    }

    #[test]
    fn byte_limit_is_an_allocation_failure() {
        let g = chain();
        let cfg = RuntimeConfig { max_fifo_bytes: Some(4), ..Default::default() };
        let err = instantiate(&g, vec![Box::new(Counter(0)), Box::new(Copy), Box::new(Drain)], &cfg);
        assert!(matches!(err, Err(RuntimeError::AllocationFailure { .. })));
    }

    #[test]
    fn zero_source_firings_still_finish_everyone() {
        use std::sync::atomic::{AtomicUsize, Ordering};
        static FINISHED: AtomicUsize = AtomicUsize::new(0);
        struct Fin;
        impl Behavior for Fin {
            fn fire(&mut self, _: &mut Firing<'_>) -> Result<(), BehaviorError> {
                Ok(())
            }
            fn finish(&mut self) -> Result<(), BehaviorError> {
                FINISHED.fetch_add(1, Ordering::SeqCst);
                Ok(())
            }
        }
        let g = chain();
        let cfg = RuntimeConfig { default_firings: 0, ..Default::default() };
        let r = instantiate(&g, vec![Box::new(Fin), Box::new(Fin), Box::new(Fin)], &cfg).unwrap().run().unwrap();
        assert!(r.firings.values().all(|&n| n == 0));
        assert_eq!(FINISHED.load(Ordering::SeqCst), 3);
        assert_eq!(r.sinks["k"].bytes, 0);
    }
}

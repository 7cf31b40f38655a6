//! Consistency analysis: dynamic processing graphs, their dynamic
//! components, per-region periodic schedules and FIFO occupancy bounds.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::graph::{ActorId, ActorKind, Direction, FifoId, Graph, PortId};
use crate::rules::{check_all, find_linked_drps, Violation};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DcMember {
    Actor(ActorId),
    /// Analysis-only stand-in for a FIFO joining a DRP of `x` directly to a DRP of `y`.
    Dummy { name: String, fifo: FifoId },
}

impl DcMember {
    pub fn name<'g>(&'g self, graph: &'g Graph) -> &'g str {
        match self {
            DcMember::Actor(a) => graph.actor_name(*a),
            DcMember::Dummy { name, .. } => name,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DynamicComponent {
    /// 1-based.
    pub id: usize,
    pub members: Vec<DcMember>,
    pub in_drps: Vec<PortId>,
    pub out_drps: Vec<PortId>,
}

impl DynamicComponent {
    pub fn actors(&self) -> impl Iterator<Item = ActorId> + '_ {
        self.members.iter().filter_map(|m| match m {
            DcMember::Actor(a) => Some(*a),
            DcMember::Dummy { .. } => None,
        })
    }

    pub fn member_names(&self, graph: &Graph) -> Vec<String> {
        self.members.iter().map(|m| m.name(graph).to_string()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dpg {
    pub q: ActorId,
    pub x: ActorId,
    pub y: ActorId,
    pub control_port: PortId,
    /// Declared length of the control value.
    pub control_value_len: usize,
    pub members: BTreeSet<ActorId>,
    pub dcs: Vec<DynamicComponent>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DpgError {
    #[error("dynamic actor `{0}` has no linked partner")]
    OrphanDynamicActor(String),
    #[error("actor `{0}` belongs to more than one dynamic processing graph")]
    SharedMembership(String),
    #[error("dynamic actors `{x}` and `{y}` are steered by different control ports")]
    ControllerMismatch { x: String, y: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DpgDiagnostic {
    SurjectivityFailure { dc: usize, message: String },
    BijectionFailure { message: String },
    ElementMismatch { dc: usize, message: String },
}

impl fmt::Display for DpgDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DpgDiagnostic::SurjectivityFailure { dc, message } => write!(f, "SurjectivityFailure Z{dc}: {message}"),
            DpgDiagnostic::BijectionFailure { message } => write!(f, "BijectionFailure: {message}"),
            DpgDiagnostic::ElementMismatch { dc, message } => write!(f, "ElementMismatch Z{dc}: {message}"),
        }
    }
}

/// A set of actors and FIFOs scheduled as one static-rate graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    pub name: String,
    pub actors: Vec<ActorId>,
    pub fifos: Vec<FifoId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    pub region: String,
    pub fifos: Vec<FifoId>,
    /// Firing sequence as `(actor, count)` entries.
    pub firings: Vec<(ActorId, u32)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("deadlock in region {region}: cycle {}", cycle.join(" -> "))]
pub struct DeadlockError {
    pub region: String,
    /// Actors on a cycle of starving FIFOs, in dataflow order.
    pub cycle: Vec<String>,
    /// Token count of every region FIFO when the simulation got stuck.
    pub occupancies: Vec<(String, u32)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BufferBounds {
    /// `B_k(f)` per region name.
    pub per_region: BTreeMap<String, BTreeMap<FifoId, u32>>,
    pub beta: BTreeMap<FifoId, u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Diagnostic {
    Rule(Violation),
    Dpg(DpgError),
    Invalid { dpg: usize, diagnostic: DpgDiagnostic },
    Deadlock(DeadlockError),
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::Rule(v) => write!(f, "{v}"),
            Diagnostic::Dpg(e) => write!(f, "{e}"),
            Diagnostic::Invalid { dpg, diagnostic } => write!(f, "dpg {dpg}: {diagnostic}"),
            Diagnostic::Deadlock(e) => write!(f, "DeadlockError: {e}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Consistent,
    Inconsistent,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsistencyReport {
    pub verdict: Verdict,
    pub dpgs: Vec<Dpg>,
    pub schedules: Vec<Schedule>,
    pub bounds: BufferBounds,
    pub diagnostics: Vec<Diagnostic>,
}

impl ConsistencyReport {
    pub fn is_consistent(&self) -> bool {
        self.verdict == Verdict::Consistent
    }

    pub fn static_schedule(&self) -> Option<&Schedule> {
        self.schedules.iter().find(|s| s.region == STATIC_REGION)
    }

    pub fn beta(&self, f: FifoId) -> Option<u32> {
        self.bounds.beta.get(&f).copied()
    }
}

pub const STATIC_REGION: &str = "static";

fn control_source(graph: &Graph, actor: ActorId) -> Option<PortId> {
    graph.cport(actor).map(|c| graph.fifo(graph.input_fifo(c)).src)
}

/// Groups dynamic and configuration actors into dynamic processing graphs.
pub fn identify_dpgs(graph: &Graph) -> Result<Vec<Dpg>, DpgError> {
    let pairs = find_linked_drps(graph);
    let parents: BTreeSet<(ActorId, ActorId)> = pairs.iter().map(|p| p.parents(graph)).collect();

    let mut dpgs = Vec::new();
    let mut owner: BTreeMap<ActorId, usize> = BTreeMap::new();
    for &(x, y) in &parents {
        let (Some(cx), Some(cy)) = (control_source(graph, x), control_source(graph, y)) else {
            unreachable!("dynamic actors always have a control input");
        };
        if cx != cy {
            return Err(DpgError::ControllerMismatch {
                x: graph.actor_name(x).into(),
                y: graph.actor_name(y).into(),
            });
        }
        let q = graph.port(cx).actor;
        let idx = dpgs.len();
        for a in [q, x, y] {
            if owner.insert(a, idx).is_some() {
                return Err(DpgError::SharedMembership(graph.actor_name(a).into()));
            }
        }
        dpgs.push(Dpg {
            q,
            x,
            y,
            control_port: cx,
            control_value_len: graph.port(cx).control_len.unwrap_or(0),
            members: [q, x, y].into_iter().collect(),
            dcs: Vec::new(),
        });
    }
    for (aid, actor) in graph.actors() {
        if actor.kind == ActorKind::Dynamic && !owner.contains_key(&aid) {
            return Err(DpgError::OrphanDynamicActor(actor.name.clone()));
        }
    }
    Ok(dpgs)
}

/// Splits a DPG into dynamic components, inserting a dummy actor for every
/// FIFO that joins `x` to `y` directly.
pub fn decompose_dcs(graph: &Graph, dpg: &Dpg) -> Dpg {
    let (x, y, q) = (dpg.x, dpg.y, dpg.q);
    let excluded = [x, y, q];

    // Vertices: real actors and dummies (indexed after the actors).
    let mut actors: BTreeSet<ActorId> = BTreeSet::new();
    let mut dummies: Vec<FifoId> = Vec::new();
    let x_out: Vec<PortId> =
        graph.drps(x).into_iter().filter(|&p| graph.port(p).direction == Direction::Out).collect();
    let y_in: Vec<PortId> =
        graph.drps(y).into_iter().filter(|&p| graph.port(p).direction == Direction::In).collect();
    for &p in &x_out {
        for &f in graph.port_fifos(p) {
            let d = graph.fifo_dst_actor(f);
            if d == y {
                dummies.push(f);
            } else if !excluded.contains(&d) {
                actors.insert(d);
            }
        }
    }
    for &p in &y_in {
        let s = graph.fifo_src_actor(graph.input_fifo(p));
        if !excluded.contains(&s) {
            actors.insert(s);
        }
    }
    for pair in find_linked_drps(graph) {
        if pair.parents(graph) == (x, y) {
            for chain in &pair.subchains {
                actors.extend(chain.iter().copied().filter(|a| !excluded.contains(a)));
            }
        }
    }

    // Union-find over actors joined by FIFOs inside the vertex set.
    let list: Vec<ActorId> = actors.iter().copied().collect();
    let index = |a: ActorId| list.binary_search(&a).ok();
    let mut parent: Vec<usize> = (0..list.len()).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for f in graph.fifo_ids() {
        if let (Some(a), Some(b)) = (index(graph.fifo_src_actor(f)), index(graph.fifo_dst_actor(f))) {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            parent[ra] = rb;
        }
    }
    let mut groups: BTreeMap<usize, Vec<ActorId>> = BTreeMap::new();
    for (i, &a) in list.iter().enumerate() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(a);
    }

    let mut dcs: Vec<DynamicComponent> = Vec::new();
    for members in groups.into_values() {
        let in_drps = x_out
            .iter()
            .copied()
            .filter(|&p| graph.port_fifos(p).iter().any(|&f| members.contains(&graph.fifo_dst_actor(f))))
            .collect();
        let out_drps = y_in
            .iter()
            .copied()
            .filter(|&p| members.contains(&graph.fifo_src_actor(graph.input_fifo(p))))
            .collect();
        dcs.push(DynamicComponent {
            id: 0,
            members: members.into_iter().map(DcMember::Actor).collect(),
            in_drps,
            out_drps,
        });
    }
    for (i, &f) in dummies.iter().enumerate() {
        let mut name = if i == 0 { "d".to_string() } else { format!("d{}", i + 1) };
        while graph.actor_by_name(&name).is_some() {
            name.insert(0, '~');
        }
        dcs.push(DynamicComponent {
            id: 0,
            members: vec![DcMember::Dummy { name, fifo: f }],
            in_drps: vec![graph.fifo(f).src],
            out_drps: vec![graph.fifo(f).dst],
        });
    }

    let min_element = |dc: &DynamicComponent| {
        dc.in_drps
            .iter()
            .chain(&dc.out_drps)
            .filter_map(|&p| graph.control_lookup(p).ok().map(|c| c.element))
            .min()
            .unwrap_or(u32::MAX)
    };
    dcs.sort_by_cached_key(|dc| (min_element(dc), dc.member_names(graph)));
    for (i, dc) in dcs.iter_mut().enumerate() {
        dc.id = i + 1;
    }

    let mut out = dpg.clone();
    out.members.extend(dcs.iter().flat_map(|dc| dc.actors().collect::<Vec<_>>()));
    out.dcs = dcs;
    out
}

/// Checks surjectivity of DRPs onto DCs and the DC/control-element bijection.
pub fn validate_dpg(graph: &Graph, dpg: &Dpg) -> Vec<DpgDiagnostic> {
    let mut out = Vec::new();
    let m = dpg.dcs.len();
    let (xn, yn) = (graph.actor_name(dpg.x), graph.actor_name(dpg.y));
    let mut used: BTreeMap<u32, usize> = BTreeMap::new();
    for dc in &dpg.dcs {
        let names = dc.member_names(graph).join(", ");
        if dc.in_drps.is_empty() {
            out.push(DpgDiagnostic::SurjectivityFailure {
                dc: dc.id,
                message: format!("{{{names}}} is not fed by any DRP of {xn}"),
            });
        }
        if dc.out_drps.is_empty() {
            out.push(DpgDiagnostic::SurjectivityFailure {
                dc: dc.id,
                message: format!("{{{names}}} does not feed any DRP of {yn}"),
            });
        }
        let elements: BTreeSet<u32> = dc
            .in_drps
            .iter()
            .chain(&dc.out_drps)
            .filter_map(|&p| graph.control_lookup(p).ok())
            .filter(|c| c.port == dpg.control_port)
            .map(|c| c.element)
            .collect();
        let foreign: Vec<String> = dc
            .in_drps
            .iter()
            .chain(&dc.out_drps)
            .filter(|&&p| graph.control_lookup(p).map(|c| c.port != dpg.control_port).unwrap_or(true))
            .map(|&p| graph.port_path(p))
            .collect();
        if !foreign.is_empty() {
            out.push(DpgDiagnostic::ElementMismatch {
                dc: dc.id,
                message: format!("DRPs {} are not steered by {}", foreign.join(", "), graph.port_path(dpg.control_port)),
            });
        }
        if elements.len() > 1 {
            let list: Vec<String> = elements.iter().map(u32::to_string).collect();
            out.push(DpgDiagnostic::ElementMismatch {
                dc: dc.id,
                message: format!("DRPs of {{{names}}} use control elements {}", list.join(", ")),
            });
        }
        if let Some(&e) = elements.iter().next() {
            if elements.len() == 1 {
                if let Some(prev) = used.insert(e, dc.id) {
                    out.push(DpgDiagnostic::BijectionFailure {
                        message: format!("Z{prev} and Z{} share control element {e}", dc.id),
                    });
                }
            }
        }
    }
    if dpg.control_value_len != m {
        out.push(DpgDiagnostic::BijectionFailure {
            message: format!(
                "{} declares a control value of length {} but the graph has M={} dynamic components",
                graph.port_path(dpg.control_port),
                dpg.control_value_len,
                m
            ),
        });
    }
    let k = graph.drps(dpg.x).iter().filter(|&&p| graph.port(p).direction == Direction::Out).count();
    let l = graph.drps(dpg.y).iter().filter(|&&p| graph.port(p).direction == Direction::In).count();
    if m == 0 || m > k.min(l) {
        out.push(DpgDiagnostic::BijectionFailure {
            message: format!("M={m} outside 1..={}", k.min(l)),
        });
    }
    out
}

/// Region of DC `dc`: its actors plus `x` and `y`, with internal and DRP FIFOs.
pub fn dc_region(graph: &Graph, dpg: &Dpg, dc: &DynamicComponent) -> Region {
    let mut actors: BTreeSet<ActorId> = dc.actors().collect();
    let mut fifos: BTreeSet<FifoId> = BTreeSet::new();
    for f in graph.fifo_ids() {
        if actors.contains(&graph.fifo_src_actor(f)) && actors.contains(&graph.fifo_dst_actor(f)) {
            fifos.insert(f);
        }
    }
    for &p in &dc.in_drps {
        for &f in graph.port_fifos(p) {
            let d = graph.fifo_dst_actor(f);
            if actors.contains(&d) || d == dpg.y {
                fifos.insert(f);
            }
        }
    }
    for &p in &dc.out_drps {
        fifos.insert(graph.input_fifo(p));
    }
    actors.insert(dpg.x);
    actors.insert(dpg.y);
    Region { name: format!("Z{}", dc.id), actors: actors.into_iter().collect(), fifos: fifos.into_iter().collect() }
}

/// The whole graph with every DRP active.
pub fn static_region(graph: &Graph) -> Region {
    Region { name: STATIC_REGION.into(), actors: graph.actor_ids().collect(), fifos: graph.fifo_ids().collect() }
}

/// Simulates one period in which every region actor fires once, always
/// choosing the fireable actor with the smallest name.
pub fn compute_schedule(graph: &Graph, region: &Region) -> Result<Schedule, DeadlockError> {
    let in_region: BTreeSet<FifoId> = region.fifos.iter().copied().collect();
    let mut tokens: BTreeMap<FifoId, u32> = region.fifos.iter().map(|&f| (f, graph.fifo(f).delay)).collect();
    let inputs = |a: ActorId| -> Vec<FifoId> {
        graph
            .ports_of(a, Direction::In)
            .map(|p| graph.input_fifo(p))
            .filter(|f| in_region.contains(f))
            .collect()
    };
    let mut pending: Vec<ActorId> = region.actors.clone();
    pending.sort_by(|a, b| graph.actor_name(*a).cmp(graph.actor_name(*b)));
    let mut firings = Vec::with_capacity(pending.len());
    while !pending.is_empty() {
        let pick = pending
            .iter()
            .position(|&a| inputs(a).iter().all(|f| tokens[f] >= graph.fifo(*f).rate));
        let Some(i) = pick else {
            return Err(deadlock(graph, region, &pending, &tokens, &inputs));
        };
        let a = pending.remove(i);
        for f in inputs(a) {
            *tokens.get_mut(&f).unwrap() -= graph.fifo(f).rate;
        }
        for p in graph.ports_of(a, Direction::Out) {
            for &f in graph.port_fifos(p) {
                if let Some(t) = tokens.get_mut(&f) {
                    *t += graph.fifo(f).rate;
                }
            }
        }
        firings.push((a, 1));
    }
    Ok(Schedule { region: region.name.clone(), fifos: region.fifos.clone(), firings })
}

fn deadlock(
    graph: &Graph,
    region: &Region,
    pending: &[ActorId],
    tokens: &BTreeMap<FifoId, u32>,
    inputs: &dyn Fn(ActorId) -> Vec<FifoId>,
) -> DeadlockError {
    // Walk starving inputs backwards; every producer of a starving FIFO is
    // itself still pending, so the walk must revisit an actor.
    let mut path: Vec<ActorId> = vec![pending[0]];
    loop {
        let cur = *path.last().unwrap();
        let starving = inputs(cur)
            .into_iter()
            .find(|f| tokens[f] < graph.fifo(*f).rate)
            .expect("pending actor has a starving input");
        let prev = graph.fifo_src_actor(starving);
        if let Some(pos) = path.iter().position(|&a| a == prev) {
            let mut cycle: Vec<String> = path[pos..].iter().rev().map(|&a| graph.actor_name(a).to_string()).collect();
            cycle.push(cycle[0].clone());
            return DeadlockError {
                region: region.name.clone(),
                cycle,
                occupancies: tokens.iter().map(|(&f, &t)| (graph.fifo(f).name.clone(), t)).collect(),
            };
        }
        path.push(prev);
    }
}

/// Replays a schedule, returning per-FIFO maximum and final occupancy.
pub fn replay_schedule(graph: &Graph, schedule: &Schedule) -> (BTreeMap<FifoId, u32>, BTreeMap<FifoId, u32>) {
    let mut tokens: BTreeMap<FifoId, i64> = schedule.fifos.iter().map(|&f| (f, graph.fifo(f).delay as i64)).collect();
    let mut max: BTreeMap<FifoId, u32> = schedule.fifos.iter().map(|&f| (f, graph.fifo(f).delay)).collect();
    for &(a, count) in &schedule.firings {
        for _ in 0..count {
            for p in graph.ports_of(a, Direction::In) {
                let f = graph.input_fifo(p);
                if let Some(t) = tokens.get_mut(&f) {
                    *t -= graph.fifo(f).rate as i64;
                    assert!(*t >= 0, "schedule underflows {}", graph.fifo(f).name);
                }
            }
            for p in graph.ports_of(a, Direction::Out) {
                for &f in graph.port_fifos(p) {
                    if let Some(t) = tokens.get_mut(&f) {
                        *t += graph.fifo(f).rate as i64;
                        let m = max.get_mut(&f).unwrap();
                        *m = (*m).max(*t as u32);
                    }
                }
            }
        }
    }
    (max, tokens.into_iter().map(|(f, t)| (f, t as u32)).collect())
}

pub fn compute_bounds(graph: &Graph, schedules: &[Schedule]) -> BufferBounds {
    let mut bounds = BufferBounds::default();
    for s in schedules {
        let (max, _) = replay_schedule(graph, s);
        for (&f, &m) in &max {
            let b = bounds.beta.entry(f).or_insert(0);
            *b = (*b).max(m);
        }
        bounds.per_region.insert(s.region.clone(), max);
    }
    bounds
}

pub fn analyze(graph: &Graph) -> ConsistencyReport {
    let mut diagnostics: Vec<Diagnostic> = check_all(graph).into_iter().map(Diagnostic::Rule).collect();
    let mut dpgs = Vec::new();
    let mut regions = Vec::new();
    match identify_dpgs(graph) {
        Ok(found) => {
            for (i, dpg) in found.iter().enumerate() {
                let dpg = decompose_dcs(graph, dpg);
                for d in validate_dpg(graph, &dpg) {
                    diagnostics.push(Diagnostic::Invalid { dpg: i + 1, diagnostic: d });
                }
                for dc in &dpg.dcs {
                    regions.push(dc_region(graph, &dpg, dc));
                }
                dpgs.push(dpg);
            }
        }
        Err(e) => diagnostics.push(Diagnostic::Dpg(e)),
    }
    if dpgs.len() > 1 {
        for r in &mut regions {
            r.name = region_name(&dpgs, r);
        }
    }
    regions.push(static_region(graph));

    let mut schedules = Vec::new();
    for r in &regions {
        match compute_schedule(graph, r) {
            Ok(s) => schedules.push(s),
            Err(e) => diagnostics.push(Diagnostic::Deadlock(e)),
        }
    }
    let bounds = compute_bounds(graph, &schedules);
    let verdict = if diagnostics.is_empty() { Verdict::Consistent } else { Verdict::Inconsistent };
    ConsistencyReport { verdict, dpgs, schedules, bounds, diagnostics }
}

fn region_name(dpgs: &[Dpg], r: &Region) -> String {
    let idx = dpgs.iter().position(|d| r.actors.contains(&d.x) && r.actors.contains(&d.y)).unwrap_or(0);
    format!("D{}.{}", idx + 1, r.name)
}

impl ConsistencyReport {
    /// Diff-friendly text rendering with a fixed key order.
    pub fn render(&self, graph: &Graph) -> String {
        let mut s = String::new();
        let verdict = match self.verdict {
            Verdict::Consistent => "consistent",
            Verdict::Inconsistent => "inconsistent",
        };
        writeln!(s, "graph: {}", graph.name()).unwrap();
        writeln!(s, "verdict: {verdict}").unwrap();
        writeln!(s, "dpgs: {}", self.dpgs.len()).unwrap();
        for (i, d) in self.dpgs.iter().enumerate() {
            writeln!(
                s,
                "dpg {}: q={} x={} y={} control={} M={}",
                i + 1,
                graph.actor_name(d.q),
                graph.actor_name(d.x),
                graph.actor_name(d.y),
                graph.port_path(d.control_port),
                d.dcs.len()
            )
            .unwrap();
            for dc in &d.dcs {
                let paths = |ps: &[PortId]| ps.iter().map(|&p| graph.port_path(p)).collect::<Vec<_>>().join(", ");
                writeln!(
                    s,
                    "  Z{} = {{{}}} in=[{}] out=[{}]",
                    dc.id,
                    dc.member_names(graph).join(", "),
                    paths(&dc.in_drps),
                    paths(&dc.out_drps)
                )
                .unwrap();
            }
        }
        writeln!(s, "schedules:").unwrap();
        for sch in &self.schedules {
            let order: Vec<String> = sch
                .firings
                .iter()
                .map(|&(a, n)| if n == 1 { graph.actor_name(a).to_string() } else { format!("{}x{n}", graph.actor_name(a)) })
                .collect();
            writeln!(s, "  {}: {}", sch.region, order.join(" ")).unwrap();
        }
        writeln!(s, "bounds:").unwrap();
        for (&f, &b) in &self.bounds.beta {
            let fifo = graph.fifo(f);
            writeln!(s, "  {} rate={} delay={} beta={}", fifo.name, fifo.rate, fifo.delay, b).unwrap();
        }
        writeln!(s, "diagnostics: {}", self.diagnostics.len()).unwrap();
        for d in &self.diagnostics {
            writeln!(s, "  {d}").unwrap();
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builder::GraphBuilder;
    use crate::graph::build_graph;

    fn chain() -> Graph {
        let mut g = GraphBuilder::new("abc");
        g.source("a", 1).stat("b", &["i"], &["o"]).sink("c", 1);
        g.fifo("a.o", "b.i").fifo("b.o", "c.i");
        build_graph(&g.build()).unwrap()
    }

    fn names(g: &Graph, s: &Schedule) -> Vec<String> {
        s.firings.iter().map(|&(a, _)| g.actor_name(a).to_string()).collect()
    }

    #[test]
    fn chain_schedule_is_linear() {
        let g = chain();
        let s = compute_schedule(&g, &static_region(&g)).unwrap();
        assert_eq!(names(&g, &s), ["a", "b", "c"]);
        let b = compute_bounds(&g, &[s]);
        assert!(b.beta.values().all(|&v| v == 1));
    }

    fn two_cycle(rate: u32, delay: u32) -> Graph {
        let mut g = GraphBuilder::new("cycle");
        g.stat("a", &["i"], &["o"]).stat("b", &["i"], &["o"]);
        g.rate("a.i", rate).rate("a.o", rate).rate("b.i", rate).rate("b.o", rate);
        g.fifo("a.o", "b.i").fifo_delay("b.o", "a.i", delay);
        build_graph(&g.build()).unwrap()
    }

    #[test]
    fn zero_delay_cycle_deadlocks() {
        let g = two_cycle(1, 0);
        let e = compute_schedule(&g, &static_region(&g)).unwrap_err();
        assert_eq!(e.cycle.first(), e.cycle.last());
        let members: BTreeSet<&str> = e.cycle.iter().map(String::as_str).collect();
        assert_eq!(members, ["a", "b"].into_iter().collect());
    }

    #[test]
    fn delayed_cycle_schedules() {
        // Hand simulation: a has 2 tokens on its input, fires, b then fires.
        let g = two_cycle(2, 2);
        let s = compute_schedule(&g, &static_region(&g)).unwrap();
        assert_eq!(names(&g, &s), ["a", "b"]);
        let (_, end) = replay_schedule(&g, &s);
        assert!(g.fifo_ids().all(|f| end[&f] == g.fifo(f).delay));
    }

    #[test]
    fn write_before_read_bounds() {
        for (rate, delay, expected) in [(4, 1, 5), (4, 4, 8)] {
            let mut g = GraphBuilder::new("w");
            g.source("a", rate).sink("b", rate).fifo_delay("a.o", "b.i", delay);
            let g = build_graph(&g.build()).unwrap();
            let s = compute_schedule(&g, &static_region(&g)).unwrap();
            assert_eq!(compute_bounds(&g, &[s]).beta[&FifoId(0)], expected);
        }
    }

    #[test]
    fn direct_link_is_single_dummy_dc() {
        let mut g = GraphBuilder::new("direct");
        g.source("s", 1).configuration("q", &[("c", 1)]);
        g.dynamic("x", &[("i", "in")], &[("p", "out")]).dynamic("y", &[("o", "out")], &[("p", "in")]).sink("k", 1);
        g.fifo("s.o", "x.i").fifo("x.p", "y.p").fifo("y.o", "k.i").fifo("q.c", "x.ctl").fifo("q.c", "y.ctl");
        g.control("q.c", "x.p", 1).control("q.c", "y.p", 1);
        let g = build_graph(&g.build()).unwrap();
        let r = analyze(&g);
        assert!(r.is_consistent(), "{}", r.render(&g));
        assert_eq!(r.dpgs[0].dcs.len(), 1);
        assert_eq!(r.dpgs[0].dcs[0].member_names(&g), ["d"]);
        let z1 = r.schedules.iter().find(|s| s.region == "Z1").unwrap();
        assert_eq!(names(&g, z1), ["x", "y"]);
    }

    #[test]
    fn dead_end_dc_is_not_surjective() {
        let mut g = GraphBuilder::new("deadend");
        g.source("s", 1).configuration("q", &[("c", 2)]);
        g.dynamic("x", &[("i", "in")], &[("p1", "out"), ("p2", "out")]);
        g.dynamic("y", &[("o", "out")], &[("p1", "in")]);
        g.stat("a1", &["i"], &["o"]).stat("a2", &["i"], &["o"]).sink("k", 1).sink("k2", 1);
        g.fifo("s.o", "x.i").fifo("x.p1", "a1.i").fifo("a1.o", "y.p1").fifo("x.p2", "a2.i").fifo("a2.o", "k2.i");
        g.fifo("y.o", "k.i").fifo("q.c", "x.ctl").fifo("q.c", "y.ctl");
        g.control("q.c", "x.p1", 1).control("q.c", "y.p1", 1).control("q.c", "x.p2", 2);
        let g = build_graph(&g.build()).unwrap();
        let dpg = decompose_dcs(&g, &identify_dpgs(&g).unwrap()[0]);
        let diags = validate_dpg(&g, &dpg);
        assert!(diags.iter().any(|d| matches!(d, DpgDiagnostic::SurjectivityFailure { .. })), "{diags:?}");
    }

    #[test]
    fn static_graph_has_no_dpgs() {
        let g = chain();
        assert!(identify_dpgs(&g).unwrap().is_empty());
        let r = analyze(&g);
        assert!(r.is_consistent());
        assert_eq!(r.schedules.len(), 1);
    }

    #[test]
    fn lone_dynamic_actor_is_orphan() {
        let mut g = GraphBuilder::new("orphan");
        g.source("s", 1).configuration("q", &[("c", 1)]).dynamic("x", &[], &[("p", "in")]);
        g.fifo("s.o", "x.p").fifo("q.c", "x.ctl").control("q.c", "x.p", 1);
        let g = build_graph(&g.build()).unwrap();
        assert_eq!(identify_dpgs(&g), Err(DpgError::OrphanDynamicActor("x".into())));
    }
}

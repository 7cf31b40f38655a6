//! The five design rules that keep dynamic graphs analyzable.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::graph::{adjacency, ActorId, ActorKind, Adjacency, Direction, Graph, PortId, PortKind};

/// A sequence of pairwise adjacent actors.
pub type Chain = Vec<ActorId>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkedDrpPair {
    /// Output DRP of the upstream dynamic actor.
    pub px: PortId,
    /// Input DRP of the downstream dynamic actor.
    pub py: PortId,
    /// True when one FIFO joins `px` to `py`.
    pub direct: bool,
    pub subchains: Vec<Chain>,
}

impl LinkedDrpPair {
    pub fn parents(&self, graph: &Graph) -> (ActorId, ActorId) {
        (graph.port(self.px).actor, graph.port(self.py).actor)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub rule: u8,
    pub name: &'static str,
    pub subjects: Vec<String>,
    pub message: String,
}

pub const RULE_NAMES: [&str; 5] =
    ["linked port control", "balanced delay", "connecting subchain", "single-sided dynamism", "encapsulation"];

impl Violation {
    fn new(rule: u8, subjects: Vec<String>, message: String) -> Self {
        Violation { rule, name: RULE_NAMES[rule as usize - 1], subjects, message }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rule {} {}: [{}] {}", self.rule, self.name, self.subjects.join(", "), self.message)
    }
}

/// All simple paths from `from` to `to` that avoid `excluded`.
fn simple_paths(adj: &Adjacency, from: ActorId, to: ActorId, excluded: &[ActorId]) -> Vec<Chain> {
    fn walk(
        adj: &Adjacency,
        cur: ActorId,
        to: ActorId,
        excluded: &[ActorId],
        path: &mut Chain,
        out: &mut Vec<Chain>,
    ) {
        if cur == to {
            out.push(path.clone());
            return;
        }
        for &n in adj.neighbors(cur) {
            if excluded.contains(&n) || path.contains(&n) {
                continue;
            }
            path.push(n);
            walk(adj, n, to, excluded, path, out);
            path.pop();
        }
    }
    if excluded.contains(&from) || excluded.contains(&to) {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut path = vec![from];
    walk(adj, from, to, excluded, &mut path, &mut out);
    out
}

/// Enumerates linked DRP pairs, oriented from an output DRP to an input DRP
/// of a different actor, together with every connecting subchain.
pub fn find_linked_drps(graph: &Graph) -> Vec<LinkedDrpPair> {
    let adj = adjacency(graph);
    let drps: Vec<PortId> = graph.ports().filter(|(_, p)| p.kind == PortKind::Drp).map(|(id, _)| id).collect();
    let mut out = Vec::new();
    for &px in drps.iter().filter(|&&p| graph.port(p).direction == Direction::Out) {
        let x = graph.port(px).actor;
        for &py in drps.iter().filter(|&&p| graph.port(p).direction == Direction::In) {
            let y = graph.port(py).actor;
            if x == y {
                continue;
            }
            let fy = graph.input_fifo(py);
            let direct = graph.port_fifos(px).contains(&fy);
            let a_n = graph.fifo_src_actor(fy);
            let mut subchains = BTreeSet::new();
            for &fx in graph.port_fifos(px) {
                let a_1 = graph.fifo_dst_actor(fx);
                for path in simple_paths(&adj, a_1, a_n, &[x, y]) {
                    subchains.insert(path);
                }
            }
            if direct || !subchains.is_empty() {
                out.push(LinkedDrpPair { px, py, direct, subchains: subchains.into_iter().collect() });
            }
        }
    }
    out.sort_by(|a, b| (graph.port_path(a.px), graph.port_path(a.py)).cmp(&(graph.port_path(b.px), graph.port_path(b.py))));
    out
}

pub fn check_rule1_linked_port_control(graph: &Graph, pairs: &[LinkedDrpPair]) -> Vec<Violation> {
    let mut out = Vec::new();
    for pair in pairs {
        let (cx, cy) = (graph.control_lookup(pair.px), graph.control_lookup(pair.py));
        let ok = matches!((cx, cy), (Ok(a), Ok(b)) if a == b);
        if !ok {
            let describe = |r: Result<crate::graph::ControlRef, _>| match r {
                Ok(c) => format!("{}[{}]", graph.port_path(c.port), c.element),
                Err(_) => "uncontrolled".to_string(),
            };
            out.push(Violation::new(
                1,
                vec![graph.port_path(pair.px), graph.port_path(pair.py)],
                format!("linked DRPs controlled by {} and {}", describe(cx), describe(cy)),
            ));
        }
    }
    out
}

/// Every control output port must reach all of its control inputs with one delay.
pub fn check_rule2_balanced_delay(graph: &Graph) -> Vec<Violation> {
    let mut out = Vec::new();
    for (pid, port) in graph.ports() {
        if port.kind != PortKind::ControlOut {
            continue;
        }
        let fifos = graph.port_fifos(pid);
        let delays: BTreeSet<u32> = fifos.iter().map(|&f| graph.fifo(f).delay).collect();
        if delays.len() > 1 {
            let mut subjects = vec![graph.port_path(pid)];
            subjects.extend(fifos.iter().map(|&f| graph.port_path(graph.fifo(f).dst)));
            let detail: Vec<String> = fifos
                .iter()
                .map(|&f| format!("{}={}", graph.port_path(graph.fifo(f).dst), graph.fifo(f).delay))
                .collect();
            out.push(Violation::new(2, subjects, format!("unequal control delays {}", detail.join(", "))));
        }
    }
    out
}

pub fn check_rule3_connecting_subchain(graph: &Graph, pairs: &[LinkedDrpPair]) -> Vec<Violation> {
    let mut owners: BTreeMap<ActorId, BTreeSet<(ActorId, ActorId)>> = BTreeMap::new();
    for pair in pairs {
        let (x, y) = pair.parents(graph);
        let key = if x < y { (x, y) } else { (y, x) };
        for chain in &pair.subchains {
            for &a in chain {
                owners.entry(a).or_default().insert(key);
            }
        }
    }
    let mut out = Vec::new();
    for (&a, parents) in &owners {
        let actor = graph.actor(a);
        if actor.kind != ActorKind::Static {
            out.push(Violation::new(
                3,
                vec![actor.name.clone()],
                format!("subchain member is a {} actor, not a static processing actor", actor.kind),
            ));
        }
        if parents.len() > 1 {
            let names: Vec<String> = parents
                .iter()
                .map(|&(p, q)| format!("{{{}, {}}}", graph.actor_name(p), graph.actor_name(q)))
                .collect();
            out.push(Violation::new(
                3,
                vec![actor.name.clone()],
                format!("actor lies on subchains of several dynamic pairs: {}", names.join(", ")),
            ));
        }
    }
    out
}

pub fn check_rule4_single_sided(graph: &Graph) -> Vec<Violation> {
    let mut out = Vec::new();
    for (aid, actor) in graph.actors() {
        if actor.kind != ActorKind::Dynamic {
            continue;
        }
        let drps = graph.drps(aid);
        let has_in = drps.iter().any(|&p| graph.port(p).direction == Direction::In);
        let has_out = drps.iter().any(|&p| graph.port(p).direction == Direction::Out);
        if has_in && has_out {
            out.push(Violation::new(4, vec![actor.name.clone()], "dynamic actor has both input and output DRPs".into()));
        }
    }
    out
}

pub fn check_rule5_encapsulation(graph: &Graph, pairs: &[LinkedDrpPair]) -> Vec<Violation> {
    let adj = adjacency(graph);
    let mut on_chain_cache: BTreeMap<(ActorId, ActorId), BTreeSet<ActorId>> = BTreeMap::new();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for pair in pairs {
        let (x, y) = pair.parents(graph);
        let on_chain = on_chain_cache
            .entry((x, y))
            .or_insert_with(|| simple_paths(&adj, x, y, &[]).into_iter().flatten().collect());
        for chain in &pair.subchains {
            for &a in chain {
                for f in graph.fifos_of_actor(a) {
                    let fifo = graph.fifo(f);
                    // The endpoint of `f` that is not on `a`.
                    let b_port = if graph.port(fifo.src).actor == a { fifo.dst } else { fifo.src };
                    let b = graph.port(b_port).actor;
                    if b == a || chain.contains(&b) || graph.port(b_port).kind != PortKind::Srp {
                        continue;
                    }
                    if b == x || b == y || on_chain.contains(&b) {
                        continue;
                    }
                    if seen.insert((b, a)) {
                        out.push(Violation::new(
                            5,
                            vec![graph.actor_name(b).to_string(), graph.actor_name(a).to_string()],
                            format!(
                                "actor is adjacent to subchain member but on no chain connecting {} and {}",
                                graph.actor_name(x),
                                graph.actor_name(y)
                            ),
                        ));
                    }
                }
            }
        }
    }
    out
}

/// Runs all five checks; ordered by rule number, then subjects.
pub fn check_all(graph: &Graph) -> Vec<Violation> {
    let pairs = find_linked_drps(graph);
    let mut out = check_rule1_linked_port_control(graph, &pairs);
    out.extend(check_rule2_balanced_delay(graph));
    out.extend(check_rule3_connecting_subchain(graph, &pairs));
    out.extend(check_rule4_single_sided(graph));
    out.extend(check_rule5_encapsulation(graph, &pairs));
    out.sort_by(|a, b| (a.rule, &a.subjects, &a.message).cmp(&(b.rule, &b.subjects, &b.message)));
    out
}

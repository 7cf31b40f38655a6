//! Graph data model: actors, ports, FIFOs and the control table.
//!
//! A [`Graph`] is only ever produced by [`build_graph`], which checks every
//! structural invariant of the model (port shapes per actor kind, the
//! symmetric-rate restriction, control wiring and the control table). Once
//! built it is immutable and can be shared freely between threads.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::description::{ActorDesc, ControlEntryDesc, FifoDesc, GraphDescription, PortDesc};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActorId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PortId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FifoId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActorKind {
    /// Static processing actor: every port is an SRP.
    Static,
    /// One control input, at least one DRP.
    Dynamic,
    /// Owns control output ports.
    Configuration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    In,
    Out,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PortKind {
    Srp,
    Drp,
    ControlIn,
    ControlOut,
}

impl PortKind {
    pub fn is_data(self) -> bool {
        matches!(self, PortKind::Srp | PortKind::Drp)
    }

    pub fn is_control(self) -> bool {
        !self.is_data()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Actor {
    pub name: String,
    pub kind: ActorKind,
    pub behavior: String,
    pub params: BTreeMap<String, Value>,
    pub ports: Vec<PortId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Port {
    pub name: String,
    pub actor: ActorId,
    pub direction: Direction,
    pub kind: PortKind,
    /// Active token rate.
    pub atr: u32,
    /// Declared control-value length; only set on control output ports.
    pub control_len: Option<usize>,
}

impl Port {
    /// Inactive token rate: zero for DRPs, the fixed rate otherwise.
    pub fn itr(&self) -> u32 {
        if self.kind == PortKind::Drp {
            0
        } else {
            self.atr
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fifo {
    pub name: String,
    pub src: PortId,
    pub dst: PortId,
    pub rate: u32,
    pub delay: u32,
    pub token_bytes: usize,
    /// Explicit delay token contents, `delay * token_bytes` bytes.
    pub delay_payload: Option<Vec<u8>>,
}

impl Fifo {
    /// Initial token bytes; zero-filled when no payload was given.
    pub fn initial_tokens(&self) -> Vec<u8> {
        match &self.delay_payload {
            Some(p) => p.clone(),
            None => vec![0; self.delay as usize * self.token_bytes],
        }
    }
}

/// Reference from a DRP to the control output port that steers it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ControlRef {
    pub port: PortId,
    /// 1-based index into the control value.
    pub element: u32,
}

/// Matrix `T[control output port][DRP]` of control-value element indices.
/// Zero means "not controlled by this port".
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ControlTable {
    rows: Vec<PortId>,
    cols: Vec<PortId>,
    entries: Vec<Vec<u32>>,
}

impl ControlTable {
    pub fn new(rows: Vec<PortId>, cols: Vec<PortId>) -> Self {
        let entries = vec![vec![0; cols.len()]; rows.len()];
        ControlTable { rows, cols, entries }
    }

    pub fn rows(&self) -> &[PortId] {
        &self.rows
    }

    pub fn cols(&self) -> &[PortId] {
        &self.cols
    }

    fn row_index(&self, port: PortId) -> Option<usize> {
        self.rows.iter().position(|&p| p == port)
    }

    fn col_index(&self, port: PortId) -> Option<usize> {
        self.cols.iter().position(|&p| p == port)
    }

    pub fn entry(&self, control: PortId, drp: PortId) -> u32 {
        match (self.row_index(control), self.col_index(drp)) {
            (Some(r), Some(c)) => self.entries[r][c],
            _ => 0,
        }
    }

    pub fn set(&mut self, control: PortId, drp: PortId, element: u32) -> bool {
        match (self.row_index(control), self.col_index(drp)) {
            (Some(r), Some(c)) => {
                self.entries[r][c] = element;
                true
            }
            _ => false,
        }
    }

    /// Finds the unique controlling port and element index for `drp`.
    pub fn lookup(&self, drp: PortId) -> Result<ControlRef, ControlLookupError> {
        let c = self.col_index(drp).ok_or(ControlLookupError::NotDrp(drp))?;
        let mut found = None;
        for (r, row) in self.entries.iter().enumerate() {
            if row[c] != 0 {
                if found.is_some() {
                    return Err(ControlLookupError::MultipleControllers(drp));
                }
                found = Some(ControlRef { port: self.rows[r], element: row[c] });
            }
        }
        found.ok_or(ControlLookupError::Uncontrolled(drp))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ControlLookupError {
    #[error("port {0:?} is not a DRP column of the control table")]
    NotDrp(PortId),
    #[error("DRP {0:?} is not controlled by any control port")]
    Uncontrolled(PortId),
    #[error("DRP {0:?} has more than one controlling entry")]
    MultipleControllers(PortId),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("unknown reference `{0}`")]
    UnknownReference(String),
    #[error("port `{0}` is not connected to any FIFO")]
    DanglingPort(String),
    #[error("input port `{port}` is the sink of {count} FIFOs")]
    InputFanIn { port: String, count: usize },
    #[error("rate mismatch: port `{port}` has atr {atr} but FIFO `{fifo}` has rate {rate}")]
    RateMismatch { port: String, atr: u32, fifo: String, rate: u32 },
    #[error("actor `{actor}`: {reason}")]
    BadActorShape { actor: String, reason: String },
    #[error("FIFO `{fifo}`: {reason}")]
    BadConnection { fifo: String, reason: String },
    #[error("invalid `{field}`: {reason}")]
    InvalidValue { field: String, reason: String },
    #[error("control table: {0}")]
    BadControlEntry(String),
    #[error("DRP `{0}` is not controlled by any control port")]
    Uncontrolled(String),
    #[error("DRP `{0}` has more than one controlling entry")]
    MultipleControllers(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    name: String,
    actors: Vec<Actor>,
    ports: Vec<Port>,
    fifos: Vec<Fifo>,
    control_table: ControlTable,
    port_fifos: Vec<Vec<FifoId>>,
}

impl Graph {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn actors(&self) -> impl ExactSizeIterator<Item = (ActorId, &Actor)> + '_ {
        self.actors.iter().enumerate().map(|(i, a)| (ActorId(i), a))
    }

    pub fn actor_ids(&self) -> impl ExactSizeIterator<Item = ActorId> {
        (0..self.actors.len()).map(ActorId)
    }

    pub fn fifos(&self) -> impl ExactSizeIterator<Item = (FifoId, &Fifo)> + '_ {
        self.fifos.iter().enumerate().map(|(i, f)| (FifoId(i), f))
    }

    pub fn fifo_ids(&self) -> impl ExactSizeIterator<Item = FifoId> {
        (0..self.fifos.len()).map(FifoId)
    }

    pub fn ports(&self) -> impl ExactSizeIterator<Item = (PortId, &Port)> + '_ {
        self.ports.iter().enumerate().map(|(i, p)| (PortId(i), p))
    }

    pub fn num_actors(&self) -> usize {
        self.actors.len()
    }

    pub fn num_fifos(&self) -> usize {
        self.fifos.len()
    }

    pub fn actor(&self, id: ActorId) -> &Actor {
        &self.actors[id.0]
    }

    pub fn port(&self, id: PortId) -> &Port {
        &self.ports[id.0]
    }

    pub fn fifo(&self, id: FifoId) -> &Fifo {
        &self.fifos[id.0]
    }

    pub fn control_table(&self) -> &ControlTable {
        &self.control_table
    }

    pub fn actor_by_name(&self, name: &str) -> Option<ActorId> {
        self.actors.iter().position(|a| a.name == name).map(ActorId)
    }

    pub fn fifo_by_name(&self, name: &str) -> Option<FifoId> {
        self.fifos.iter().position(|f| f.name == name).map(FifoId)
    }

    /// Resolves `actor.port`.
    pub fn port_by_path(&self, path: &str) -> Option<PortId> {
        let (actor, port) = path.split_once('.')?;
        let a = self.actor_by_name(actor)?;
        self.actor(a).ports.iter().copied().find(|&p| self.port(p).name == port)
    }

    /// `actor.port` display name.
    pub fn port_path(&self, id: PortId) -> String {
        let p = self.port(id);
        format!("{}.{}", self.actor(p.actor).name, p.name)
    }

    pub fn actor_name(&self, id: ActorId) -> &str {
        &self.actor(id).name
    }

    /// FIFOs attached to a port. Input ports have exactly one; output ports
    /// have one per broadcast reader.
    pub fn port_fifos(&self, port: PortId) -> &[FifoId] {
        &self.port_fifos[port.0]
    }

    pub fn input_fifo(&self, port: PortId) -> FifoId {
        self.port_fifos[port.0][0]
    }

    pub fn ports_of(&self, actor: ActorId, direction: Direction) -> impl Iterator<Item = PortId> + '_ {
        self.actor(actor)
            .ports
            .iter()
            .copied()
            .filter(move |&p| self.port(p).direction == direction)
    }

    /// Data input ports (SRP and DRP), in declaration order.
    pub fn data_inputs(&self, actor: ActorId) -> Vec<PortId> {
        self.ports_of(actor, Direction::In).filter(|&p| self.port(p).kind.is_data()).collect()
    }

    /// Output ports written by `fire` (data and control outputs).
    pub fn outputs(&self, actor: ActorId) -> Vec<PortId> {
        self.ports_of(actor, Direction::Out).collect()
    }

    pub fn cport(&self, actor: ActorId) -> Option<PortId> {
        self.actor(actor).ports.iter().copied().find(|&p| self.port(p).kind == PortKind::ControlIn)
    }

    pub fn drps(&self, actor: ActorId) -> Vec<PortId> {
        self.actor(actor).ports.iter().copied().filter(|&p| self.port(p).kind == PortKind::Drp).collect()
    }

    pub fn is_source(&self, actor: ActorId) -> bool {
        self.ports_of(actor, Direction::In).next().is_none()
    }

    pub fn is_sink(&self, actor: ActorId) -> bool {
        self.ports_of(actor, Direction::Out).next().is_none()
    }

    pub fn fifo_src_actor(&self, f: FifoId) -> ActorId {
        self.port(self.fifo(f).src).actor
    }

    pub fn fifo_dst_actor(&self, f: FifoId) -> ActorId {
        self.port(self.fifo(f).dst).actor
    }

    /// FIFOs with an endpoint on `actor`.
    pub fn fifos_of_actor(&self, actor: ActorId) -> Vec<FifoId> {
        let mut out: Vec<FifoId> = self
            .actor(actor)
            .ports
            .iter()
            .flat_map(|&p| self.port_fifos[p.0].iter().copied())
            .collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn control_lookup(&self, drp: PortId) -> Result<ControlRef, ControlLookupError> {
        self.control_table.lookup(drp)
    }

    /// Serializes back to the external description.
    pub fn to_description(&self) -> GraphDescription {
        let actors = self
            .actors
            .iter()
            .map(|a| ActorDesc {
                id: a.name.clone(),
                kind: a.kind,
                behavior: Some(a.behavior.clone()),
                params: a.params.clone(),
                ports: a
                    .ports
                    .iter()
                    .map(|&p| {
                        let port = self.port(p);
                        PortDesc {
                            id: port.name.clone(),
                            dir: port.direction,
                            kind: port.kind,
                            rate: port.atr,
                            control_len: port.control_len,
                        }
                    })
                    .collect(),
            })
            .collect();
        let fifos = self
            .fifos
            .iter()
            .map(|f| FifoDesc {
                id: f.name.clone(),
                src: self.port_path(f.src),
                dst: self.port_path(f.dst),
                rate: f.rate,
                delay: f.delay,
                token_bytes: f.token_bytes,
                delay_payload_hex: f.delay_payload.as_ref().map(hex::encode),
                delay_payload_file: None,
            })
            .collect();
        let mut control_table = Vec::new();
        for &row in self.control_table.rows() {
            for &col in self.control_table.cols() {
                let e = self.control_table.entry(row, col);
                if e != 0 {
                    control_table.push(ControlEntryDesc {
                        control: self.port_path(row),
                        drp: self.port_path(col),
                        element: e,
                    });
                }
            }
        }
        GraphDescription { name: self.name.clone(), actors, fifos, control_table }
    }
}

impl fmt::Display for ActorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ActorKind::Static => "static",
            ActorKind::Dynamic => "dynamic",
            ActorKind::Configuration => "configuration",
        })
    }
}

/// Builds and validates a graph from its description.
pub fn build_graph(desc: &GraphDescription) -> Result<Graph, GraphError> {
    let mut actors = Vec::with_capacity(desc.actors.len());
    let mut ports = Vec::new();
    let mut actor_index: HashMap<&str, ActorId> = HashMap::new();
    let mut port_index: HashMap<String, PortId> = HashMap::new();

    for ad in &desc.actors {
        if ad.id.is_empty() || ad.id.contains('.') {
            return Err(GraphError::InvalidValue {
                field: format!("actors[{}].id", ad.id),
                reason: "must be non-empty and must not contain '.'".into(),
            });
        }
        let aid = ActorId(actors.len());
        if actor_index.insert(ad.id.as_str(), aid).is_some() {
            return Err(GraphError::DuplicateId(ad.id.clone()));
        }
        let mut actor_ports = Vec::with_capacity(ad.ports.len());
        for pd in &ad.ports {
            let path = format!("{}.{}", ad.id, pd.id);
            if pd.id.is_empty() {
                return Err(GraphError::InvalidValue { field: path, reason: "empty port id".into() });
            }
            if pd.rate == 0 {
                return Err(GraphError::InvalidValue { field: path, reason: "rate must be positive".into() });
            }
            let expected_dir = match pd.kind {
                PortKind::ControlIn => Some(Direction::In),
                PortKind::ControlOut => Some(Direction::Out),
                _ => None,
            };
            if let Some(d) = expected_dir {
                if d != pd.dir {
                    return Err(GraphError::InvalidValue {
                        field: path,
                        reason: format!("{:?} port must have direction {:?}", pd.kind, d),
                    });
                }
                if pd.rate != 1 {
                    return Err(GraphError::InvalidValue {
                        field: path,
                        reason: "control ports have rate 1".into(),
                    });
                }
            }
            match (pd.kind, pd.control_len) {
                (PortKind::ControlOut, None) | (PortKind::ControlOut, Some(0)) => {
                    return Err(GraphError::InvalidValue {
                        field: path,
                        reason: "control output ports need a positive control_len".into(),
                    })
                }
                (PortKind::ControlOut, Some(_)) | (_, None) => {}
                (_, Some(_)) => {
                    return Err(GraphError::InvalidValue {
                        field: path,
                        reason: "control_len is only valid on control output ports".into(),
                    })
                }
            }
            let pid = PortId(ports.len());
            if port_index.insert(path.clone(), pid).is_some() {
                return Err(GraphError::DuplicateId(path));
            }
            ports.push(Port {
                name: pd.id.clone(),
                actor: aid,
                direction: pd.dir,
                kind: pd.kind,
                atr: pd.rate,
                control_len: pd.control_len,
            });
            actor_ports.push(pid);
        }
        actors.push(Actor {
            name: ad.id.clone(),
            kind: ad.kind,
            behavior: ad.behavior.clone().unwrap_or_default(),
            params: ad.params.clone(),
            ports: actor_ports,
        });
    }

    for a in &actors {
        check_actor_shape(a, &ports)?;
    }

    let mut fifos = Vec::with_capacity(desc.fifos.len());
    let mut fifo_names = BTreeSet::new();
    let mut port_fifos: Vec<Vec<FifoId>> = vec![Vec::new(); ports.len()];
    for fd in &desc.fifos {
        if !fifo_names.insert(fd.id.as_str()) {
            return Err(GraphError::DuplicateId(fd.id.clone()));
        }
        let src = *port_index.get(&fd.src).ok_or_else(|| GraphError::UnknownReference(fd.src.clone()))?;
        let dst = *port_index.get(&fd.dst).ok_or_else(|| GraphError::UnknownReference(fd.dst.clone()))?;
        let bad = |reason: &str| GraphError::BadConnection { fifo: fd.id.clone(), reason: reason.into() };
        if ports[src.0].direction != Direction::Out {
            return Err(bad("source port is not an output port"));
        }
        if ports[dst.0].direction != Direction::In {
            return Err(bad("sink port is not an input port"));
        }
        match (ports[src.0].kind, ports[dst.0].kind) {
            (PortKind::ControlOut, PortKind::ControlIn) => {}
            (PortKind::ControlOut, _) => return Err(bad("control output must feed a control input")),
            (_, PortKind::ControlIn) => return Err(bad("control input must be fed by a control output")),
            _ => {}
        }
        if fd.rate == 0 {
            return Err(GraphError::InvalidValue { field: format!("{}.rate", fd.id), reason: "must be positive".into() });
        }
        if fd.token_bytes == 0 {
            return Err(GraphError::InvalidValue {
                field: format!("{}.token_bytes", fd.id),
                reason: "must be positive".into(),
            });
        }
        for &p in &[src, dst] {
            if ports[p.0].atr != fd.rate {
                return Err(GraphError::RateMismatch {
                    port: path_of(&actors, &ports, p),
                    atr: ports[p.0].atr,
                    fifo: fd.id.clone(),
                    rate: fd.rate,
                });
            }
        }
        if let Some(len) = ports[src.0].control_len {
            if fd.token_bytes < len {
                return Err(GraphError::InvalidValue {
                    field: format!("{}.token_bytes", fd.id),
                    reason: format!("control FIFO needs at least {len} bytes per token"),
                });
            }
        }
        let payload = match &fd.delay_payload_hex {
            Some(h) => {
                let bytes = hex::decode(h).map_err(|e| GraphError::InvalidValue {
                    field: format!("{}.delay_payload_hex", fd.id),
                    reason: e.to_string(),
                })?;
                if bytes.len() != fd.delay as usize * fd.token_bytes {
                    return Err(GraphError::InvalidValue {
                        field: format!("{}.delay_payload_hex", fd.id),
                        reason: format!(
                            "expected {} tokens of {} bytes, got {} bytes",
                            fd.delay,
                            fd.token_bytes,
                            bytes.len()
                        ),
                    });
                }
                Some(bytes)
            }
            None => None,
        };
        if fd.delay_payload_file.is_some() {
            return Err(GraphError::InvalidValue {
                field: format!("{}.delay_payload_file", fd.id),
                reason: "payload files must be resolved before building".into(),
            });
        }
        let fid = FifoId(fifos.len());
        port_fifos[src.0].push(fid);
        port_fifos[dst.0].push(fid);
        fifos.push(Fifo {
            name: fd.id.clone(),
            src,
            dst,
            rate: fd.rate,
            delay: fd.delay,
            token_bytes: fd.token_bytes,
            delay_payload: payload,
        });
    }

    for (i, p) in ports.iter().enumerate() {
        let n = port_fifos[i].len();
        match p.direction {
            Direction::In if n > 1 => {
                return Err(GraphError::InputFanIn { port: path_of(&actors, &ports, PortId(i)), count: n })
            }
            _ if n == 0 => return Err(GraphError::DanglingPort(path_of(&actors, &ports, PortId(i)))),
            Direction::Out if n > 1 => {
                let w = fifos[port_fifos[i][0].0].token_bytes;
                if port_fifos[i].iter().any(|f| fifos[f.0].token_bytes != w) {
                    return Err(GraphError::InvalidValue {
                        field: path_of(&actors, &ports, PortId(i)),
                        reason: "broadcast FIFOs must share one token width".into(),
                    });
                }
            }
            _ => {}
        }
    }

    let control_table = build_control_table(desc, &actors, &ports, &fifos, &port_fifos, &port_index)?;

    Ok(Graph { name: desc.name.clone(), actors, ports, fifos, control_table, port_fifos })
}

fn path_of(actors: &[Actor], ports: &[Port], p: PortId) -> String {
    format!("{}.{}", actors[ports[p.0].actor.0].name, ports[p.0].name)
}

fn check_actor_shape(a: &Actor, ports: &[Port]) -> Result<(), GraphError> {
    let count = |k: PortKind| a.ports.iter().filter(|p| ports[p.0].kind == k).count();
    let bad = |reason: &str| Err(GraphError::BadActorShape { actor: a.name.clone(), reason: reason.into() });
    let (srp, drp, cin, cout) =
        (count(PortKind::Srp), count(PortKind::Drp), count(PortKind::ControlIn), count(PortKind::ControlOut));
    let _ = srp;
    match a.kind {
        ActorKind::Static => {
            if drp + cin + cout > 0 {
                return bad("static processing actors may only have SRPs");
            }
        }
        ActorKind::Dynamic => {
            if cin != 1 {
                return bad("dynamic actors need exactly one control input port");
            }
            if drp == 0 {
                return bad("dynamic actors need at least one DRP");
            }
            if cout > 0 {
                return bad("dynamic actors may not own control output ports");
            }
        }
        ActorKind::Configuration => {
            if cout == 0 {
                return bad("configuration actors need at least one control output port");
            }
            if drp + cin > 0 {
                return bad("configuration actors may only have SRP data ports besides control outputs");
            }
        }
    }
    Ok(())
}

fn build_control_table(
    desc: &GraphDescription,
    actors: &[Actor],
    ports: &[Port],
    fifos: &[Fifo],
    port_fifos: &[Vec<FifoId>],
    port_index: &HashMap<String, PortId>,
) -> Result<ControlTable, GraphError> {
    let rows: Vec<PortId> =
        (0..ports.len()).map(PortId).filter(|p| ports[p.0].kind == PortKind::ControlOut).collect();
    let cols: Vec<PortId> = (0..ports.len()).map(PortId).filter(|p| ports[p.0].kind == PortKind::Drp).collect();
    let mut table = ControlTable::new(rows, cols);

    for e in &desc.control_table {
        let control =
            *port_index.get(&e.control).ok_or_else(|| GraphError::UnknownReference(e.control.clone()))?;
        let drp = *port_index.get(&e.drp).ok_or_else(|| GraphError::UnknownReference(e.drp.clone()))?;
        if ports[control.0].kind != PortKind::ControlOut {
            return Err(GraphError::BadControlEntry(format!("`{}` is not a control output port", e.control)));
        }
        if ports[drp.0].kind != PortKind::Drp {
            return Err(GraphError::BadControlEntry(format!("`{}` is not a DRP", e.drp)));
        }
        let len = ports[control.0].control_len.unwrap_or(0);
        if e.element == 0 || e.element as usize > len {
            return Err(GraphError::BadControlEntry(format!(
                "element {} for `{}` outside 1..={} of `{}`",
                e.element, e.drp, len, e.control
            )));
        }
        // The control port must actually feed the DRP owner's control input.
        let owner = ports[drp.0].actor;
        let wired = port_fifos[control.0].iter().any(|f| ports[fifos[f.0].dst.0].actor == owner);
        if !wired {
            return Err(GraphError::BadControlEntry(format!(
                "`{}` is not connected to the control input of `{}`",
                e.control, actors[owner.0].name
            )));
        }
        if table.entry(control, drp) != 0 {
            return Err(GraphError::MultipleControllers(e.drp.clone()));
        }
        table.set(control, drp, e.element);
    }

    for &drp in table.cols() {
        match table.lookup(drp) {
            Ok(_) => {}
            Err(ControlLookupError::Uncontrolled(_)) => {
                return Err(GraphError::Uncontrolled(path_of(actors, ports, drp)))
            }
            Err(_) => return Err(GraphError::MultipleControllers(path_of(actors, ports, drp))),
        }
    }
    Ok(table)
}

/// Symmetric, irreflexive actor adjacency: `a ~ b` iff a FIFO joins them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Adjacency {
    neighbors: Vec<BTreeSet<ActorId>>,
}

impl Adjacency {
    pub fn neighbors(&self, a: ActorId) -> &BTreeSet<ActorId> {
        &self.neighbors[a.0]
    }

    pub fn adjacent(&self, a: ActorId, b: ActorId) -> bool {
        self.neighbors[a.0].contains(&b)
    }

    /// Unordered pairs `(a, b)` with `a < b`.
    pub fn pairs(&self) -> Vec<(ActorId, ActorId)> {
        let mut out = Vec::new();
        for (i, ns) in self.neighbors.iter().enumerate() {
            for &b in ns.range(ActorId(i + 1)..) {
                out.push((ActorId(i), b));
            }
        }
        out
    }
}

pub fn adjacency(graph: &Graph) -> Adjacency {
    let mut neighbors = vec![BTreeSet::new(); graph.num_actors()];
    for f in graph.fifo_ids() {
        let (a, b) = (graph.fifo_src_actor(f), graph.fifo_dst_actor(f));
        if a != b {
            neighbors[a.0].insert(b);
            neighbors[b.0].insert(a);
        }
    }
    Adjacency { neighbors }
}

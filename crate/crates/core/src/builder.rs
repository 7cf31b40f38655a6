//! Programmatic construction of graph descriptions.
//!
//! Data ports default to rate 1, data FIFOs to 4-byte tokens. Dynamic actors
//! get a control input named `ctl`.

use serde_json::Value;

use crate::description::{ActorDesc, ControlEntryDesc, FifoDesc, GraphDescription, PortDesc};
use crate::graph::{ActorKind, Direction, PortKind};

#[derive(Debug, Clone)]
pub struct GraphBuilder {
    desc: GraphDescription,
    token_bytes: usize,
}

fn dir(s: &str) -> Direction {
    match s {
        "in" => Direction::In,
        "out" => Direction::Out,
        other => panic!("bad direction `{other}`"),
    }
}

fn port(id: &str, d: Direction, kind: PortKind) -> PortDesc {
    PortDesc { id: id.into(), dir: d, kind, rate: 1, control_len: None }
}

impl GraphBuilder {
    pub fn new(name: &str) -> Self {
        GraphBuilder {
            desc: GraphDescription { name: name.into(), actors: vec![], fifos: vec![], control_table: vec![] },
            token_bytes: 4,
        }
    }

    /// Token width used for data FIFOs added after this call.
    pub fn token_bytes(&mut self, bytes: usize) -> &mut Self {
        self.token_bytes = bytes;
        self
    }

    fn push(&mut self, id: &str, kind: ActorKind, behavior: &str, ports: Vec<PortDesc>) -> &mut Self {
        self.desc.actors.push(ActorDesc {
            id: id.into(),
            kind,
            behavior: Some(behavior.into()),
            params: Default::default(),
            ports,
        });
        self
    }

    /// Static actor with a single output port `o`.
    pub fn source(&mut self, id: &str, rate: u32) -> &mut Self {
        let mut p = port("o", Direction::Out, PortKind::Srp);
        p.rate = rate;
        self.push(id, ActorKind::Static, "source", vec![p])
    }

    /// Static actor with a single input port `i`.
    pub fn sink(&mut self, id: &str, rate: u32) -> &mut Self {
        let mut p = port("i", Direction::In, PortKind::Srp);
        p.rate = rate;
        self.push(id, ActorKind::Static, "sink", vec![p])
    }

    pub fn stat(&mut self, id: &str, ins: &[&str], outs: &[&str]) -> &mut Self {
        let ports = ins
            .iter()
            .map(|p| port(p, Direction::In, PortKind::Srp))
            .chain(outs.iter().map(|p| port(p, Direction::Out, PortKind::Srp)))
            .collect();
        self.push(id, ActorKind::Static, "passthrough", ports)
    }

    /// Configuration actor with control outputs `(port, control_len)`.
    pub fn configuration(&mut self, id: &str, controls: &[(&str, usize)]) -> &mut Self {
        self.configuration_with_inputs(id, &[], &[], controls)
    }

    pub fn configuration_with_inputs(
        &mut self,
        id: &str,
        ins: &[&str],
        outs: &[&str],
        controls: &[(&str, usize)],
    ) -> &mut Self {
        let mut ports: Vec<PortDesc> = ins
            .iter()
            .map(|p| port(p, Direction::In, PortKind::Srp))
            .chain(outs.iter().map(|p| port(p, Direction::Out, PortKind::Srp)))
            .collect();
        for (c, len) in controls {
            let mut p = port(c, Direction::Out, PortKind::ControlOut);
            p.control_len = Some(*len);
            ports.push(p);
        }
        self.push(id, ActorKind::Configuration, "control", ports)
    }

    /// Dynamic actor with SRPs and DRPs given as `(port, "in" | "out")`.
    pub fn dynamic(&mut self, id: &str, srps: &[(&str, &str)], drps: &[(&str, &str)]) -> &mut Self {
        let mut ports = vec![port("ctl", Direction::In, PortKind::ControlIn)];
        ports.extend(srps.iter().map(|(p, d)| port(p, dir(d), PortKind::Srp)));
        ports.extend(drps.iter().map(|(p, d)| port(p, dir(d), PortKind::Drp)));
        self.push(id, ActorKind::Dynamic, "passthrough", ports)
    }

    fn find_port(&mut self, path: &str) -> &mut PortDesc {
        let (a, p) = path.split_once('.').expect("actor.port");
        self.desc
            .actors
            .iter_mut()
            .find(|x| x.id == a)
            .and_then(|x| x.ports.iter_mut().find(|q| q.id == p))
            .unwrap_or_else(|| panic!("no port `{path}`"))
    }

    pub fn rate(&mut self, path: &str, rate: u32) -> &mut Self {
        self.find_port(path).rate = rate;
        self
    }

    pub fn behavior(&mut self, actor: &str, behavior: &str) -> &mut Self {
        self.actor_mut(actor).behavior = Some(behavior.into());
        self
    }

    pub fn param(&mut self, actor: &str, key: &str, value: Value) -> &mut Self {
        self.actor_mut(actor).params.insert(key.into(), value);
        self
    }

    fn actor_mut(&mut self, id: &str) -> &mut ActorDesc {
        self.desc.actors.iter_mut().find(|x| x.id == id).unwrap_or_else(|| panic!("no actor `{id}`"))
    }

    /// FIFO named `src->dst`, rate taken from the source port.
    pub fn fifo(&mut self, src: &str, dst: &str) -> &mut Self {
        self.fifo_delay(src, dst, 0)
    }

    pub fn fifo_delay(&mut self, src: &str, dst: &str, delay: u32) -> &mut Self {
        let sp = self.find_port(src).clone();
        let token_bytes = match sp.control_len {
            Some(len) => len,
            None => self.token_bytes,
        };
        self.desc.fifos.push(FifoDesc {
            id: format!("{src}->{dst}"),
            src: src.into(),
            dst: dst.into(),
            rate: sp.rate,
            delay,
            token_bytes,
            delay_payload_hex: None,
            delay_payload_file: None,
        });
        self
    }

    /// Sets the delay payload of the most recently added FIFO.
    pub fn payload(&mut self, bytes: &[u8]) -> &mut Self {
        let f = self.desc.fifos.last_mut().expect("no FIFO yet");
        f.delay_payload_hex = Some(hex::encode(bytes));
        self
    }

    pub fn control(&mut self, control: &str, drp: &str, element: u32) -> &mut Self {
        self.desc.control_table.push(ControlEntryDesc { control: control.into(), drp: drp.into(), element });
        self
    }

    pub fn build(&self) -> GraphDescription {
        self.desc.clone()
    }
}

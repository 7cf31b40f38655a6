//! Actor behaviors and the registry that builds them from graph descriptions.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::graph::{ActorId, Graph};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{0}")]
pub struct BehaviorError(pub String);

impl BehaviorError {
    pub fn new(msg: impl Into<String>) -> Self {
        BehaviorError(msg.into())
    }
}

/// Control value: one Boolean per dynamic component.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ControlToken {
    pub bits: Vec<bool>,
}

impl ControlToken {
    pub fn new(bits: Vec<bool>) -> Self {
        ControlToken { bits }
    }

    pub fn all(len: usize, value: bool) -> Self {
        ControlToken { bits: vec![value; len] }
    }

    /// One byte per element, zero padded to the span length.
    pub fn write_to(&self, span: &mut [u8]) {
        span.fill(0);
        for (b, &bit) in span.iter_mut().zip(&self.bits) {
            *b = bit as u8;
        }
    }

    pub fn decode(bytes: &[u8], len: usize) -> Result<Self, BehaviorError> {
        if bytes.len() < len {
            return Err(BehaviorError::new(format!("control token of {} bytes, need {len}", bytes.len())));
        }
        let bits = bytes[..len]
            .iter()
            .map(|&b| match b {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(BehaviorError::new(format!("control byte {other} is not 0 or 1"))),
            })
            .collect::<Result<_, _>>()?;
        Ok(ControlToken { bits })
    }

    /// 1-based element lookup.
    pub fn element(&self, index: u32) -> bool {
        self.bits[index as usize - 1]
    }
}

/// One firing's view of the actor's ports.
///
/// `inputs` follows the actor's data input ports in declaration order,
/// `outputs` its output ports (data and control). Spans of ports that are
/// inactive this firing are empty.
pub struct Firing<'a> {
    pub index: u64,
    pub control: Option<&'a ControlToken>,
    pub inputs: Vec<&'a [u8]>,
    pub outputs: Vec<&'a mut [u8]>,
}

pub trait Behavior: Send {
    fn init(&mut self) -> Result<(), BehaviorError> {
        Ok(())
    }

    /// Sees each control token before the firing it steers.
    fn control(&mut self, _token: &ControlToken) -> Result<(), BehaviorError> {
        Ok(())
    }

    fn fire(&mut self, firing: &mut Firing<'_>) -> Result<(), BehaviorError>;

    fn finish(&mut self) -> Result<(), BehaviorError> {
        Ok(())
    }
}

pub type Factory = Box<dyn Fn(&Graph, ActorId, u64) -> Result<Box<dyn Behavior>, BehaviorError> + Send + Sync>;

/// Maps behavior names to factories.
#[derive(Default)]
pub struct Registry {
    factories: BTreeMap<String, Factory>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register<F>(&mut self, name: &str, factory: F) -> &mut Self
    where
        F: Fn(&Graph, ActorId, u64) -> Result<Box<dyn Behavior>, BehaviorError> + Send + Sync + 'static,
    {
        self.factories.insert(name.to_string(), Box::new(factory));
        self
    }

    pub fn contains(&self, name: &str) -> bool {
        self.factories.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.factories.keys().map(String::as_str)
    }

    /// Builds one behavior per actor, in actor order. Each actor gets its own
    /// seed derived from `seed` and its name.
    pub fn instantiate(&self, graph: &Graph, seed: u64) -> Result<Vec<Box<dyn Behavior>>, BehaviorError> {
        graph
            .actors()
            .map(|(id, actor)| {
                let f = self.factories.get(&actor.behavior).ok_or_else(|| {
                    BehaviorError::new(format!("actor `{}`: unknown behavior `{}`", actor.name, actor.behavior))
                })?;
                f(graph, id, actor_seed(seed, &actor.name))
                    .map_err(|e| BehaviorError::new(format!("actor `{}`: {}", actor.name, e.0)))
            })
            .collect()
    }
}

/// Per-actor seed: FNV-1a of the name mixed into `seed` with SplitMix64.
pub fn actor_seed(seed: u64, name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100_0000_01b3);
    }
    let mut z = seed ^ h;
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

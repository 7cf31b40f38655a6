//! Behaviors for fixture graphs: byte sources, sinks, pass-through and
//! control generators.

use drflow_core::behavior::{Behavior, BehaviorError, ControlToken, Firing, Registry};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::param_str;

/// Fills each output span with seeded random bytes.
pub struct RandomSource {
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        RandomSource { rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl Behavior for RandomSource {
    fn fire(&mut self, f: &mut Firing<'_>) -> Result<(), BehaviorError> {
        for o in f.outputs.iter_mut() {
            self.rng.fill_bytes(o);
        }
        Ok(())
    }
}

/// Emits a fixed list of tokens, one per firing and output, then zeros.
pub struct ListSource {
    tokens: Vec<Vec<u8>>,
}

impl ListSource {
    pub fn new(tokens: Vec<Vec<u8>>) -> Self {
        ListSource { tokens }
    }
}

impl Behavior for ListSource {
    fn fire(&mut self, f: &mut Firing<'_>) -> Result<(), BehaviorError> {
        let t = self.tokens.get(f.index as usize);
        for o in f.outputs.iter_mut() {
            match t {
                Some(t) if t.len() == o.len() => o.copy_from_slice(t),
                Some(t) => return Err(BehaviorError::new(format!("token of {} bytes for a {}-byte span", t.len(), o.len()))),
                None => o.fill(0),
            }
        }
        Ok(())
    }
}

/// Consumes and discards; the executor records what sinks consume.
pub struct Discard;

impl Behavior for Discard {
    fn fire(&mut self, _: &mut Firing<'_>) -> Result<(), BehaviorError> {
        Ok(())
    }
}

/// Concatenates the active inputs and cycles that byte stream over every
/// active output. Outputs are zero when no input is active.
pub struct PassThrough;

impl Behavior for PassThrough {
    fn fire(&mut self, f: &mut Firing<'_>) -> Result<(), BehaviorError> {
        let stream: Vec<u8> = f.inputs.iter().flat_map(|i| i.iter().copied()).collect();
        for o in f.outputs.iter_mut() {
            if stream.is_empty() {
                o.fill(0);
            } else {
                for (d, s) in o.iter_mut().zip(stream.iter().cycle()) {
                    *d = *s;
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlPolicy {
    AllOn,
    AllOff,
    /// All on at even firings, all off at odd ones.
    Alternate,
    /// Element `firing % len` alone is on.
    RoundRobin,
    Random,
}

impl ControlPolicy {
    pub fn parse(s: &str) -> Result<Self, BehaviorError> {
        Ok(match s {
            "all" => ControlPolicy::AllOn,
            "none" => ControlPolicy::AllOff,
            "alternate" => ControlPolicy::Alternate,
            "round_robin" => ControlPolicy::RoundRobin,
            "random" => ControlPolicy::Random,
            other => return Err(BehaviorError::new(format!("unknown control policy `{other}`"))),
        })
    }
}

/// Configuration actor writing one control value per firing on every
/// control output.
pub struct ControlSource {
    policy: ControlPolicy,
    rng: ChaCha8Rng,
}

impl ControlSource {
    pub fn new(policy: ControlPolicy, seed: u64) -> Self {
        ControlSource { policy, rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl Behavior for ControlSource {
    fn fire(&mut self, f: &mut Firing<'_>) -> Result<(), BehaviorError> {
        let k = f.index as usize;
        for o in f.outputs.iter_mut() {
            let n = o.len();
            let bits = match self.policy {
                ControlPolicy::AllOn => vec![true; n],
                ControlPolicy::AllOff => vec![false; n],
                ControlPolicy::Alternate => vec![k % 2 == 0; n],
                ControlPolicy::RoundRobin => (0..n).map(|i| i == k % n.max(1)).collect(),
                ControlPolicy::Random => (0..n).map(|_| self.rng.gen_bool(0.5)).collect(),
            };
            ControlToken::new(bits).write_to(o);
        }
        Ok(())
    }
}

pub fn register(r: &mut Registry) {
    r.register("source", |_, _, seed| Ok(Box::new(RandomSource::new(seed))));
    r.register("sink", |_, _, _| Ok(Box::new(Discard)));
    r.register("passthrough", |_, _, _| Ok(Box::new(PassThrough)));
    r.register("control", |g, a, seed| {
        let policy = ControlPolicy::parse(param_str(g, a, "policy", "random")?)?;
        Ok(Box::new(ControlSource::new(policy, seed)))
    });
}

//! Corpus applications and the behaviors they run.
//!
//! Three pipelines: frame-differencing motion detection, a reconfigurable FIR
//! bank for digital predistortion, and an image pipeline with a bypass
//! channel. `registry()` knows every behavior name used by corpus and
//! fixture graph files.

use drflow_core::behavior::{BehaviorError, Registry};
use drflow_core::{ActorId, Graph};

pub mod bypass;
pub mod corpus;
pub mod dpd;
pub mod generic;
pub mod motion;

pub use corpus::{all_apps, CorpusApp, ExpectedFacts};

/// Registry holding generic and application behaviors.
pub fn registry() -> Registry {
    let mut r = Registry::new();
    generic::register(&mut r);
    motion::register(&mut r);
    dpd::register(&mut r);
    bypass::register(&mut r);
    r
}

pub(crate) fn param_u64(graph: &Graph, actor: ActorId, key: &str, default: u64) -> Result<u64, BehaviorError> {
    match graph.actor(actor).params.get(key) {
        None => Ok(default),
        Some(v) => v.as_u64().ok_or_else(|| BehaviorError::new(format!("param `{key}` must be a non-negative integer"))),
    }
}

pub(crate) fn param_str<'g>(graph: &'g Graph, actor: ActorId, key: &str, default: &'g str) -> Result<&'g str, BehaviorError> {
    match graph.actor(actor).params.get(key) {
        None => Ok(default),
        Some(v) => v.as_str().ok_or_else(|| BehaviorError::new(format!("param `{key}` must be a string"))),
    }
}

pub(crate) fn f32s(bytes: &[u8]) -> Vec<f32> {
    bytes.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect()
}

pub(crate) fn put_f32s(dst: &mut [u8], values: &[f32]) {
    for (c, v) in dst.chunks_exact_mut(4).zip(values) {
        c.copy_from_slice(&v.to_le_bytes());
    }
}

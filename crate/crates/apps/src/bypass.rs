//! Image pipeline with a bypass channel.
//!
//! `select` either sends a frame through three dense layers or straight to
//! `merge` over a direct FIFO; `merge` forwards the layer result or, for a
//! bypassed frame, a frame of `MARKER` values. Frames are `DIM` x `DIM`
//! little-endian `f32` matrices.

use drflow_core::behavior::{Behavior, BehaviorError, ControlToken, Firing, Registry};
use drflow_core::builder::GraphBuilder;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::corpus::{CorpusApp, ExpectedFacts};
use crate::{f32s, param_str, param_u64, put_f32s};

pub const DIM: usize = 8;
pub const MARKER: f32 = -1.0;
pub const LAYERS: usize = 3;

/// Weight `W_layer[k][j]`, exact in binary.
pub fn weight(layer: usize, k: usize, j: usize) -> f32 {
    (((layer + 1) * (k + 2) + 3 * j) % 9) as f32 / 8.0 - 0.5
}

/// `x * W_layer`, accumulated over increasing `k`, then clamped at zero when
/// `relu` is set.
pub fn dense(x: &[f32], layer: usize, relu: bool) -> Vec<f32> {
    let mut out = vec![0f32; DIM * DIM];
    for i in 0..DIM {
        for j in 0..DIM {
            let mut acc = 0f32;
            for k in 0..DIM {
                acc += x[i * DIM + k] * weight(layer, k, j);
            }
            out[i * DIM + j] = if relu { acc.max(0.0) } else { acc };
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    /// Process even frames, bypass odd ones.
    Alternate,
    Process,
    Bypass,
}

impl Policy {
    pub fn parse(s: &str) -> Result<Self, BehaviorError> {
        Ok(match s {
            "alternate" => Policy::Alternate,
            "process" => Policy::Process,
            "bypass" => Policy::Bypass,
            other => return Err(BehaviorError::new(format!("unknown bypass policy `{other}`"))),
        })
    }

    pub fn as_param(self) -> &'static str {
        match self {
            Policy::Alternate => "alternate",
            Policy::Process => "process",
            Policy::Bypass => "bypass",
        }
    }

    pub fn processes(self, frame: u64) -> bool {
        match self {
            Policy::Alternate => frame % 2 == 0,
            Policy::Process => true,
            Policy::Bypass => false,
        }
    }
}

struct Conf {
    policy: Policy,
}

impl Behavior for Conf {
    fn fire(&mut self, f: &mut Firing<'_>) -> Result<(), BehaviorError> {
        let p = self.policy.processes(f.index);
        ControlToken::new(vec![p, !p]).write_to(f.outputs[0]);
        Ok(())
    }
}

pub struct MatrixSource {
    rng: ChaCha8Rng,
}

impl MatrixSource {
    pub fn new(seed: u64) -> Self {
        MatrixSource { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn next_frame(&mut self) -> Vec<f32> {
        (0..DIM * DIM).map(|_| self.rng.gen_range(-1.0..1.0)).collect()
    }
}

impl Behavior for MatrixSource {
    fn fire(&mut self, f: &mut Firing<'_>) -> Result<(), BehaviorError> {
        let m = self.next_frame();
        put_f32s(f.outputs[0], &m);
        Ok(())
    }
}

/// The frames a `MatrixSource` with this seed emits.
pub fn input_frames(n: usize, seed: u64) -> Vec<Vec<f32>> {
    let mut s = MatrixSource::new(seed);
    (0..n).map(|_| s.next_frame()).collect()
}

/// Forwards the frame on whichever output is active.
struct Select;

impl Behavior for Select {
    fn fire(&mut self, f: &mut Firing<'_>) -> Result<(), BehaviorError> {
        let input = f.inputs[0];
        for o in f.outputs.iter_mut().filter(|o| !o.is_empty()) {
            o.copy_from_slice(input);
        }
        Ok(())
    }
}

struct Dense {
    layer: usize,
    relu: bool,
}

impl Behavior for Dense {
    fn fire(&mut self, f: &mut Firing<'_>) -> Result<(), BehaviorError> {
        let y = dense(&f32s(f.inputs[0]), self.layer, self.relu);
        put_f32s(f.outputs[0], &y);
        Ok(())
    }
}

/// Port 0 carries processed frames, port 1 bypassed ones.
struct Merge;

impl Behavior for Merge {
    fn fire(&mut self, f: &mut Firing<'_>) -> Result<(), BehaviorError> {
        let processed = f.inputs[0];
        if processed.is_empty() {
            put_f32s(f.outputs[0], &[MARKER; DIM * DIM]);
        } else {
            f.outputs[0].copy_from_slice(processed);
        }
        Ok(())
    }
}

pub fn register(r: &mut Registry) {
    r.register("matrix_source", |_, _, seed| Ok(Box::new(MatrixSource::new(seed))));
    r.register("bypass_policy", |g, a, _| Ok(Box::new(Conf { policy: Policy::parse(param_str(g, a, "policy", "alternate")?)? })));
    r.register("select", |_, _, _| Ok(Box::new(Select)));
    r.register("dense", |g, a, _| {
        let layer = param_u64(g, a, "layer", 0)? as usize;
        Ok(Box::new(Dense { layer, relu: layer + 1 < LAYERS }))
    });
    r.register("merge", |_, _, _| Ok(Box::new(Merge)));
}

pub fn app_adaptive_bypass(n_frames: u64, seed: u64) -> CorpusApp {
    adaptive_bypass_with(Policy::Alternate, n_frames, seed)
}

pub fn adaptive_bypass_with(policy: Policy, n_frames: u64, seed: u64) -> CorpusApp {
    let mut b = GraphBuilder::new("adaptive_bypass");
    b.token_bytes(DIM * DIM * 4);
    b.source("source", 1).behavior("source", "matrix_source");
    b.configuration("conf", &[("c", 2)]).behavior("conf", "bypass_policy");
    b.param("conf", "policy", json!(policy.as_param()));
    b.dynamic("select", &[("i", "in")], &[("proc", "out"), ("skip", "out")]).behavior("select", "select");
    b.dynamic("merge", &[("o", "out")], &[("proc", "in"), ("skip", "in")]).behavior("merge", "merge");
    let layers: Vec<String> = (1..=LAYERS).map(|l| format!("layer{l}")).collect();
    for (l, name) in layers.iter().enumerate() {
        b.stat(name, &["i"], &["o"]).behavior(name, "dense").param(name, "layer", json!(l));
    }
    b.sink("sink", 1);
    b.fifo("source.o", "select.i").fifo("select.proc", "layer1.i");
    for w in layers.windows(2) {
        b.fifo(&format!("{}.o", w[0]), &format!("{}.i", w[1]));
    }
    b.fifo(&format!("{}.o", layers[LAYERS - 1]), "merge.proc");
    b.fifo("select.skip", "merge.skip").fifo("merge.o", "sink.i");
    b.fifo("conf.c", "select.ctl").fifo("conf.c", "merge.ctl");
    b.control("conf.c", "select.proc", 1).control("conf.c", "merge.proc", 1);
    b.control("conf.c", "select.skip", 2).control("conf.c", "merge.skip", 2);
    let g = b.build();
    let beta = g.fifos.iter().map(|f| (f.id.clone(), 1)).collect();
    CorpusApp {
        name: "adaptive_bypass".into(),
        description: g,
        firings: n_frames,
        seed,
        expected: ExpectedFacts { dpgs: 1, m: vec![2], beta },
    }
}

//! Reconfigurable FIR bank for digital predistortion.
//!
//! `conf` picks the active branches per block; `split` copies the input block
//! to each active branch, every `firK` filters it, and `add` sums the active
//! branch outputs. Samples are complex, stored as interleaved little-endian
//! `f32` pairs; one token is one block.

use drflow_core::behavior::{Behavior, BehaviorError, ControlToken, Firing, Registry};
use drflow_core::builder::GraphBuilder;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::corpus::{CorpusApp, ExpectedFacts};
use crate::{f32s, param_str, param_u64, put_f32s};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct C32 {
    pub re: f32,
    pub im: f32,
}

impl C32 {
    pub fn new(re: f32, im: f32) -> Self {
        C32 { re, im }
    }
}

pub fn to_samples(bytes: &[u8]) -> Vec<C32> {
    f32s(bytes).chunks_exact(2).map(|p| C32::new(p[0], p[1])).collect()
}

pub fn from_samples(samples: &[C32]) -> Vec<u8> {
    let mut out = vec![0u8; samples.len() * 8];
    let flat: Vec<f32> = samples.iter().flat_map(|c| [c.re, c.im]).collect();
    put_f32s(&mut out, &flat);
    out
}

/// Tap `t` of branch `k` (both 0-based). Values are exact in binary.
pub fn coefficient(k: usize, t: usize) -> C32 {
    let re = ((k + 1) * (t + 1) % 7) as f32 / 8.0 - 0.375;
    let im = ((k + 2) * (t + 3) % 5) as f32 / 16.0 - 0.125;
    C32::new(re, im)
}

/// Block-local FIR: samples before the block start count as zero.
/// `y[n] = sum_t h[t] * x[n - t]`, accumulated in increasing `t`.
pub fn fir_block(h: &[C32], x: &[C32]) -> Vec<C32> {
    (0..x.len())
        .map(|n| {
            let mut acc = C32::default();
            for (t, c) in h.iter().enumerate().take(n + 1) {
                let s = x[n - t];
                acc.re += c.re * s.re - c.im * s.im;
                acc.im += c.re * s.im + c.im * s.re;
            }
            acc
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    /// Uniform subset size in `2..=n`, then a uniform subset of that size.
    Seeded,
    All,
    /// Only branch `k` (0-based).
    One(usize),
}

impl Policy {
    pub fn parse(s: &str) -> Result<Self, BehaviorError> {
        match s {
            "seeded" => Ok(Policy::Seeded),
            "all" => Ok(Policy::All),
            _ => s
                .strip_prefix("one:")
                .and_then(|k| k.parse().ok())
                .map(Policy::One)
                .ok_or_else(|| BehaviorError::new(format!("unknown branch policy `{s}`"))),
        }
    }

    pub fn as_param(self) -> String {
        match self {
            Policy::Seeded => "seeded".into(),
            Policy::All => "all".into(),
            Policy::One(k) => format!("one:{k}"),
        }
    }
}

/// Produces the active-branch masks of a `conf` actor.
pub struct BranchPolicy {
    policy: Policy,
    n: usize,
    rng: ChaCha8Rng,
}

impl BranchPolicy {
    pub fn new(policy: Policy, n: usize, seed: u64) -> Self {
        BranchPolicy { policy, n, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn next_mask(&mut self) -> Vec<bool> {
        let n = self.n;
        match self.policy {
            Policy::All => vec![true; n],
            Policy::One(k) => (0..n).map(|i| i == k).collect(),
            Policy::Seeded => {
                let size = self.rng.gen_range(2.min(n)..=n);
                let mut idx: Vec<usize> = (0..n).collect();
                idx.shuffle(&mut self.rng);
                let mut mask = vec![false; n];
                idx[..size].iter().for_each(|&i| mask[i] = true);
                mask
            }
        }
    }
}

impl Behavior for BranchPolicy {
    fn fire(&mut self, f: &mut Firing<'_>) -> Result<(), BehaviorError> {
        let mask = ControlToken::new(self.next_mask());
        for o in f.outputs.iter_mut() {
            mask.write_to(o);
        }
        Ok(())
    }
}

pub struct SampleSource {
    impulse: bool,
    rng: ChaCha8Rng,
}

impl SampleSource {
    pub fn new(impulse: bool, seed: u64) -> Self {
        SampleSource { impulse, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn block(&mut self, len: usize) -> Vec<C32> {
        if self.impulse {
            let mut v = vec![C32::default(); len];
            v[0] = C32::new(1.0, 0.0);
            v
        } else {
            (0..len).map(|_| C32::new(self.rng.gen_range(-1.0..1.0), self.rng.gen_range(-1.0..1.0))).collect()
        }
    }
}

impl Behavior for SampleSource {
    fn fire(&mut self, f: &mut Firing<'_>) -> Result<(), BehaviorError> {
        let block = self.block(f.outputs[0].len() / 8);
        f.outputs[0].copy_from_slice(&from_samples(&block));
        Ok(())
    }
}

/// Copies its input to every active output.
struct Split;

impl Behavior for Split {
    fn fire(&mut self, f: &mut Firing<'_>) -> Result<(), BehaviorError> {
        let input = f.inputs[0];
        for o in f.outputs.iter_mut().filter(|o| !o.is_empty()) {
            o.copy_from_slice(input);
        }
        Ok(())
    }
}

struct Fir {
    taps: Vec<C32>,
}

impl Behavior for Fir {
    fn fire(&mut self, f: &mut Firing<'_>) -> Result<(), BehaviorError> {
        let y = fir_block(&self.taps, &to_samples(f.inputs[0]));
        f.outputs[0].copy_from_slice(&from_samples(&y));
        Ok(())
    }
}

/// Sums the active inputs in port order, starting from zero.
struct Add;

impl Behavior for Add {
    fn fire(&mut self, f: &mut Firing<'_>) -> Result<(), BehaviorError> {
        let mut acc = vec![0f32; f.outputs[0].len() / 4];
        for i in f.inputs.iter().filter(|i| !i.is_empty()) {
            for (a, v) in acc.iter_mut().zip(f32s(i)) {
                *a += v;
            }
        }
        put_f32s(f.outputs[0], &acc);
        Ok(())
    }
}

pub fn register(r: &mut Registry) {
    r.register("sample_source", |g, a, seed| {
        Ok(Box::new(SampleSource::new(param_str(g, a, "signal", "random")? == "impulse", seed)))
    });
    r.register("branch_policy", |g, a, seed| {
        let policy = Policy::parse(param_str(g, a, "policy", "seeded")?)?;
        let n = param_u64(g, a, "branches", 4)? as usize;
        Ok(Box::new(BranchPolicy::new(policy, n, seed)))
    });
    r.register("split", |_, _, _| Ok(Box::new(Split)));
    r.register("fir", |g, a, _| {
        let k = param_u64(g, a, "branch", 0)? as usize;
        let taps = param_u64(g, a, "taps", 10)? as usize;
        Ok(Box::new(Fir { taps: (0..taps).map(|t| coefficient(k, t)).collect() }))
    });
    r.register("add", |_, _, _| Ok(Box::new(Add)));
}

#[derive(Debug, Clone, PartialEq)]
pub struct DpdOptions {
    pub n_branches: usize,
    pub taps: usize,
    pub block: usize,
    pub policy: Policy,
    pub impulse: bool,
    /// Delays on the control FIFOs to `split` and `add`.
    pub control_delays: (u32, u32),
}

impl Default for DpdOptions {
    fn default() -> Self {
        DpdOptions { n_branches: 4, taps: 10, block: 256, policy: Policy::Seeded, impulse: false, control_delays: (0, 0) }
    }
}

pub fn app_dynamic_predistortion(n_branches: usize, taps: usize, block: usize, seed: u64) -> CorpusApp {
    dpd_with(&DpdOptions { n_branches, taps, block, ..Default::default() }, 64, seed)
}

pub fn dpd_with(o: &DpdOptions, firings: u64, seed: u64) -> CorpusApp {
    let n = o.n_branches;
    let drps: Vec<String> = (1..=n).map(|k| format!("b{k}")).collect();
    let outs: Vec<(&str, &str)> = drps.iter().map(|d| (d.as_str(), "out")).collect();
    let ins: Vec<(&str, &str)> = drps.iter().map(|d| (d.as_str(), "in")).collect();
    let mut b = GraphBuilder::new("dynamic_predistortion");
    b.token_bytes(o.block * 8);
    b.source("source", 1).behavior("source", "sample_source");
    b.param("source", "signal", json!(if o.impulse { "impulse" } else { "random" }));
    b.configuration("conf", &[("c", n)]).behavior("conf", "branch_policy");
    b.param("conf", "policy", json!(o.policy.as_param())).param("conf", "branches", json!(n));
    b.dynamic("split", &[("i", "in")], &outs).behavior("split", "split");
    b.dynamic("add", &[("o", "out")], &ins).behavior("add", "add");
    b.sink("sink", 1);
    b.fifo("source.o", "split.i").fifo("add.o", "sink.i");
    let mut beta = vec![("source.o->split.i".to_string(), 1), ("add.o->sink.i".to_string(), 1)];
    for (k, d) in drps.iter().enumerate() {
        let fir = format!("fir{}", k + 1);
        b.stat(&fir, &["i"], &["o"]).behavior(&fir, "fir");
        b.param(&fir, "branch", json!(k)).param(&fir, "taps", json!(o.taps));
        b.fifo(&format!("split.{d}"), &format!("{fir}.i")).fifo(&format!("{fir}.o"), &format!("add.{d}"));
        b.control("conf.c", &format!("split.{d}"), k as u32 + 1);
        b.control("conf.c", &format!("add.{d}"), k as u32 + 1);
        beta.push((format!("split.{d}->{fir}.i"), 1));
        beta.push((format!("{fir}.o->add.{d}"), 1));
    }
    b.fifo_delay("conf.c", "split.ctl", o.control_delays.0).fifo_delay("conf.c", "add.ctl", o.control_delays.1);
    beta.push(("conf.c->split.ctl".into(), 1));
    beta.push(("conf.c->add.ctl".into(), 1));
    CorpusApp {
        name: "dynamic_predistortion".into(),
        description: b.build(),
        firings,
        seed,
        expected: ExpectedFacts { dpgs: 1, m: vec![n], beta: beta.into_iter().collect() },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fir_of_impulse_is_the_taps() {
        let h: Vec<C32> = (0..4).map(|t| coefficient(2, t)).collect();
        let mut x = vec![C32::default(); 6];
        x[0] = C32::new(1.0, 0.0);
        let y = fir_block(&h, &x);
        assert_eq!(&y[..4], &h[..]);
        assert_eq!(y[4], C32::default());
    }

    #[test]
    fn seeded_policy_keeps_at_least_two() {
        let mut p = BranchPolicy::new(Policy::Seeded, 5, 9);
        for _ in 0..200 {
            let m = p.next_mask();
            assert!((2..=5).contains(&m.iter().filter(|&&b| b).count()));
        }
        assert_eq!(Policy::parse("one:3").unwrap(), Policy::One(3));
        assert_eq!(Policy::parse(&Policy::One(1).as_param()).unwrap(), Policy::One(1));
    }

    #[test]
    fn samples_round_trip() {
        let s = vec![C32::new(1.5, -2.0), C32::new(0.0, 3.25)];
        assert_eq!(to_samples(&from_samples(&s)), s);
    }
}

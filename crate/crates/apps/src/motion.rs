//! Motion detection over 8-bit grayscale frames.
//!
//! `source -> gauss -> thres -> med -> sink`, with a second FIFO from `gauss`
//! to `thres` holding one zero frame so `thres` sees the previous frame next
//! to the current one. One token is one frame; all rates are 1.

use drflow_core::behavior::{Behavior, BehaviorError, Firing, Registry};
use drflow_core::builder::GraphBuilder;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::corpus::{CorpusApp, ExpectedFacts};
use crate::{param_str, param_u64};

pub const THRESHOLD: u8 = 16;
const KERNEL: [u32; 5] = [1, 4, 6, 4, 1];

/// 5x5 binomial blur, rounded, total weight 256. The two top and two bottom
/// rows are copied unfiltered; columns clamp at the frame edge.
pub fn gauss(frame: &[u8], w: usize, h: usize) -> Vec<u8> {
    let mut out = frame.to_vec();
    for y in 2..h.saturating_sub(2) {
        for x in 0..w {
            let mut acc = 0u32;
            for (dy, ky) in KERNEL.iter().enumerate() {
                let row = &frame[(y + dy - 2) * w..][..w];
                for (dx, kx) in KERNEL.iter().enumerate() {
                    let xx = (x + dx).saturating_sub(2).min(w - 1);
                    acc += ky * kx * row[xx] as u32;
                }
            }
            out[y * w + x] = ((acc + 128) >> 8) as u8;
        }
    }
    out
}

pub fn threshold_diff(cur: &[u8], prev: &[u8], threshold: u8) -> Vec<u8> {
    cur.iter().zip(prev).map(|(&a, &b)| if a.abs_diff(b) > threshold { 255 } else { 0 }).collect()
}

/// Median of the pixel and its four direct neighbours, edges clamped.
pub fn median5(frame: &[u8], w: usize, h: usize) -> Vec<u8> {
    let at = |x: isize, y: isize| {
        let x = x.clamp(0, w as isize - 1) as usize;
        let y = y.clamp(0, h as isize - 1) as usize;
        frame[y * w + x]
    };
    let mut out = vec![0u8; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let mut v = [at(x, y), at(x - 1, y), at(x + 1, y), at(x, y - 1), at(x, y + 1)];
            v.sort_unstable();
            out[y as usize * w + x as usize] = v[2];
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pattern {
    Zero,
    /// A seeded noise image moving right by 2 px per frame, wrapping.
    Shift,
    /// Independent noise frames.
    Noise,
}

impl Pattern {
    pub fn parse(s: &str) -> Result<Self, BehaviorError> {
        Ok(match s {
            "zero" => Pattern::Zero,
            "shift" => Pattern::Shift,
            "noise" => Pattern::Noise,
            other => return Err(BehaviorError::new(format!("unknown frame pattern `{other}`"))),
        })
    }
}

/// The input frames a `FrameSource` with this pattern and seed emits.
pub fn input_frames(pattern: Pattern, w: usize, h: usize, n: usize, seed: u64) -> Vec<Vec<u8>> {
    let mut src = FrameSource::new(pattern, w, h, seed);
    (0..n as u64).map(|k| src.frame(k)).collect()
}

pub struct FrameSource {
    pattern: Pattern,
    w: usize,
    h: usize,
    rng: ChaCha8Rng,
    base: Vec<u8>,
}

impl FrameSource {
    pub fn new(pattern: Pattern, w: usize, h: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut base = vec![0u8; w * h];
        rng.fill_bytes(&mut base);
        FrameSource { pattern, w, h, rng, base }
    }

    fn frame(&mut self, k: u64) -> Vec<u8> {
        let (w, h) = (self.w, self.h);
        match self.pattern {
            Pattern::Zero => vec![0; w * h],
            Pattern::Noise => {
                let mut f = vec![0u8; w * h];
                self.rng.fill_bytes(&mut f);
                f
            }
            Pattern::Shift => {
                let s = (2 * k as usize) % w;
                let mut f = vec![0u8; w * h];
                for y in 0..h {
                    for x in 0..w {
                        f[y * w + x] = self.base[y * w + (x + w - s) % w];
                    }
                }
                f
            }
        }
    }
}

impl Behavior for FrameSource {
    fn fire(&mut self, f: &mut Firing<'_>) -> Result<(), BehaviorError> {
        let frame = self.frame(f.index);
        f.outputs[0].copy_from_slice(&frame);
        Ok(())
    }
}

struct Gauss {
    w: usize,
    h: usize,
}

impl Behavior for Gauss {
    fn fire(&mut self, f: &mut Firing<'_>) -> Result<(), BehaviorError> {
        let out = gauss(f.inputs[0], self.w, self.h);
        f.outputs[0].copy_from_slice(&out);
        Ok(())
    }
}

struct Thres {
    threshold: u8,
}

impl Behavior for Thres {
    fn fire(&mut self, f: &mut Firing<'_>) -> Result<(), BehaviorError> {
        let out = threshold_diff(f.inputs[0], f.inputs[1], self.threshold);
        f.outputs[0].copy_from_slice(&out);
        Ok(())
    }
}

struct Median {
    w: usize,
    h: usize,
}

impl Behavior for Median {
    fn fire(&mut self, f: &mut Firing<'_>) -> Result<(), BehaviorError> {
        let out = median5(f.inputs[0], self.w, self.h);
        f.outputs[0].copy_from_slice(&out);
        Ok(())
    }
}

fn dims(g: &drflow_core::Graph, a: drflow_core::ActorId) -> Result<(usize, usize), BehaviorError> {
    let w = param_u64(g, a, "width", 64)? as usize;
    let h = param_u64(g, a, "height", 64)? as usize;
    if w == 0 || h == 0 {
        return Err(BehaviorError::new("frame dimensions must be positive"));
    }
    Ok((w, h))
}

pub fn register(r: &mut Registry) {
    r.register("frame_source", |g, a, seed| {
        let (w, h) = dims(g, a)?;
        let pattern = Pattern::parse(param_str(g, a, "pattern", "shift")?)?;
        Ok(Box::new(FrameSource::new(pattern, w, h, seed)))
    });
    r.register("gauss", |g, a, _| {
        let (w, h) = dims(g, a)?;
        Ok(Box::new(Gauss { w, h }))
    });
    r.register("thres", |g, a, _| {
        let t = param_u64(g, a, "threshold", THRESHOLD as u64)?;
        let threshold = u8::try_from(t).map_err(|_| BehaviorError::new("threshold must fit in a byte"))?;
        Ok(Box::new(Thres { threshold }))
    });
    r.register("median5", |g, a, _| {
        let (w, h) = dims(g, a)?;
        Ok(Box::new(Median { w, h }))
    });
}

/// Motion detection on `n_frames` frames of `w` x `h` pixels.
pub fn app_motion_detection(w: usize, h: usize, n_frames: u64, seed: u64) -> CorpusApp {
    motion_detection_with(w, h, n_frames, seed, "shift")
}

pub fn motion_detection_with(w: usize, h: usize, n_frames: u64, seed: u64, pattern: &str) -> CorpusApp {
    let mut b = GraphBuilder::new("motion_detection");
    b.token_bytes(w * h);
    b.source("source", 1).behavior("source", "frame_source");
    b.stat("gauss", &["i"], &["o"]).behavior("gauss", "gauss");
    b.stat("thres", &["cur", "prev"], &["o"]).behavior("thres", "thres");
    b.stat("med", &["i"], &["o"]).behavior("med", "median5");
    b.sink("sink", 1);
    for a in ["source", "gauss", "med"] {
        b.param(a, "width", json!(w)).param(a, "height", json!(h));
    }
    b.param("source", "pattern", json!(pattern));
    b.param("thres", "threshold", json!(THRESHOLD));
    b.fifo("source.o", "gauss.i").fifo("gauss.o", "thres.cur").fifo_delay("gauss.o", "thres.prev", 1);
    b.fifo("thres.o", "med.i").fifo("med.o", "sink.i");
    CorpusApp {
        name: "motion_detection".into(),
        description: b.build(),
        firings: n_frames,
        seed,
        expected: ExpectedFacts {
            dpgs: 0,
            m: vec![],
            beta: [
                ("source.o->gauss.i", 1),
                ("gauss.o->thres.cur", 1),
                ("gauss.o->thres.prev", 2),
                ("thres.o->med.i", 1),
                ("med.o->sink.i", 1),
            ]
            .iter()
            .map(|&(k, v)| (k.to_string(), v))
            .collect(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_keeps_flat_frames_and_border_rows() {
        let f = vec![77u8; 8 * 6];
        assert_eq!(gauss(&f, 8, 6), f);
        let mut f = vec![0u8; 8 * 6];
        f[0] = 200;
        f[2 * 8 + 4] = 255;
        let g = gauss(&f, 8, 6);
        assert_eq!(g[0], 200);
        // Centre weight 36/256 of 255, rounded.
        assert_eq!(g[2 * 8 + 4], ((36 * 255 + 128) >> 8) as u8);
    }

    #[test]
    fn median_removes_isolated_pixels() {
        let mut f = vec![0u8; 25];
        f[12] = 255;
        assert!(median5(&f, 5, 5).iter().all(|&p| p == 0));
    }

    #[test]
    fn threshold_is_strict() {
        assert_eq!(threshold_diff(&[16, 17, 0], &[0, 0, 17], 16), [0, 255, 255]);
    }
}

//! FIFO capacity, delay-aware slot layout and the blocking two-phase channel.
//!
//! A channel with rate `r`, delay `Q` and buffering factor `C` is laid out in
//! one of two ways. When `Q` is a multiple of `r` the buffer is a ring of
//! `max(rC, Q)` slots. Otherwise it holds `rC + Q` slots: cycle writes start at
//! `Q + kr`, cycle reads at `kr`, and once a cycle has been written the last
//! `Q` slots are copied to the front so every span stays contiguous.

use std::cell::UnsafeCell;
use std::ops::Range;
use std::sync::{Arc, Condvar, Mutex, MutexGuard};

use thiserror::Error;

use crate::trace::{TraceEvent, TraceLog, TraceOp};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FifoError {
    #[error("invalid FIFO parameters: {0}")]
    InvalidParams(String),
    #[error("FIFO `{0}` was poisoned")]
    Poisoned(String),
    #[error("FIFO `{fifo}`: {message}")]
    ProtocolError { fifo: String, message: String },
}

fn check_params(r: usize, q: usize, c: usize) -> Result<(), FifoError> {
    let _ = q;
    if r == 0 {
        return Err(FifoError::InvalidParams("rate must be at least 1".into()));
    }
    if c < 2 {
        return Err(FifoError::InvalidParams(format!("buffering factor must be at least 2, got {c}")));
    }
    Ok(())
}

/// Channel size in bytes.
pub fn capacity(r: usize, b: usize, q: usize, c: usize) -> Result<usize, FifoError> {
    check_params(r, q, c)?;
    if b == 0 {
        return Err(FifoError::InvalidParams("token size must be at least 1 byte".into()));
    }
    Ok(b * slots(r, q, c))
}

fn slots(r: usize, q: usize, c: usize) -> usize {
    if q % r != 0 {
        r * c + q
    } else {
        (r * c).max(q)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CopySpec {
    pub src: Range<usize>,
    pub dst: Range<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CapacityPlan {
    pub rate: usize,
    pub delay: usize,
    pub factor: usize,
    pub token_bytes: usize,
    pub slots: usize,
    pub bytes: usize,
    pub needs_wrap_copy: bool,
    /// Slot offset of each write chunk in one cycle.
    pub write_chunks: Vec<usize>,
    pub read_chunks: Vec<usize>,
    pub copy: Option<CopySpec>,
}

impl CapacityPlan {
    /// Largest token count the layout can always hold right after a write
    /// without waiting for a reader to finish its current span.
    pub fn headroom(&self) -> usize {
        if self.needs_wrap_copy {
            (self.rate * self.factor).max(self.delay + self.rate)
        } else {
            self.slots
        }
    }
}

pub fn layout_plan(r: usize, q: usize, c: usize) -> Result<CapacityPlan, FifoError> {
    plan(r, 1, q, c)
}

pub fn plan(r: usize, b: usize, q: usize, c: usize) -> Result<CapacityPlan, FifoError> {
    let bytes = capacity(r, b, q, c)?;
    let n = slots(r, q, c);
    let wrap = q % r != 0;
    let (write_chunks, read_chunks, copy) = if wrap {
        (
            (0..c).map(|k| q + k * r).collect(),
            (0..c).map(|k| k * r).collect(),
            Some(CopySpec { src: r * c..r * c + q, dst: 0..q }),
        )
    } else {
        let chunks = n / r;
        ((0..chunks).map(|k| (q + k * r) % n).collect(), (0..chunks).map(|k| k * r).collect(), None)
    };
    Ok(CapacityPlan {
        rate: r,
        delay: q,
        factor: c,
        token_bytes: b,
        slots: n,
        bytes,
        needs_wrap_copy: wrap,
        write_chunks,
        read_chunks,
        copy,
    })
}

/// Slot bookkeeping for one channel, independent of storage and threads.
///
/// Counters are in tokens. `acquired` advances at read start, `released` at
/// read end.
#[derive(Debug, Clone)]
pub struct SlotMachine {
    r: usize,
    q: usize,
    c: usize,
    slots: usize,
    wrap: bool,
    cap: Option<usize>,
    written: usize,
    acquired: usize,
    released: usize,
    copies_done: usize,
    writing: Option<usize>,
    reading: Option<usize>,
}

impl SlotMachine {
    /// `cap` limits the tokens queued ahead of the reader.
    pub fn new(plan: &CapacityPlan, cap: Option<usize>) -> Self {
        SlotMachine {
            r: plan.rate,
            q: plan.delay,
            c: plan.factor,
            slots: plan.slots,
            wrap: plan.needs_wrap_copy,
            cap,
            written: 0,
            acquired: 0,
            released: 0,
            copies_done: 0,
            writing: None,
            reading: None,
        }
    }

    pub fn occupancy(&self) -> usize {
        self.q + self.written - self.acquired
    }

    pub fn written(&self) -> usize {
        self.written
    }

    pub fn acquired(&self) -> usize {
        self.acquired
    }

    pub fn copies_done(&self) -> usize {
        self.copies_done
    }

    fn cycle_tokens(&self) -> usize {
        self.r * self.c
    }

    /// Offset of the next write chunk if it may start now.
    pub fn write_offset(&self) -> Option<usize> {
        if self.writing.is_some() {
            return None;
        }
        if let Some(cap) = self.cap {
            if self.occupancy() + self.r > cap {
                return None;
            }
        }
        let w = self.written / self.r;
        if self.wrap {
            let rc = self.cycle_tokens();
            let (cycle, k) = (w / self.c, w % self.c);
            let offset = self.q + k * self.r;
            if cycle > 0 {
                let need = (cycle - 1) * rc + (offset + self.r).min(rc);
                if self.copies_done < cycle || self.released < need {
                    return None;
                }
            }
            Some(offset)
        } else {
            if self.q + self.written + self.r > self.released + self.slots {
                return None;
            }
            Some((self.q + w * self.r) % self.slots)
        }
    }

    pub fn read_offset(&self) -> Option<usize> {
        if self.reading.is_some() {
            return None;
        }
        let n = self.acquired / self.r;
        if self.q + self.written < (n + 1) * self.r {
            return None;
        }
        if self.wrap {
            let (cycle, k) = (n / self.c, n % self.c);
            if k * self.r < self.q && self.copies_done < cycle {
                return None;
            }
            Some(k * self.r)
        } else {
            Some((n * self.r) % self.slots)
        }
    }

    pub fn begin_write(&mut self) -> Option<Range<usize>> {
        let off = self.write_offset()?;
        self.writing = Some(off);
        Some(off..off + self.r)
    }

    pub fn end_write(&mut self) -> Result<Range<usize>, &'static str> {
        let off = self.writing.take().ok_or("write end without start")?;
        self.written += self.r;
        Ok(off..off + self.r)
    }

    pub fn begin_read(&mut self) -> Option<Range<usize>> {
        let off = self.read_offset()?;
        self.reading = Some(off);
        self.acquired += self.r;
        Some(off..off + self.r)
    }

    pub fn end_read(&mut self) -> Result<Range<usize>, &'static str> {
        let off = self.reading.take().ok_or("read end without start")?;
        self.released += self.r;
        Ok(off..off + self.r)
    }

    /// The wrap copy, if one is due now.
    pub fn pending_copy(&self) -> Option<CopySpec> {
        if !self.wrap {
            return None;
        }
        let rc = self.cycle_tokens();
        let c = self.copies_done;
        if self.written >= (c + 1) * rc && self.released >= c * rc + self.q.min(rc) {
            Some(CopySpec { src: rc..rc + self.q, dst: 0..self.q })
        } else {
            None
        }
    }

    pub fn complete_copy(&mut self) {
        self.copies_done += 1;
    }

    pub fn write_open(&self) -> Option<Range<usize>> {
        self.writing.map(|o| o..o + self.r)
    }

    pub fn read_open(&self) -> Option<Range<usize>> {
        self.reading.map(|o| o..o + self.r)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SlotOp {
    Write(Range<usize>),
    Read(Range<usize>),
    Copy(CopySpec),
}

/// Slot accesses of a writer and reader alternating one chunk at a time,
/// performing each wrap copy as soon as it is due.
pub fn layout_trace(plan: &CapacityPlan, cycles: usize) -> Vec<SlotOp> {
    let mut m = SlotMachine::new(plan, None);
    let mut out = Vec::new();
    let target = cycles * plan.rate * plan.factor;
    while m.acquired < target {
        let mut progressed = false;
        if m.written < target {
            if let Some(range) = m.begin_write() {
                m.end_write().unwrap();
                out.push(SlotOp::Write(range));
                progressed = true;
            }
        }
        while let Some(copy) = m.pending_copy() {
            m.complete_copy();
            out.push(SlotOp::Copy(copy));
        }
        if let Some(range) = m.begin_read() {
            m.end_read().unwrap();
            out.push(SlotOp::Read(range));
            progressed = true;
        }
        while let Some(copy) = m.pending_copy() {
            m.complete_copy();
            out.push(SlotOp::Copy(copy));
        }
        assert!(progressed, "layout stalled");
    }
    out
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FifoStats {
    pub written_tokens: usize,
    pub read_tokens: usize,
    pub max_occupancy: usize,
    pub copies: usize,
}

struct Inner {
    sm: SlotMachine,
    closed: bool,
    reader_closed: bool,
    poisoned: bool,
    discarding: bool,
    max_occupancy: usize,
}

struct Shared {
    name: String,
    token_bytes: usize,
    state: Mutex<Inner>,
    cond: Condvar,
    buf: UnsafeCell<Box<[u8]>>,
    trace: Option<Arc<TraceLog>>,
}

// SAFETY: the buffer is only touched through spans handed out by the slot
// machine, which never lets an open write span, an open read span and a wrap
// copy overlap. The copy itself runs under the state lock.
unsafe impl Sync for Shared {}
unsafe impl Send for Shared {}

impl Shared {
    fn lock(&self) -> MutexGuard<'_, Inner> {
        self.state.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn record(&self, op: TraceOp, occupancy: usize) {
        if let Some(t) = &self.trace {
            t.push(TraceEvent { fifo: self.name.clone(), op, occupancy });
        }
    }

    /// Performs due wrap copies. Caller holds the lock.
    fn run_copies(&self, inner: &mut Inner) {
        while let Some(copy) = inner.sm.pending_copy() {
            let b = self.token_bytes;
            // SAFETY: see the Sync impl; the copy ranges are free of open spans.
            unsafe {
                let buf = &mut *self.buf.get();
                buf.copy_within(copy.src.start * b..copy.src.end * b, copy.dst.start * b);
            }
            inner.sm.complete_copy();
            self.record(TraceOp::Copy, inner.sm.occupancy());
        }
    }

    fn span(&self, range: Range<usize>) -> *mut u8 {
        // SAFETY: range lies inside the buffer by construction of the plan.
        unsafe { (*self.buf.get()).as_mut_ptr().add(range.start * self.token_bytes) }
    }
}

/// Writing side of a channel.
pub struct Producer {
    shared: Arc<Shared>,
    span_len: usize,
    scratch: Vec<u8>,
}

/// Reading side of a channel.
pub struct Consumer {
    shared: Arc<Shared>,
    span_len: usize,
}

/// Observer handle for poisoning and statistics.
#[derive(Clone)]
pub struct FifoHandle {
    shared: Arc<Shared>,
}

/// Creates a channel laid out per `plan`, holding `initial` delay tokens.
pub fn channel(
    name: &str,
    plan: &CapacityPlan,
    initial: &[u8],
    cap: Option<usize>,
    trace: Option<Arc<TraceLog>>,
) -> Result<(Producer, Consumer, FifoHandle), FifoError> {
    let b = plan.token_bytes;
    if initial.len() != plan.delay * b {
        return Err(FifoError::InvalidParams(format!(
            "`{name}` needs {} initial bytes, got {}",
            plan.delay * b,
            initial.len()
        )));
    }
    if let Some(cap) = cap {
        if cap < plan.delay.max(plan.rate) {
            return Err(FifoError::InvalidParams(format!("`{name}` cap {cap} below delay or rate")));
        }
    }
    let mut buf = vec![0u8; plan.bytes].into_boxed_slice();
    buf[..initial.len()].copy_from_slice(initial);
    let shared = Arc::new(Shared {
        name: name.to_string(),
        token_bytes: b,
        state: Mutex::new(Inner {
            sm: SlotMachine::new(plan, cap),
            closed: false,
            reader_closed: false,
            poisoned: false,
            discarding: false,
            max_occupancy: plan.delay,
        }),
        cond: Condvar::new(),
        buf: UnsafeCell::new(buf),
        trace,
    });
    let span_len = plan.rate * b;
    Ok((
        Producer { shared: shared.clone(), span_len, scratch: Vec::new() },
        Consumer { shared: shared.clone(), span_len },
        FifoHandle { shared },
    ))
}

impl Producer {
    /// Blocks until a chunk is free and returns it for writing.
    pub fn write_start(&mut self) -> Result<&mut [u8], FifoError> {
        let sh = self.shared.clone();
        let mut inner = sh.lock();
        loop {
            if inner.poisoned {
                return Err(FifoError::Poisoned(sh.name.clone()));
            }
            if inner.sm.write_open().is_some() || inner.discarding {
                return Err(FifoError::ProtocolError { fifo: sh.name.clone(), message: "write already started".into() });
            }
            if inner.reader_closed {
                inner.discarding = true;
                drop(inner);
                self.scratch.resize(self.span_len, 0);
                return Ok(&mut self.scratch);
            }
            if let Some(range) = inner.sm.begin_write() {
                drop(inner);
                let ptr = sh.span(range);
                // SAFETY: exclusive chunk until write_end; lifetime tied to &mut self.
                return Ok(unsafe { std::slice::from_raw_parts_mut(ptr, self.span_len) });
            }
            inner = sh.cond.wait(inner).unwrap_or_else(|e| e.into_inner());
        }
    }

    /// Publishes the chunk obtained from `write_start`.
    pub fn write_end(&mut self) -> Result<(), FifoError> {
        let sh = &self.shared;
        let mut inner = sh.lock();
        if inner.discarding {
            inner.discarding = false;
            return Ok(());
        }
        if let Err(m) = inner.sm.end_write() {
            return Err(FifoError::ProtocolError { fifo: sh.name.clone(), message: m.into() });
        }
        let occ = inner.sm.occupancy();
        inner.max_occupancy = inner.max_occupancy.max(occ);
        sh.record(TraceOp::Write, occ);
        sh.run_copies(&mut inner);
        sh.cond.notify_all();
        Ok(())
    }

    /// Convenience: one full write of `data`.
    pub fn write(&mut self, data: &[u8]) -> Result<(), FifoError> {
        self.write_start()?.copy_from_slice(data);
        self.write_end()
    }

    /// Marks end of stream.
    pub fn close(&mut self) {
        let mut inner = self.shared.lock();
        inner.closed = true;
        self.shared.cond.notify_all();
    }
}

impl Drop for Producer {
    fn drop(&mut self) {
        self.close();
    }
}

impl Consumer {
    /// Blocks until a chunk is readable. `None` means end of stream.
    pub fn read_start(&mut self) -> Result<Option<&[u8]>, FifoError> {
        let sh = self.shared.clone();
        let mut inner = sh.lock();
        loop {
            if inner.poisoned {
                return Err(FifoError::Poisoned(sh.name.clone()));
            }
            if inner.sm.read_open().is_some() {
                return Err(FifoError::ProtocolError { fifo: sh.name.clone(), message: "read already started".into() });
            }
            if let Some(range) = inner.sm.begin_read() {
                let occ = inner.sm.occupancy();
                sh.record(TraceOp::Read, occ);
                sh.cond.notify_all();
                drop(inner);
                let ptr = sh.span(range);
                // SAFETY: chunk stays readable until read_end; lifetime tied to &mut self.
                return Ok(Some(unsafe { std::slice::from_raw_parts(ptr, self.span_len) }));
            }
            if inner.closed {
                return Ok(None);
            }
            inner = sh.cond.wait(inner).unwrap_or_else(|e| e.into_inner());
        }
    }

    pub fn read_end(&mut self) -> Result<(), FifoError> {
        let sh = &self.shared;
        let mut inner = sh.lock();
        if let Err(m) = inner.sm.end_read() {
            return Err(FifoError::ProtocolError { fifo: sh.name.clone(), message: m.into() });
        }
        sh.run_copies(&mut inner);
        sh.cond.notify_all();
        Ok(())
    }

    /// Reads one chunk into an owned vector.
    pub fn read(&mut self) -> Result<Option<Vec<u8>>, FifoError> {
        let data = match self.read_start()? {
            Some(s) => s.to_vec(),
            None => return Ok(None),
        };
        self.read_end()?;
        Ok(Some(data))
    }

    /// Tells the writer nobody will read again; its writes are discarded.
    pub fn close(&mut self) {
        let mut inner = self.shared.lock();
        inner.reader_closed = true;
        self.shared.cond.notify_all();
    }
}

impl Drop for Consumer {
    fn drop(&mut self) {
        self.close();
    }
}

impl FifoHandle {
    pub fn name(&self) -> &str {
        &self.shared.name
    }

    /// Wakes every blocked party with `Poisoned`.
    pub fn poison(&self) {
        let mut inner = self.shared.lock();
        inner.poisoned = true;
        self.shared.cond.notify_all();
    }

    pub fn stats(&self) -> FifoStats {
        let inner = self.shared.lock();
        FifoStats {
            written_tokens: inner.sm.written(),
            read_tokens: inner.sm.acquired(),
            max_occupancy: inner.max_occupancy,
            copies: inner.sm.copies_done(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::thread;

    #[test]
    fn capacity_examples() {
        assert_eq!(capacity(4, 1, 1, 3), Ok(13));
        assert_eq!(capacity(1, 4, 0, 2), Ok(8));
        assert_eq!(capacity(4, 1, 8, 3), Ok(12));
        assert_eq!(capacity(3, 2, 2, 2), Ok(16));
        assert!(capacity(0, 1, 0, 3).is_err());
        assert!(capacity(1, 0, 0, 3).is_err());
        assert!(capacity(1, 1, 0, 1).is_err());
    }

    #[test]
    fn fig6_layout() {
        let p = layout_plan(4, 1, 3).unwrap();
        assert_eq!(p.slots, 13);
        assert_eq!(p.write_chunks, [1, 5, 9]);
        assert_eq!(p.read_chunks, [0, 4, 8]);
        assert_eq!(p.copy, Some(CopySpec { src: 12..13, dst: 0..1 }));
    }

    #[test]
    fn ring_without_copy() {
        let p = layout_plan(1, 0, 3).unwrap();
        assert_eq!(p.slots, 3);
        assert!(p.copy.is_none());
        assert_eq!(p.read_chunks, [0, 1, 2]);
    }

    #[test]
    fn two_three_two_layout_preserves_order() {
        let p = layout_plan(2, 3, 2).unwrap();
        assert_eq!(p.slots, 7);
        assert_eq!(p.write_chunks, [3, 5]);
        assert_eq!(p.read_chunks, [0, 2]);
        assert_eq!(p.copy, Some(CopySpec { src: 4..7, dst: 0..3 }));
        // Simulate 4 cycles of slot contents.
        let trace = layout_trace(&p, 4);
        let mut slots: Vec<i64> = vec![-1; 7];
        for (i, s) in slots.iter_mut().take(3).enumerate() {
            *s = -10 - i as i64;
        }
        let mut next = 0i64;
        let mut got = Vec::new();
        for op in trace {
            match op {
                SlotOp::Write(r) => {
                    for s in r {
                        slots[s] = next;
                        next += 1;
                    }
                }
                SlotOp::Read(r) => got.extend(r.map(|s| slots[s])),
                SlotOp::Copy(c) => {
                    let src: Vec<i64> = slots[c.src.clone()].to_vec();
                    slots[c.dst].copy_from_slice(&src);
                }
            }
        }
        let mut expected = vec![-10, -11, -12];
        expected.extend(0..(16 - 3));
        assert_eq!(got, expected);
    }

    #[test]
    fn delayed_first_read_returns_initial_token() {
        let p = plan(4, 1, 1, 3).unwrap();
        let (mut tx, mut rx, _) = channel("f", &p, &[0xD], None, None).unwrap();
        tx.write(&[1, 2, 3, 4]).unwrap();
        assert_eq!(rx.read().unwrap().unwrap(), vec![0xD, 1, 2, 3]);
    }

    #[test]
    fn end_without_start_is_protocol_error() {
        let p = plan(1, 1, 0, 2).unwrap();
        let (mut tx, mut rx, _) = channel("f", &p, &[], None, None).unwrap();
        assert!(matches!(tx.write_end(), Err(FifoError::ProtocolError { .. })));
        assert!(matches!(rx.read_end(), Err(FifoError::ProtocolError { .. })));
    }

    #[test]
    fn full_fifo_blocks_writer_until_read() {
        let p = plan(1, 1, 0, 3).unwrap();
        let (mut tx, mut rx, h) = channel("f", &p, &[], None, None).unwrap();
        for i in 0..3 {
            tx.write(&[i]).unwrap();
        }
        let writer = thread::spawn(move || {
            tx.write(&[3]).unwrap();
            tx
        });
        thread::sleep(std::time::Duration::from_millis(30));
        assert_eq!(h.stats().written_tokens, 3);
        assert_eq!(rx.read().unwrap(), Some(vec![0]));
        let _tx = writer.join().unwrap();
        assert_eq!(h.stats().written_tokens, 4);
    }

    #[test]
    fn poison_wakes_blocked_reader() {
        let p = plan(1, 1, 0, 2).unwrap();
        let (_tx, mut rx, h) = channel("f", &p, &[], None, None).unwrap();
        let t = thread::spawn(move || rx.read().map(|_| ()));
        thread::sleep(std::time::Duration::from_millis(20));
        h.poison();
        assert!(matches!(t.join().unwrap(), Err(FifoError::Poisoned(_))));
    }

    #[test]
    fn close_yields_end_of_stream_after_data() {
        let p = plan(2, 1, 0, 2).unwrap();
        let (mut tx, mut rx, _) = channel("f", &p, &[], None, None).unwrap();
        tx.write(&[1, 2]).unwrap();
        tx.close();
        assert_eq!(rx.read().unwrap(), Some(vec![1, 2]));
        assert_eq!(rx.read().unwrap(), None);
    }

    #[test]
    fn closed_reader_makes_writes_vanish() {
        let p = plan(1, 1, 0, 2).unwrap();
        let (mut tx, mut rx, h) = channel("f", &p, &[], None, None).unwrap();
        rx.close();
        for i in 0..10 {
            tx.write(&[i]).unwrap();
        }
        assert_eq!(h.stats().written_tokens, 0);
    }

    #[test]
    fn cap_limits_queued_tokens() {
        let p = plan(1, 1, 0, 4).unwrap();
        let (mut tx, _rx, h) = channel("f", &p, &[], Some(2), None).unwrap();
        tx.write(&[0]).unwrap();
        tx.write(&[1]).unwrap();
        let t = thread::spawn(move || {
            let r = tx.write(&[2]);
            (r, tx)
        });
        thread::sleep(std::time::Duration::from_millis(20));
        assert_eq!(h.stats().written_tokens, 2);
        h.poison();
        assert!(t.join().unwrap().0.is_err());
    }

    fn stress(r: usize, q: usize, c: usize, cycles: usize) {
        let p = plan(r, 2, q, c).unwrap();
        let initial: Vec<u8> = (0..q * 2).map(|i| 200u8.wrapping_add(i as u8)).collect();
        let (mut tx, mut rx, h) = channel("f", &p, &initial, None, None).unwrap();
        let n = cycles * r;
        let writer = thread::spawn(move || {
            for i in 0..cycles {
                let span = tx.write_start().unwrap();
                for (j, b) in span.iter_mut().enumerate() {
                    *b = ((i * r * 2 + j) % 251) as u8;
                }
                tx.write_end().unwrap();
            }
        });
        let mut got = Vec::new();
        while let Some(chunk) = rx.read().unwrap() {
            got.extend(chunk);
        }
        writer.join().unwrap();
        let mut expected = initial.clone();
        expected.extend((0..n * 2).map(|j| (j % 251) as u8));
        let whole = got.len();
        assert_eq!(got[..], expected[..whole]);
        assert!(expected.len() - whole < r * 2);
        assert!(h.stats().max_occupancy <= p.slots);
    }

    #[test]
    fn interleaved_thousand_cycle_stress() {
        stress(4, 1, 3, 1000);
        stress(3, 7, 2, 1000);
        stress(2, 4, 2, 1000);
        stress(1, 0, 2, 1000);
    }

    #[derive(Debug, Clone, Copy)]
    enum Step {
        WriteStart,
        WriteEnd,
        ReadStart,
        ReadEnd,
    }

    fn step() -> impl Strategy<Value = Step> {
        prop_oneof![Just(Step::WriteStart), Just(Step::WriteEnd), Just(Step::ReadStart), Just(Step::ReadEnd)]
    }

    proptest! {
        #[test]
        fn capacity_matches_case_split(r in 1usize..9, b in 1usize..9, q in 0usize..40, c in 2usize..5) {
            let expected = if q % r != 0 { b * (r * c + q) } else { b * std::cmp::max(r * c, q) };
            prop_assert_eq!(capacity(r, b, q, c).unwrap(), expected);
        }

        /// Random interleavings of the two sides: open spans and copies never
        /// clobber each other, order is kept, occupancy stays within the slots.
        #[test]
        fn random_interleaving_is_safe(
            r in 1usize..5, q in 0usize..12, c in 2usize..4,
            steps in proptest::collection::vec(step(), 1..400),
        ) {
            const PENDING: i64 = i64::MAX;
            let p = layout_plan(r, q, c).unwrap();
            let mut m = SlotMachine::new(&p, None);
            let mut slots: Vec<i64> = vec![i64::MIN; p.slots];
            for (i, s) in slots.iter_mut().take(q).enumerate() {
                *s = -(i as i64) - 1;
            }
            let mut next = 0i64;
            let mut expected: std::collections::VecDeque<i64> = (0..q).map(|i| -(i as i64) - 1).collect();
            let mut open_read: Vec<i64> = Vec::new();
            for step in steps {
                match step {
                    Step::WriteStart => {
                        if let Some(w) = m.begin_write() {
                            for s in w { slots[s] = PENDING; }
                        }
                    }
                    Step::WriteEnd => {
                        if let Some(w) = m.write_open() {
                            for s in w { slots[s] = next; expected.push_back(next); next += 1; }
                            m.end_write().unwrap();
                        }
                    }
                    Step::ReadStart => {
                        if let Some(rd) = m.begin_read() {
                            open_read = rd.map(|s| slots[s]).collect();
                            for &v in &open_read { prop_assert_eq!(Some(v), expected.pop_front()); }
                        }
                    }
                    Step::ReadEnd => {
                        if let Some(rd) = m.read_open() {
                            let now: Vec<i64> = rd.map(|s| slots[s]).collect();
                            prop_assert_eq!(&now, &open_read);
                            m.end_read().unwrap();
                        }
                    }
                }
                while let Some(cp) = m.pending_copy() {
                    if let Some(rd) = m.read_open() {
                        prop_assert!(cp.dst.end <= rd.start || rd.end <= cp.dst.start);
                    }
                    if let Some(w) = m.write_open() {
                        prop_assert!(cp.src.end <= w.start || w.end <= cp.src.start);
                        prop_assert!(cp.dst.end <= w.start || w.end <= cp.dst.start);
                    }
                    let src: Vec<i64> = slots[cp.src.clone()].to_vec();
                    slots[cp.dst].copy_from_slice(&src);
                    m.complete_copy();
                }
                prop_assert!(m.occupancy() <= p.slots);
            }
        }
    }
}

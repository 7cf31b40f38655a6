//! Per-transaction FIFO trace shared by the runtime and the interpreter.
//!
//! Rendered one line per event: `fifo_id op occupancy`, with op one of
//! `w`, `r`, `copy`.

use std::fmt;
use std::sync::Mutex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TraceOp {
    Write,
    Read,
    Copy,
}

impl TraceOp {
    pub fn as_str(self) -> &'static str {
        match self {
            TraceOp::Write => "w",
            TraceOp::Read => "r",
            TraceOp::Copy => "copy",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEvent {
    pub fifo: String,
    pub op: TraceOp,
    /// Tokens held by the FIFO right after the transaction.
    pub occupancy: usize,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.fifo, self.op.as_str(), self.occupancy)
    }
}

#[derive(Debug, Default)]
pub struct TraceLog {
    events: Mutex<Vec<TraceEvent>>,
}

impl TraceLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&self, event: TraceEvent) {
        self.events.lock().unwrap_or_else(|e| e.into_inner()).push(event);
    }

    pub fn take(&self) -> Vec<TraceEvent> {
        std::mem::take(&mut *self.events.lock().unwrap_or_else(|e| e.into_inner()))
    }
}

pub fn render(events: &[TraceEvent]) -> String {
    let mut s = String::new();
    for e in events {
        s.push_str(&e.to_string());
        s.push('\n');
    }
    s
}

/// Parses the line format back; used to check trace files against bounds.
pub fn parse_line(line: &str) -> Option<(String, TraceOp, usize)> {
    let mut it = line.split_whitespace();
    let fifo = it.next()?.to_string();
    let op = match it.next()? {
        "w" => TraceOp::Write,
        "r" => TraceOp::Read,
        "copy" => TraceOp::Copy,
        _ => return None,
    };
    let occ = it.next()?.parse().ok()?;
    if it.next().is_some() {
        return None;
    }
    Some((fifo, op, occ))
}

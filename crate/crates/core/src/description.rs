//! External JSON graph format.
//!
//! ```json
//! {
//!   "name": "example",
//!   "actors": [
//!     {"id": "src", "kind": "static", "behavior": "source", "params": {},
//!      "ports": [{"id": "o", "dir": "out", "kind": "srp", "rate": 1}]}
//!   ],
//!   "fifos": [
//!     {"id": "f", "src": "src.o", "dst": "snk.i", "rate": 1, "delay": 0, "token_bytes": 4}
//!   ],
//!   "control_table": [{"control": "q.c", "drp": "x.p", "element": 1}]
//! }
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::graph::{ActorKind, Direction, PortKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDescription {
    #[serde(default)]
    pub name: String,
    pub actors: Vec<ActorDesc>,
    #[serde(default)]
    pub fifos: Vec<FifoDesc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub control_table: Vec<ControlEntryDesc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActorDesc {
    pub id: String,
    pub kind: ActorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub behavior: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, Value>,
    #[serde(default)]
    pub ports: Vec<PortDesc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortDesc {
    pub id: String,
    pub dir: Direction,
    pub kind: PortKind,
    pub rate: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control_len: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FifoDesc {
    pub id: String,
    pub src: String,
    pub dst: String,
    pub rate: u32,
    #[serde(default)]
    pub delay: u32,
    pub token_bytes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delay_payload_hex: Option<String>,
    /// Raw payload file, relative to the graph file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delay_payload_file: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlEntryDesc {
    pub control: String,
    pub drp: String,
    pub element: u32,
}

#[derive(Debug, Error)]
pub enum DescriptionError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("schema error at `{field}` (line {line}, column {column}): {message}")]
    Schema { field: String, line: usize, column: usize, message: String },
}

impl GraphDescription {
    pub fn from_json_str(text: &str) -> Result<Self, DescriptionError> {
        let mut de = serde_json::Deserializer::from_str(text);
        let parsed: Result<GraphDescription, _> = serde_path_to_error::deserialize(&mut de);
        let desc = match parsed {
            Ok(d) => d,
            Err(e) => {
                let field = e.path().to_string();
                let inner = e.into_inner();
                let (line, column) = (inner.line(), inner.column());
                return Err(match inner.classify() {
                    serde_json::error::Category::Data => {
                        DescriptionError::Schema { field, line, column, message: strip_position(&inner) }
                    }
                    _ => DescriptionError::Parse { line, column, message: strip_position(&inner) },
                });
            }
        };
        de.end().map_err(|e| DescriptionError::Parse {
            line: e.line(),
            column: e.column(),
            message: strip_position(&e),
        })?;
        Ok(desc)
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("description serializes");
        s.push('\n');
        s
    }

    /// Inlines every `delay_payload_file` as hex, resolving paths against `base`.
    pub fn resolve_payload_files(&mut self, base: &Path) -> Result<(), DescriptionError> {
        for f in &mut self.fifos {
            if let Some(rel) = f.delay_payload_file.take() {
                let path = base.join(&rel);
                let bytes = fs::read(&path).map_err(|source| DescriptionError::Io { path, source })?;
                f.delay_payload_hex = Some(hex::encode(bytes));
            }
        }
        Ok(())
    }
}

fn strip_position(e: &serde_json::Error) -> String {
    let s = e.to_string();
    match s.rfind(" at line ") {
        Some(i) => s[..i].to_string(),
        None => s,
    }
}

/// Reads, validates and payload-resolves a graph file.
pub fn parse_graph_file(path: &Path) -> Result<GraphDescription, DescriptionError> {
    let text = fs::read_to_string(path).map_err(|source| DescriptionError::Io { path: path.to_path_buf(), source })?;
    let mut desc = GraphDescription::from_json_str(&text)?;
    desc.resolve_payload_files(path.parent().unwrap_or(Path::new(".")))?;
    Ok(desc)
}

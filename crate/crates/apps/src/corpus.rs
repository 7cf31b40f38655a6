//! Corpus bundles: graph, run parameters, expected analysis facts and golden
//! sink digests.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use drflow_core::interp::{interpret_graph, InterpConfig, InterpError};
use drflow_core::runtime::RuntimeConfig;
use drflow_core::{build_graph, Graph, GraphDescription};
use serde_json::{json, Value};

pub use crate::bypass::app_adaptive_bypass;
pub use crate::dpd::app_dynamic_predistortion;
pub use crate::motion::app_motion_detection;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpectedFacts {
    pub dpgs: usize,
    /// Control-value length of each DPG.
    pub m: Vec<usize>,
    /// Analysed bound per FIFO name.
    pub beta: BTreeMap<String, u32>,
}

#[derive(Debug, Clone)]
pub struct CorpusApp {
    pub name: String,
    pub description: GraphDescription,
    /// Firings of every source actor.
    pub firings: u64,
    /// Seed handed to the behavior registry.
    pub seed: u64,
    pub expected: ExpectedFacts,
}

impl CorpusApp {
    pub fn graph(&self) -> Graph {
        build_graph(&self.description).expect("corpus graphs are well formed")
    }

    pub fn interp_config(&self) -> InterpConfig {
        InterpConfig { default_firings: self.firings, seed: self.seed, ..Default::default() }
    }

    pub fn runtime_config(&self) -> RuntimeConfig {
        RuntimeConfig { default_firings: self.firings, seed: self.seed, ..Default::default() }
    }

    /// Sink digests from the reference interpreter.
    pub fn golden(&self) -> Result<BTreeMap<String, String>, InterpError> {
        let r = interpret_graph(&self.graph(), &crate::registry(), &self.interp_config())?;
        Ok(r.sinks.into_iter().map(|(k, v)| (k, v.digest)).collect())
    }

    pub fn golden_json(&self) -> Result<Value, InterpError> {
        Ok(json!({
            "app": self.name,
            "seed": self.seed,
            "firings": self.firings,
            "sinks": self.golden()?,
        }))
    }
}

/// The three applications at their default desk-scale sizes.
pub fn all_apps() -> Vec<CorpusApp> {
    vec![
        app_motion_detection(64, 64, 16, 1),
        app_dynamic_predistortion(4, 10, 256, 2),
        app_adaptive_bypass(16, 3),
    ]
}

/// Writes `<name>.json` and `<name>.golden.json` for each app into `dir`.
pub fn write_corpus(dir: &Path) -> io::Result<Vec<String>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for app in all_apps() {
        let graph = app.description.to_json_string();
        let golden = app.golden_json().map_err(|e| io::Error::other(e.to_string()))?;
        let gpath = dir.join(format!("{}.json", app.name));
        let dpath = dir.join(format!("{}.golden.json", app.name));
        fs::write(&gpath, graph)?;
        fs::write(&dpath, serde_json::to_string_pretty(&golden).expect("json value") + "\n")?;
        written.push(gpath.display().to_string());
        written.push(dpath.display().to_string());
    }
    Ok(written)
}

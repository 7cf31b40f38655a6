use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::Args;
use drflow_apps::registry;
use drflow_core::analysis::analyze as analyze_graph;
use drflow_core::fifo::{plan, FifoError};
use drflow_core::interp::{interpret_graph, InterpConfig, InterpError};
use drflow_core::rules::check_all;
use drflow_core::runtime::{run_graph, RuntimeConfig, RuntimeError};
use drflow_core::{build_graph, parse_graph_file, DescriptionError, Graph, GraphError};
use thiserror::Error;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILED_CHECK: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_RUNTIME: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Description(#[from] DescriptionError),
    #[error("{0}")]
    Graph(#[from] GraphError),
    #[error("{0}")]
    Capacity(#[from] FifoError),
    #[error("bad --pin entry `{0}`, expected actor=cpu")]
    Pin(String),
    #[error("{0}")]
    Runtime(RuntimeError),
    #[error("reference interpreter: {0}")]
    Interp(InterpError),
    #[error("sink digests differ from the reference interpreter: {0}")]
    OracleMismatch(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Description(_) | CliError::Graph(_) | CliError::Capacity(_) | CliError::Pin(_) => EXIT_INPUT,
            CliError::Io { .. } => EXIT_INPUT,
            CliError::Runtime(RuntimeError::InconsistentGraph(_)) => EXIT_FAILED_CHECK,
            CliError::Runtime(RuntimeError::Behavior(_)) => EXIT_INPUT,
            CliError::Interp(InterpError::Behavior { .. }) => EXIT_INPUT,
            CliError::Runtime(_) | CliError::Interp(_) | CliError::OracleMismatch(_) => EXIT_RUNTIME,
        }
    }
}

fn load(path: &Path) -> Result<Graph, CliError> {
    Ok(build_graph(&parse_graph_file(path)?)?)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

pub fn check(path: &Path) -> Result<u8, CliError> {
    let g = load(path)?;
    let violations = check_all(&g);
    for v in &violations {
        println!("{v}");
    }
    if violations.is_empty() {
        println!("ok: no design-rule violations");
        Ok(EXIT_OK)
    } else {
        Ok(EXIT_FAILED_CHECK)
    }
}

pub fn analyze(path: &Path, out: Option<&Path>) -> Result<u8, CliError> {
    let g = load(path)?;
    let report = analyze_graph(&g);
    let text = report.render(&g);
    match out {
        Some(o) => fs::write(o, &text).map_err(io_err(o))?,
        None => print!("{text}"),
    }
    Ok(if report.is_consistent() { EXIT_OK } else { EXIT_FAILED_CHECK })
}

pub fn capacity(path: &Path, c: usize) -> Result<u8, CliError> {
    let g = load(path)?;
    println!("c_factor: {c}");
    for (_, f) in g.fifos() {
        let p = plan(f.rate as usize, f.token_bytes, f.delay as usize, c)?;
        let copy = match &p.copy {
            Some(cp) => format!("{}..{}->{}..{}", cp.src.start, cp.src.end, cp.dst.start, cp.dst.end),
            None => "none".into(),
        };
        println!(
            "{} r={} B={} Q={} slots={} bytes={} wrap={} writes={:?} reads={:?} copy={}",
            f.name, p.rate, p.token_bytes, p.delay, p.slots, p.bytes, p.needs_wrap_copy, p.write_chunks, p.read_chunks, copy
        );
    }
    Ok(EXIT_OK)
}

#[derive(Args, Debug)]
pub struct RunArgs {
    pub path: PathBuf,
    /// Firings per source actor.
    #[arg(long, default_value_t = 16)]
    pub iterations: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Comma-separated `actor=cpu` pairs.
    #[arg(long)]
    pub pin: Option<String>,
    /// Write the FIFO transaction trace here.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Also run the reference interpreter and compare sink digests.
    #[arg(long)]
    pub oracle: bool,
    #[arg(long = "c-factor", default_value_t = 2)]
    pub c_factor: usize,
    #[arg(long = "timeout-ms", default_value_t = 60_000)]
    pub timeout_ms: u64,
}

fn parse_pins(spec: &str) -> Result<BTreeMap<String, usize>, CliError> {
    spec.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|entry| {
            let (a, c) = entry.split_once('=').ok_or_else(|| CliError::Pin(entry.into()))?;
            let cpu = c.trim().parse().map_err(|_| CliError::Pin(entry.into()))?;
            Ok((a.trim().to_string(), cpu))
        })
        .collect()
}

pub fn run(args: &RunArgs) -> Result<u8, CliError> {
    let g = load(&args.path)?;
    let pinning = args.pin.as_deref().map(parse_pins).transpose()?.unwrap_or_default();
    for actor in pinning.keys() {
        if g.actor_by_name(actor).is_none() {
            return Err(CliError::Pin(format!("{actor} (no such actor)")));
        }
    }
    let config = RuntimeConfig {
        default_firings: args.iterations,
        seed: args.seed,
        factor: args.c_factor,
        pinning,
        timeout: Some(Duration::from_millis(args.timeout_ms)),
        trace: args.trace.is_some(),
        ..Default::default()
    };
    let reg = registry();
    let report = run_graph(&g, &reg, &config).map_err(CliError::Runtime)?;
    if let Some(t) = &args.trace {
        let mut f = fs::File::create(t).map_err(io_err(t))?;
        f.write_all(drflow_core::trace::render(&report.trace).as_bytes()).map_err(io_err(t))?;
    }

    println!("graph: {}", g.name());
    println!("firings:");
    for (a, n) in &report.firings {
        println!("  {a} {n}");
    }
    println!("sinks:");
    for (s, o) in &report.sinks {
        println!("  {s} bytes={} sha256={}", o.bytes, o.digest);
    }
    println!("fifos:");
    for (name, f) in &report.fifos {
        println!("  {name} max={} beta={} slots={}", f.max_occupancy, f.beta, f.slots);
    }
    println!("rate_violations: {}", report.rate_violations);
    eprintln!("wall_time_ms: {:.3}", report.wall_time.as_secs_f64() * 1e3);

    if args.oracle {
        let icfg = InterpConfig { default_firings: args.iterations, seed: args.seed, ..Default::default() };
        let oracle = interpret_graph(&g, &reg, &icfg).map_err(CliError::Interp)?;
        let mismatched: Vec<&str> = oracle
            .sinks
            .iter()
            .filter(|(s, o)| report.sinks.get(*s).map(|r| &r.digest) != Some(&o.digest))
            .map(|(s, _)| s.as_str())
            .collect();
        if !mismatched.is_empty() {
            return Err(CliError::OracleMismatch(mismatched.join(", ")));
        }
        println!("oracle: match");
    }
    Ok(if report.rate_violations == 0 { EXIT_OK } else { EXIT_RUNTIME })
}

pub fn corpus(dir: &Path) -> Result<u8, CliError> {
    for p in drflow_apps::corpus::write_corpus(dir).map_err(io_err(dir))? {
        println!("wrote {p}");
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pins_parse() {
        let p = parse_pins("a=0, b=3").unwrap();
        assert_eq!(p["a"], 0);
        assert_eq!(p["b"], 3);
        assert!(parse_pins("a").is_err());
        assert!(parse_pins("a=x").is_err());
    }
}

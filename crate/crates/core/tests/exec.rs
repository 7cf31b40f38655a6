use std::path::PathBuf;

use drflow_core::analysis::analyze;
use drflow_core::behavior::{Behavior, BehaviorError, ControlToken, Firing, Registry};
use drflow_core::builder::GraphBuilder;
use drflow_core::interp::{interpret, InterpConfig};
use drflow_core::runtime::{instantiate, run_graph, Jitter, RuntimeConfig};
use drflow_core::{build_graph, parse_graph_file, Graph};

struct Bytes(Vec<u8>);
impl Behavior for Bytes {
    fn fire(&mut self, f: &mut Firing<'_>) -> Result<(), BehaviorError> {
        let v = self.0.get(f.index as usize).copied().unwrap_or(0);
        f.outputs.iter_mut().for_each(|o| o.fill(v));
        Ok(())
    }
}

struct Pass;
impl Behavior for Pass {
    fn fire(&mut self, f: &mut Firing<'_>) -> Result<(), BehaviorError> {
        let data: Vec<u8> = f.inputs.iter().flat_map(|i| i.iter().copied()).collect();
        for o in f.outputs.iter_mut().filter(|o| !o.is_empty()) {
            if data.is_empty() {
                o.fill(0xee);
            } else {
                o.copy_from_slice(&data[..o.len()]);
            }
        }
        Ok(())
    }
}

struct Ctl(Vec<Vec<bool>>);
impl Behavior for Ctl {
    fn fire(&mut self, f: &mut Firing<'_>) -> Result<(), BehaviorError> {
        let bits = self.0[f.index as usize % self.0.len()].clone();
        ControlToken::new(bits).write_to(f.outputs[0]);
        Ok(())
    }
}

fn registry(inputs: Vec<u8>, control: Vec<Vec<bool>>) -> Registry {
    let mut r = Registry::new();
    r.register("source", move |_, _, _| Ok(Box::new(Bytes(inputs.clone()))));
    r.register("passthrough", |_, _, _| Ok(Box::new(Pass)));
    r.register("sink", |_, _, _| Ok(Box::new(Pass)));
    r.register("control", move |_, _, _| Ok(Box::new(Ctl(control.clone()))));
    r
}

fn fixture(name: &str) -> Graph {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(format!("{name}.json"));
    build_graph(&parse_graph_file(&path).unwrap()).unwrap()
}

fn chain(stages: usize) -> Graph {
    let mut b = GraphBuilder::new("chain");
    b.token_bytes(1).source("s", 1).sink("k", 1);
    let mut prev = "s.o".to_string();
    for i in 0..stages {
        let a = format!("a{i}");
        b.stat(&a, &["i"], &["o"]);
        b.fifo(&prev, &format!("{a}.i"));
        prev = format!("{a}.o");
    }
    b.fifo(&prev, "k.i");
    build_graph(&b.build()).unwrap()
}

#[test]
fn pass_through_chain_delivers_inputs() {
    let g = chain(1);
    let reg = registry(vec![1, 2, 3], vec![]);
    let cfg = InterpConfig { default_firings: 3, capture_sinks: true, ..Default::default() };
    let i = interpret(&g, reg.instantiate(&g, 0).unwrap(), &cfg).unwrap();
    assert_eq!(i.sinks["k"].data.as_deref(), Some(&[1, 2, 3][..]));
    assert!(i.max_occupancy.values().all(|&m| m == 1));
    let rcfg = RuntimeConfig { default_firings: 3, capture_sinks: true, ..Default::default() };
    let r = run_graph(&g, &reg, &rcfg).unwrap();
    assert_eq!(r.sinks["k"].data.as_deref(), Some(&[1, 2, 3][..]));
}

#[test]
fn three_stage_chain_fires_every_actor_equally() {
    let g = chain(3);
    let reg = registry((0..100).collect(), vec![]);
    let r = run_graph(&g, &reg, &RuntimeConfig { default_firings: 100, ..Default::default() }).unwrap();
    assert!(r.firings.values().all(|&n| n == 100), "{:?}", r.firings);
}

#[test]
fn broadcast_reaches_every_branch() {
    let mut b = GraphBuilder::new("fan");
    b.token_bytes(1).source("s", 1).sink("k1", 1).sink("k2", 1).sink("k3", 1);
    b.fifo("s.o", "k1.i").fifo("s.o", "k2.i").fifo("s.o", "k3.i");
    let g = build_graph(&b.build()).unwrap();
    let reg = registry(vec![5, 6, 7, 8], vec![]);
    let i = interpret(&g, reg.instantiate(&g, 0).unwrap(), &InterpConfig { default_firings: 4, ..Default::default() })
        .unwrap();
    assert!(i.max_occupancy.values().all(|&m| m == 1));
    let r = run_graph(&g, &reg, &RuntimeConfig { default_firings: 4, ..Default::default() }).unwrap();
    for k in ["k1", "k2", "k3"] {
        assert_eq!(r.firings[k], 4);
        assert_eq!(r.sinks[k].digest, i.sinks[k].digest);
    }
}

#[test]
fn delayed_fifo_hands_out_the_zero_payload_first() {
    let g = fixture("fig6_fifo");
    let reg = registry(vec![9, 9, 9], vec![]);
    let cfg = InterpConfig { default_firings: 3, capture_sinks: true, ..Default::default() };
    let i = interpret(&g, reg.instantiate(&g, 0).unwrap(), &cfg).unwrap();
    let data = i.sinks["snk"].data.clone().unwrap();
    assert_eq!(data[0], 0);
    assert_eq!(&data[1..4], &[9, 9, 9]);
    let rcfg = RuntimeConfig { default_firings: 3, capture_sinks: true, factor: 3, ..Default::default() };
    assert_eq!(run_graph(&g, &reg, &rcfg).unwrap().sinks["snk"].data.as_ref().unwrap(), &data);
}

#[test]
fn gated_fig4_matches_interpreter_under_jitter() {
    let g = fixture("fig4");
    let patterns = vec![
        vec![true, false, true],
        vec![false, false, false],
        vec![true, true, true],
        vec![false, true, false],
        vec![false, false, true],
    ];
    let reg = registry((0..50).collect(), patterns);
    let i = interpret(&g, reg.instantiate(&g, 0).unwrap(), &InterpConfig { default_firings: 50, ..Default::default() })
        .unwrap();
    let r = analyze(&g);
    for (f, fifo) in g.fifos() {
        assert!(i.max_occupancy[&fifo.name] <= r.beta(f).unwrap() as usize);
    }
    for seed in 0..10 {
        let cfg = RuntimeConfig {
            default_firings: 50,
            jitter: Some(Jitter { seed, probability: 0.3, max_delay: std::time::Duration::from_micros(300) }),
            ..Default::default()
        };
        let run = run_graph(&g, &reg, &cfg).unwrap();
        assert_eq!(run.sinks["snk"].digest, i.sinks["snk"].digest);
        assert_eq!(run.firings, i.firings);
        assert_eq!(run.rate_violations, 0);
    }
    // a1..a3 fire only when element 1 is set: twice per five control values.
    assert_eq!(i.firings["a1"], 20);
    assert_eq!(i.firings["a4"], 20);
}

#[test]
fn inactive_component_at_end_of_stream_still_terminates() {
    let g = fixture("fig4");
    let reg = registry(vec![1; 8], vec![vec![false, false, false]]);
    let r = run_graph(&g, &reg, &RuntimeConfig { default_firings: 8, ..Default::default() }).unwrap();
    assert_eq!(r.firings["a1"], 0);
    assert_eq!(r.firings["y"], 8);
}

#[test]
fn empty_graph_is_a_no_op() {
    let g = build_graph(&GraphBuilder::new("empty").build()).unwrap();
    let rt = instantiate(&g, vec![], &RuntimeConfig::default()).unwrap();
    let r = rt.run().unwrap();
    assert!(r.firings.is_empty());
}

use std::collections::BTreeSet;
use std::path::PathBuf;

use drflow_core::analysis::{analyze, decompose_dcs, identify_dpgs, validate_dpg, DpgDiagnostic};
use drflow_core::graph::adjacency;
use drflow_core::rules::{check_all, find_linked_drps};
use drflow_core::{build_graph, parse_graph_file, Graph};

fn fixture(name: &str) -> Graph {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(format!("{name}.json"));
    build_graph(&parse_graph_file(&path).unwrap()).unwrap()
}

fn rules_of(name: &str) -> Vec<u8> {
    check_all(&fixture(name)).iter().map(|v| v.rule).collect()
}

#[test]
fn rule_fixtures_report_their_caption_rule() {
    assert_eq!(rules_of("fig3a"), Vec::<u8>::new());
    assert_eq!(rules_of("fig3b"), Vec::<u8>::new());
    assert_eq!(rules_of("fig3c"), vec![3]);
    assert_eq!(rules_of("fig3d"), vec![4]);
    assert_eq!(rules_of("fig3e"), vec![5]);
    assert_eq!(rules_of("fig3_composite"), vec![3, 4, 5]);
    assert_eq!(rules_of("fig4"), Vec::<u8>::new());
    assert_eq!(rules_of("static_chain"), Vec::<u8>::new());
}

#[test]
fn fig3c_names_a2() {
    let v = check_all(&fixture("fig3c"));
    assert_eq!(v[0].subjects, ["a2"]);
    assert_eq!(v[0].name, "connecting subchain");
}

#[test]
fn fig4_linked_pairs() {
    let g = fixture("fig4");
    let pairs: Vec<(String, String)> =
        find_linked_drps(&g).iter().map(|p| (g.port_path(p.px), g.port_path(p.py))).collect();
    let expected: Vec<(String, String)> = [("x.px1", "y.py1"), ("x.px2", "y.py1"), ("x.px3", "y.py2"), ("x.px4", "y.py3")]
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
    assert_eq!(pairs, expected);
}

#[test]
fn fig4_adjacency_contains_figure_edges() {
    let g = fixture("fig4");
    let adj = adjacency(&g);
    let id = |n: &str| g.actor_by_name(n).unwrap();
    for (a, b) in [("x", "a1"), ("a1", "a3"), ("a3", "y"), ("x", "y"), ("x", "a4"), ("a4", "y")] {
        assert!(adj.adjacent(id(a), id(b)) && adj.adjacent(id(b), id(a)), "{a}~{b}");
    }
    for a in g.actor_ids() {
        assert!(!adj.adjacent(a, a));
    }
}

#[test]
fn fig4_decomposes_into_three_components() {
    let g = fixture("fig4");
    let r = analyze(&g);
    assert!(r.is_consistent(), "{}", r.render(&g));
    let dcs: Vec<Vec<String>> = r.dpgs[0].dcs.iter().map(|dc| dc.member_names(&g)).collect();
    assert_eq!(dcs, vec![vec!["a1", "a2", "a3"], vec!["a4"], vec!["d"]]);
    let text = r.render(&g);
    assert!(text.contains("Z1 = {a1, a2, a3}"));
    assert!(text.contains("Z2 = {a4}"));
    assert!(text.contains("Z3 = {d}"));
    // The dummy stays out of schedules and bounds.
    let after_dcs = &text[text.find("schedules:").unwrap()..];
    assert!(!after_dcs.split_whitespace().any(|w| w == "d"));
}

#[test]
fn fig4_with_short_control_value_fails_bijection() {
    let g = fixture("fig4_len2");
    let dpg = decompose_dcs(&g, &identify_dpgs(&g).unwrap()[0]);
    let diags = validate_dpg(&g, &dpg);
    assert!(diags.iter().any(|d| matches!(d, DpgDiagnostic::BijectionFailure { .. })), "{diags:?}");
    assert!(!analyze(&g).is_consistent());
}

#[test]
fn doubled_fig4_has_two_dpgs() {
    let g = fixture("fig4_double");
    let dpgs = identify_dpgs(&g).unwrap();
    assert_eq!(dpgs.len(), 2);
    let r = analyze(&g);
    assert!(r.is_consistent(), "{}", r.render(&g));
    for d in &r.dpgs {
        assert_eq!(d.dcs.len(), 3);
        let mut all: BTreeSet<_> = d.members.clone();
        all.retain(|a| g.actor_name(*a).starts_with(&g.actor_name(d.x)[..2]));
        assert_eq!(all.len(), d.members.len());
    }
}

#[test]
fn zero_delay_cycle_names_the_cycle() {
    let g = fixture("cycle_zero_delay");
    let r = analyze(&g);
    assert!(!r.is_consistent());
    let text = r.render(&g);
    assert!(text.contains("DeadlockError"), "{text}");
    assert!(text.contains("a -> b -> a") || text.contains("b -> a -> b"), "{text}");
    assert!(analyze(&fixture("cycle_delayed")).is_consistent());
}

#[test]
fn two_independent_chains_give_two_components() {
    use drflow_core::builder::GraphBuilder;
    let mut b = GraphBuilder::new("two");
    b.source("s", 1).configuration("q", &[("c", 2)]);
    b.dynamic("x", &[("i", "in")], &[("p1", "out"), ("p2", "out")]);
    b.dynamic("y", &[("o", "out")], &[("p1", "in"), ("p2", "in")]);
    b.stat("a", &["i"], &["o"]).stat("b", &["i"], &["o"]).sink("k", 1);
    b.fifo("s.o", "x.i").fifo("x.p1", "a.i").fifo("a.o", "y.p1").fifo("x.p2", "b.i").fifo("b.o", "y.p2");
    b.fifo("y.o", "k.i").fifo("q.c", "x.ctl").fifo("q.c", "y.ctl");
    b.control("q.c", "x.p1", 1).control("q.c", "y.p1", 1).control("q.c", "x.p2", 2).control("q.c", "y.p2", 2);
    let g = build_graph(&b.build()).unwrap();
    let r = analyze(&g);
    assert!(r.is_consistent());
    // Connected components by brute force: each DC actor reaches no other DC actor without x/y/q.
    assert_eq!(r.dpgs[0].dcs.len(), 2);
}

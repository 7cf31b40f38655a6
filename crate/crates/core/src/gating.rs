//! Per-firing token rates of dynamic ports.
//!
//! A DRP moves `atr` tokens when its control element is true and none
//! otherwise; every other port moves `atr` tokens each firing.

use crate::behavior::ControlToken;
use crate::graph::{ActorId, Graph, PortId, PortKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PortRate {
    Fixed(u32),
    Gated { element: u32, atr: u32 },
}

impl PortRate {
    pub fn tokens(self, token: Option<&ControlToken>) -> u32 {
        match (self, token) {
            (PortRate::Fixed(r), _) => r,
            (PortRate::Gated { element, atr }, Some(t)) => t.element(element) as u32 * atr,
            (PortRate::Gated { .. }, None) => 0,
        }
    }
}

/// Rate rules for an actor's data inputs and outputs, in firing order.
#[derive(Debug, Clone)]
pub struct RatePlan {
    pub inputs: Vec<(PortId, PortRate)>,
    pub outputs: Vec<(PortId, PortRate)>,
    pub control_len: Option<usize>,
}

impl RatePlan {
    pub fn new(graph: &Graph, actor: ActorId) -> Self {
        let rate = |p: PortId| {
            let port = graph.port(p);
            if port.kind == PortKind::Drp {
                let c = graph.control_lookup(p).expect("validated graph: every DRP is controlled");
                PortRate::Gated { element: c.element, atr: port.atr }
            } else {
                PortRate::Fixed(port.atr)
            }
        };
        let control_len = graph.cport(actor).map(|c| graph.fifo(graph.input_fifo(c)).token_bytes);
        RatePlan {
            inputs: graph.data_inputs(actor).into_iter().map(|p| (p, rate(p))).collect(),
            outputs: graph.outputs(actor).into_iter().map(|p| (p, rate(p))).collect(),
            control_len,
        }
    }
}

/// A firing whose observed transfer count on a port disagrees with the
/// control table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RateViolation {
    pub port: PortId,
    pub expected: u32,
    pub observed: u32,
}

/// Recomputes each port's token count from the raw control table and compares
/// it with what the executor actually moved.
pub fn check_firing(
    graph: &Graph,
    actor: ActorId,
    token: Option<&ControlToken>,
    observed: &[(PortId, u32)],
) -> Vec<RateViolation> {
    let table = graph.control_table();
    let mut out = Vec::new();
    for &(p, got) in observed {
        let port = graph.port(p);
        debug_assert_eq!(port.actor, actor);
        let expected = if port.kind == PortKind::Drp {
            let mut elements = table.rows().iter().map(|&c| table.entry(c, p)).filter(|&e| e != 0);
            match (elements.next(), elements.next(), token) {
                (Some(e), None, Some(t)) if (e as usize) <= t.bits.len() => {
                    if t.bits[e as usize - 1] {
                        port.atr
                    } else {
                        0
                    }
                }
                _ => u32::MAX,
            }
        } else {
            port.atr
        };
        if expected != got {
            out.push(RateViolation { port: p, expected, observed: got });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builder::GraphBuilder;
    use crate::build_graph;

    fn graph() -> Graph {
        let mut b = GraphBuilder::new("g");
        b.source("s", 1).configuration("q", &[("c", 2)]);
        b.dynamic("x", &[("i", "in")], &[("p1", "out"), ("p2", "out")]);
        b.dynamic("y", &[("o", "out")], &[("p1", "in"), ("p2", "in")]);
        b.stat("a", &["i"], &["o"]).stat("b", &["i"], &["o"]).sink("k", 1);
        b.rate("x.p2", 3).rate("b.i", 3).rate("b.o", 3).rate("y.p2", 3);
        b.fifo("s.o", "x.i").fifo("x.p1", "a.i").fifo("a.o", "y.p1").fifo("x.p2", "b.i").fifo("b.o", "y.p2");
        b.fifo("y.o", "k.i").fifo("q.c", "x.ctl").fifo("q.c", "y.ctl");
        b.control("q.c", "x.p1", 1).control("q.c", "y.p1", 1).control("q.c", "x.p2", 2).control("q.c", "y.p2", 2);
        build_graph(&b.build()).unwrap()
    }

    #[test]
    fn gated_rates_follow_elements() {
        let g = graph();
        let x = g.actor_by_name("x").unwrap();
        let plan = RatePlan::new(&g, x);
        assert_eq!(plan.control_len, Some(2));
        let t = ControlToken::new(vec![false, true]);
        let rates: Vec<u32> = plan.outputs.iter().map(|(_, r)| r.tokens(Some(&t))).collect();
        assert_eq!(rates, [0, 3]);
        assert_eq!(plan.inputs[0].1.tokens(Some(&t)), 1);
    }

    #[test]
    fn checker_agrees_with_plan_and_flags_mismatch() {
        let g = graph();
        let y = g.actor_by_name("y").unwrap();
        let plan = RatePlan::new(&g, y);
        for bits in [[false, false], [true, false], [false, true], [true, true]] {
            let t = ControlToken::new(bits.to_vec());
            let obs: Vec<(PortId, u32)> =
                plan.inputs.iter().chain(&plan.outputs).map(|&(p, r)| (p, r.tokens(Some(&t)))).collect();
            assert!(check_firing(&g, y, Some(&t), &obs).is_empty());
        }
        let p1 = g.port_by_path("y.p1").unwrap();
        let v = check_firing(&g, y, Some(&ControlToken::new(vec![false, false])), &[(p1, 1)]);
        assert_eq!(v, [RateViolation { port: p1, expected: 0, observed: 1 }]);
    }
}

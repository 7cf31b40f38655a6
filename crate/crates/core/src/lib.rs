//! Dynamic-rate dataflow: graph model, design-rule checks, consistency
//! analysis, bounded FIFOs and a thread-per-actor runtime.

pub mod analysis;
pub mod behavior;
pub mod builder;
pub mod description;
pub mod fifo;
pub mod gating;
pub mod graph;
pub mod interp;
pub mod rules;
pub mod runtime;
pub mod trace;

pub use description::{parse_graph_file, DescriptionError, GraphDescription};
pub use graph::{
    adjacency, build_graph, Actor, ActorId, ActorKind, Adjacency, ControlRef, Direction, Fifo, FifoId, Graph,
    GraphError, Port, PortId, PortKind,
};

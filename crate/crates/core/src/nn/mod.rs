//! Minimal fully-connected classifier with hand-written backprop, plain SGD,
//! and the bridge between weight matrices and graph filtrations.

mod checkpoint;
mod mlp;
mod subgraph;

pub use mlp::{Gradients, Mlp};
pub use subgraph::{
    apply_chain_factor, extract_subgraphs, scatter_topo_gradient, subgraph_weights, SubgraphSpec,
};

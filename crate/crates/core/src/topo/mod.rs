//! Graph filtrations, birth/death decomposition and closed-form Wasserstein
//! geometry on cycle death sets. All arithmetic is `f64`.

mod graph;
mod oracle;
mod persistence;
mod wasserstein;

pub use graph::{Edge, UnionFind, WeightedGraph};
pub use oracle::{oracle_matching_distance, oracle_persistence, MAX_MATCHING_SIZE};
pub use persistence::{
    betti_curve, birth_death_decompose, BettiCurve, Feature, PersistenceDescriptor,
    WeightTransform,
};
pub use wasserstein::{
    barycenter_objective, barycenter_online_update, cycle_barycenter, induced_weights,
    wasserstein_cycle_distance, wasserstein_cycle_gradient, CycleBarycenter,
};

//! Bipartite 1-skeletons cut out of consecutive layers, and the scatter of
//! per-edge topological gradients back onto weight coordinates.
//!
//! Subgraph `k` built from weight matrix `l` puts the `layer_sizes[l]`
//! input-side neurons first and numbers its edges in the row-major order of
//! the matrix, so edge id `e` is exactly the flat index `row * n_in + col`.
//! Biases never enter a subgraph.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::mlp::{Gradients, Mlp};
use crate::error::{Error, Result};
use crate::topo::{WeightTransform, WeightedGraph};

/// Which neuron-layer pairs form regularized subgraphs. Each pair `(a, a+1)`
/// selects weight matrix `a`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgraphSpec {
    pub layer_pairs: Vec<(usize, usize)>,
}

impl SubgraphSpec {
    /// The last `k` weight matrices of a network with `layer_count` neuron
    /// layers. For a two-hidden-layer MLP and `k = 2` this is
    /// hidden1–hidden2 and hidden2–output.
    pub fn output_side(layer_count: usize, k: usize) -> Self {
        let matrices = layer_count.saturating_sub(1);
        let first = matrices.saturating_sub(k);
        SubgraphSpec {
            layer_pairs: (first..matrices).map(|a| (a, a + 1)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.layer_pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layer_pairs.is_empty()
    }

    pub fn validate(&self, net: &Mlp) -> Result<()> {
        let layers = net.layer_sizes().len();
        let mut seen = Vec::new();
        for &(a, b) in &self.layer_pairs {
            if b != a + 1 || b >= layers {
                return Err(Error::InvalidSpec(format!(
                    "pair ({a}, {b}) is not two consecutive layers of a {layers}-layer network"
                )));
            }
            if seen.contains(&a) {
                return Err(Error::InvalidSpec(format!("pair ({a}, {b}) listed twice")));
            }
            seen.push(a);
        }
        Ok(())
    }

    /// Weight coordinate `(matrix, row, col)` of an edge in subgraph `k`.
    pub fn edge_coordinate(&self, net: &Mlp, k: usize, edge_id: usize) -> Result<(usize, usize, usize)> {
        let &(a, _) = self
            .layer_pairs
            .get(k)
            .ok_or_else(|| Error::InvalidSpec(format!("no subgraph {k}")))?;
        let n_in = net.layer_sizes()[a];
        if edge_id >= net.weights(a).len() {
            return Err(Error::InvalidEdgeId { subgraph: k, edge_id });
        }
        Ok((a, edge_id / n_in, edge_id % n_in))
    }
}

impl fmt::Display for SubgraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.layer_pairs.iter().map(|(a, b)| format!("{a}-{b}")).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for SubgraphSpec {
    type Err = Error;

    /// Parses `"1-2,2-3"`; the empty string is an empty spec.
    fn from_str(s: &str) -> Result<Self> {
        let mut layer_pairs = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (a, b) = part
                .split_once('-')
                .ok_or_else(|| Error::InvalidSpec(format!("expected a-b, got {part:?}")))?;
            let parse = |v: &str| {
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidSpec(format!("bad layer index {v:?}")))
            };
            layer_pairs.push((parse(a)?, parse(b)?));
        }
        Ok(SubgraphSpec { layer_pairs })
    }
}

/// Filtration values of subgraph `k`'s edges, indexed by edge id.
pub fn subgraph_weights(net: &Mlp, spec: &SubgraphSpec, k: usize, transform: WeightTransform) -> Vec<f64> {
    let (a, _) = spec.layer_pairs[k];
    net.weights(a)
        .iter()
        .map(|&w| transform.apply(f64::from(w)))
        .collect()
}

/// One complete bipartite graph per layer pair.
pub fn extract_subgraphs(
    net: &Mlp,
    spec: &SubgraphSpec,
    transform: WeightTransform,
) -> Result<Vec<WeightedGraph>> {
    spec.validate(net)?;
    spec.layer_pairs
        .iter()
        .enumerate()
        .map(|(k, &(a, b))| {
            let sizes = net.layer_sizes();
            WeightedGraph::complete_bipartite(sizes[a], sizes[b], &subgraph_weights(net, spec, k, transform))
        })
        .collect()
}

/// Multiplies each edge gradient by d(filtration value)/d(weight).
pub fn apply_chain_factor(
    net: &Mlp,
    spec: &SubgraphSpec,
    transform: WeightTransform,
    edge_grads: &mut [Vec<f64>],
) {
    if transform == WeightTransform::Raw {
        return;
    }
    for (k, grads) in edge_grads.iter_mut().enumerate() {
        let w = net.weights(spec.layer_pairs[k].0);
        for (g, &wi) in grads.iter_mut().zip(w) {
            *g *= transform.chain_factor(f64::from(wi));
        }
    }
}

/// `acc[coord] += lambda * grad` for every edge of every subgraph. Birth
/// edges carry zero gradients and so leave the accumulator untouched.
pub fn scatter_topo_gradient(
    acc: &mut Gradients,
    spec: &SubgraphSpec,
    edge_grads: &[Vec<f64>],
    lambda: f64,
) -> Result<()> {
    if edge_grads.len() != spec.len() {
        return Err(Error::InvalidSpec(format!(
            "{} gradient vectors for {} subgraphs",
            edge_grads.len(),
            spec.len()
        )));
    }
    for (k, (grads, &(a, _))) in edge_grads.iter().zip(&spec.layer_pairs).enumerate() {
        let target = acc
            .weights
            .get_mut(a)
            .ok_or_else(|| Error::InvalidSpec(format!("no weight matrix {a}")))?;
        if grads.len() != target.len() {
            return Err(Error::InvalidEdgeId {
                subgraph: k,
                edge_id: grads.len().min(target.len()),
            });
        }
        for (t, g) in target.iter_mut().zip(grads) {
            *t += lambda * g;
        }
    }
    Ok(())
}

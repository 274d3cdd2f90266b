//! Undirected weighted graphs (1-skeletons) and the disjoint-set forest used
//! to sweep their filtrations.

use std::collections::HashSet;

use crate::error::{Error, Result};

/// One undirected edge. `id` is the stable index of the edge in its graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
    pub id: usize,
}

/// A connected, simple, undirected weighted graph with stable edge indexing.
///
/// Edge ids are always `0..edge_count()` in the order the edges were given.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    node_count: usize,
    edges: Vec<Edge>,
}

impl WeightedGraph {
    /// Builds a graph from `(a, b, weight)` triples, validating that it is
    /// simple, has finite weights and is connected.
    pub fn new(node_count: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        if node_count == 0 {
            return Err(Error::InvalidGraph("graph needs at least one node".into()));
        }
        let mut seen = HashSet::with_capacity(edges.len());
        let mut out = Vec::with_capacity(edges.len());
        for (id, &(a, b, weight)) in edges.iter().enumerate() {
            if a >= node_count || b >= node_count {
                return Err(Error::InvalidGraph(format!(
                    "edge {id} ({a}, {b}) references a node outside 0..{node_count}"
                )));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("edge {id} is a self-loop on {a}")));
            }
            if !weight.is_finite() {
                return Err(Error::InvalidGraph(format!("edge {id} has weight {weight}")));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(Error::InvalidGraph(format!(
                    "edge {id} duplicates the pair ({a}, {b})"
                )));
            }
            out.push(Edge { a, b, weight, id });
        }
        let graph = WeightedGraph {
            node_count,
            edges: out,
        };
        let components = graph.component_count();
        if components != 1 {
            return Err(Error::DisconnectedGraph { components });
        }
        Ok(graph)
    }

    /// Complete bipartite graph between `left` and `right` nodes. Left nodes
    /// are `0..left`, right nodes `left..left + right`; `weights` is a
    /// row-major `right × left` matrix, so edge id `r * left + c` joins left
    /// node `c` with right node `left + r`.
    pub fn complete_bipartite(left: usize, right: usize, weights: &[f64]) -> Result<Self> {
        if left == 0 || right == 0 {
            return Err(Error::InvalidGraph("bipartite sides must be non-empty".into()));
        }
        if weights.len() != left * right {
            return Err(Error::shape(left * right, weights.len()));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite()) {
            return Err(Error::InvalidGraph(format!("non-finite weight {w}")));
        }
        let edges = weights
            .iter()
            .enumerate()
            .map(|(id, &weight)| Edge {
                a: id % left,
                b: left + id / left,
                weight,
                id,
            })
            .collect();
        Ok(WeightedGraph {
            node_count: left + right,
            edges,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.edges.iter().map(|e| e.weight)
    }

    /// Returns a copy with every weight passed through `f`.
    pub fn map_weights(&self, mut f: impl FnMut(f64) -> f64) -> Self {
        WeightedGraph {
            node_count: self.node_count,
            edges: self
                .edges
                .iter()
                .map(|e| Edge {
                    weight: f(e.weight),
                    ..*e
                })
                .collect(),
        }
    }

    fn component_count(&self) -> usize {
        let mut uf = UnionFind::new(self.node_count);
        for e in &self.edges {
            uf.union(e.a, e.b);
        }
        uf.components()
    }
}

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
    components: usize,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
            components: n,
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merges the sets of `a` and `b`; returns false if already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        self.components -= 1;
        true
    }

    pub fn components(&self) -> usize {
        self.components
    }
}

//! Birth/death decomposition of a graph filtration and its Betti curves.
//!
//! The filtration keeps an edge while its weight is strictly greater than the
//! filtration value, so edges disappear in ascending weight order. Removing an
//! edge either splits a component (a birth) or destroys a cycle (a death).
//! Births are exactly the maximum-spanning-tree edges.

use std::cmp::Ordering;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::graph::{UnionFind, WeightedGraph};
use crate::error::{Error, Result};

/// A filtration value together with the edge that produces it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Feature {
    pub value: f64,
    pub edge_id: usize,
}

fn ascending(a: &Feature, b: &Feature) -> Ordering {
    a.value
        .total_cmp(&b.value)
        .then_with(|| a.edge_id.cmp(&b.edge_id))
}

/// Birth set and death set of a graph, each sorted ascending by value with
/// ties broken by edge id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersistenceDescriptor {
    pub births: Vec<Feature>,
    pub deaths: Vec<Feature>,
}

impl PersistenceDescriptor {
    pub(crate) fn from_unsorted(mut births: Vec<Feature>, mut deaths: Vec<Feature>) -> Self {
        births.sort_by(ascending);
        deaths.sort_by(ascending);
        PersistenceDescriptor { births, deaths }
    }

    pub fn edge_count(&self) -> usize {
        self.births.len() + self.deaths.len()
    }

    pub fn birth_values(&self) -> Vec<f64> {
        self.births.iter().map(|f| f.value).collect()
    }

    pub fn death_values(&self) -> Vec<f64> {
        self.deaths.iter().map(|f| f.value).collect()
    }

    /// Keeps the birth/death membership but re-reads every value through
    /// `weight_of(edge_id)` and re-sorts. Used between decompositions, when
    /// weights have moved but the spanning tree is not recomputed.
    pub fn with_current_weights(&self, mut weight_of: impl FnMut(usize) -> f64) -> Self {
        let mut reread = |fs: &[Feature]| -> Vec<Feature> {
            fs.iter()
                .map(|f| Feature {
                    value: weight_of(f.edge_id),
                    edge_id: f.edge_id,
                })
                .collect()
        };
        let births = reread(&self.births);
        let deaths = reread(&self.deaths);
        Self::from_unsorted(births, deaths)
    }

    /// Writes one `edge_id weight birth|death` line per edge, ordered by
    /// edge id.
    pub fn write_dump<W: Write>(&self, mut out: W) -> io::Result<()> {
        let mut rows: Vec<(usize, f64, &str)> = self
            .births
            .iter()
            .map(|f| (f.edge_id, f.value, "birth"))
            .chain(self.deaths.iter().map(|f| (f.edge_id, f.value, "death")))
            .collect();
        rows.sort_by_key(|r| r.0);
        for (id, value, kind) in rows {
            writeln!(out, "{id} {value} {kind}")?;
        }
        Ok(())
    }
}

/// Decomposes the edge set into births (maximum spanning tree) and deaths
/// (all remaining edges) with Kruskal's algorithm. Equal weights are
/// processed in ascending edge id order.
pub fn birth_death_decompose(g: &WeightedGraph) -> Result<PersistenceDescriptor> {
    let edges = g.edges();
    let mut order: Vec<usize> = (0..edges.len()).collect();
    order.sort_by(|&i, &j| {
        edges[j]
            .weight
            .total_cmp(&edges[i].weight)
            .then_with(|| edges[i].id.cmp(&edges[j].id))
    });

    let mut uf = UnionFind::new(g.node_count());
    let mut births = Vec::with_capacity(g.node_count().saturating_sub(1));
    let mut deaths = Vec::with_capacity(edges.len().saturating_sub(births.capacity()));
    for i in order {
        let e = &edges[i];
        let f = Feature {
            value: e.weight,
            edge_id: e.id,
        };
        if uf.union(e.a, e.b) {
            births.push(f);
        } else {
            deaths.push(f);
        }
    }
    if uf.components() != 1 {
        return Err(Error::DisconnectedGraph {
            components: uf.components(),
        });
    }
    Ok(PersistenceDescriptor::from_unsorted(births, deaths))
}

/// Component and cycle counts along the filtration.
///
/// `thresholds[0]` is `-inf` (the full graph); the rest are the distinct edge
/// weights in ascending order. Entry `i` describes the graph that keeps the
/// edges with weight strictly above `thresholds[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BettiCurve {
    pub thresholds: Vec<f64>,
    pub beta0: Vec<usize>,
    pub beta1: Vec<usize>,
}

impl BettiCurve {
    /// `(beta0, beta1)` at an arbitrary filtration value.
    pub fn at(&self, eps: f64) -> (usize, usize) {
        // thresholds[0] is -inf, so the partition point is at least 1.
        let i = self.thresholds.partition_point(|&t| t <= eps) - 1;
        (self.beta0[i], self.beta1[i])
    }

    pub fn write_dump<W: Write>(&self, mut out: W) -> io::Result<()> {
        for i in 0..self.thresholds.len() {
            writeln!(out, "{} {} {}", self.thresholds[i], self.beta0[i], self.beta1[i])?;
        }
        Ok(())
    }
}

/// Sweeps the filtration from the top, adding edges in descending weight
/// order to one union-find and reading off the counts at every threshold.
pub fn betti_curve(g: &WeightedGraph) -> BettiCurve {
    let mut distinct: Vec<f64> = g.weights().collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();

    let mut thresholds = Vec::with_capacity(distinct.len() + 1);
    thresholds.push(f64::NEG_INFINITY);
    thresholds.extend_from_slice(&distinct);

    let n = g.node_count();
    let mut order: Vec<usize> = (0..g.edge_count()).collect();
    order.sort_by(|&i, &j| g.edges()[j].weight.total_cmp(&g.edges()[i].weight));

    let mut uf = UnionFind::new(n);
    let mut beta0 = vec![0; thresholds.len()];
    let mut beta1 = vec![0; thresholds.len()];
    let mut next = 0;
    for k in (0..thresholds.len()).rev() {
        let t = thresholds[k];
        while next < order.len() && g.edges()[order[next]].weight > t {
            let e = &g.edges()[order[next]];
            uf.union(e.a, e.b);
            next += 1;
        }
        beta0[k] = uf.components();
        beta1[k] = next + uf.components() - n;
    }
    BettiCurve {
        thresholds,
        beta0,
        beta1,
    }
}

/// How network weights become filtration values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightTransform {
    /// Signed weights are used as-is.
    #[default]
    Raw,
    /// The filtration sees `|w|`; gradients pick up `sign(w)`.
    Absolute,
}

impl WeightTransform {
    pub fn apply(self, w: f64) -> f64 {
        match self {
            WeightTransform::Raw => w,
            WeightTransform::Absolute => w.abs(),
        }
    }

    /// d(apply(w))/dw, taken as 0 at w = 0 for the absolute value.
    pub fn chain_factor(self, w: f64) -> f64 {
        match self {
            WeightTransform::Raw => 1.0,
            WeightTransform::Absolute => {
                if w > 0.0 {
                    1.0
                } else if w < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
        }
    }
}

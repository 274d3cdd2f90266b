//! Brute-force references for the closed forms. These deliberately avoid the
//! spanning-tree and sorting shortcuts so they can check them.

use super::graph::{UnionFind, WeightedGraph};
use super::persistence::{Feature, PersistenceDescriptor};
use crate::error::{Error, Result};

/// Largest death set the exhaustive matching accepts (7! bijections).
pub const MAX_MATCHING_SIZE: usize = 7;

/// Persistence by exhaustive threshold sweep.
///
/// At every distinct weight a fresh union-find counts components of the
/// thresholded graph; cycles follow from `beta1 = E - |V| + beta0`. A rise
/// in `beta0` marks births at that weight and a drop in `beta1` marks deaths.
/// Edge ids are only meaningful when weights are distinct; under ties the
/// lower ids at a given weight are labelled births.
pub fn oracle_persistence(g: &WeightedGraph) -> Result<PersistenceDescriptor> {
    let n = g.node_count();
    let counts = |eps: f64| -> (usize, usize) {
        let mut uf = UnionFind::new(n);
        let mut kept = 0;
        for e in g.edges() {
            if e.weight > eps {
                uf.union(e.a, e.b);
                kept += 1;
            }
        }
        (uf.components(), kept + uf.components() - n)
    };

    let (beta0_full, _) = counts(f64::NEG_INFINITY);
    if beta0_full != 1 {
        return Err(Error::DisconnectedGraph {
            components: beta0_full,
        });
    }

    let mut by_weight: Vec<&super::graph::Edge> = g.edges().iter().collect();
    by_weight.sort_by(|a, b| a.weight.total_cmp(&b.weight).then(a.id.cmp(&b.id)));

    let mut births = Vec::new();
    let mut deaths = Vec::new();
    let mut prev = counts(f64::NEG_INFINITY);
    let mut start = 0;
    while start < by_weight.len() {
        let w = by_weight[start].weight;
        let end = start + by_weight[start..].iter().take_while(|e| e.weight == w).count();
        let now = counts(w);
        let born = now.0 - prev.0;
        let died = prev.1 - now.1;
        debug_assert_eq!(born + died, end - start);
        for (k, e) in by_weight[start..end].iter().enumerate() {
            let f = Feature {
                value: e.weight,
                edge_id: e.id,
            };
            if k < born {
                births.push(f);
            } else {
                deaths.push(f);
            }
        }
        prev = now;
        start = end;
    }
    Ok(PersistenceDescriptor::from_unsorted(births, deaths))
}

/// Minimum squared matching cost over every bijection between two death sets.
pub fn oracle_matching_distance(d_g: &[f64], d_h: &[f64]) -> Result<f64> {
    if d_g.len() != d_h.len() {
        return Err(Error::CardinalityMismatch {
            left: d_g.len(),
            right: d_h.len(),
        });
    }
    if d_g.len() > MAX_MATCHING_SIZE {
        return Err(Error::TooLarge {
            len: d_g.len(),
            max: MAX_MATCHING_SIZE,
        });
    }
    let cost = |perm: &[usize]| -> f64 {
        perm.iter()
            .enumerate()
            .map(|(i, &j)| (d_g[i] - d_h[j]).powi(2))
            .sum()
    };
    // Heap's algorithm, iterative form.
    let n = d_g.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = cost(&perm);
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            best = best.min(cost(&perm));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_oracle() {
        let g = WeightedGraph::new(3, &[(0, 1, 3.0), (1, 2, 2.0), (0, 2, 1.0)]).unwrap();
        let d = oracle_persistence(&g).unwrap();
        assert_eq!(d.death_values(), vec![1.0]);
        assert_eq!(d.birth_values(), vec![2.0, 3.0]);
    }

    #[test]
    fn tree_oracle() {
        let g = WeightedGraph::new(4, &[(0, 1, 0.1), (0, 2, 0.2), (0, 3, 0.3)]).unwrap();
        assert!(oracle_persistence(&g).unwrap().deaths.is_empty());
    }

    #[test]
    fn matching_examples() {
        assert_eq!(oracle_matching_distance(&[1.0, 3.0], &[0.0, 4.0]).unwrap(), 2.0);
        assert_eq!(oracle_matching_distance(&[0.4, 0.1], &[0.4, 0.1]).unwrap(), 0.0);
        assert_eq!(
            oracle_matching_distance(&[0.0, 1.0, 2.0], &[5.0, 6.0, 7.0]).unwrap(),
            75.0
        );
        assert_eq!(oracle_matching_distance(&[], &[]).unwrap(), 0.0);
    }

    #[test]
    fn matching_enumerates_all_permutations() {
        // Unsorted inputs: the optimum pairs by rank, not by position.
        let d = oracle_matching_distance(&[3.0, 1.0, 2.0], &[10.0, 30.0, 20.0]).unwrap();
        assert_eq!(d, 81.0 + 324.0 + 729.0);
    }

    #[test]
    fn matching_limits() {
        let big = vec![0.0; 8];
        assert!(matches!(
            oracle_matching_distance(&big, &big),
            Err(Error::TooLarge { len: 8, max: 7 })
        ));
        assert!(matches!(
            oracle_matching_distance(&[1.0], &[]),
            Err(Error::CardinalityMismatch { .. })
        ));
    }
}

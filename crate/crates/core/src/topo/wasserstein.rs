//! Closed-form optimal transport between death sets.
//!
//! Death sets of same-architecture graphs have equal cardinality, so the
//! optimal matching pairs the l-th smallest values of both sets. Distance,
//! gradient and barycenter all reduce to element-wise arithmetic on sorted
//! vectors. Empty death sets (tree-shaped graphs) are valid everywhere.

use serde::{Deserialize, Serialize};

use super::persistence::PersistenceDescriptor;
use crate::error::{Error, Result};

fn check_len(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::CardinalityMismatch { left, right });
    }
    Ok(())
}

fn check_positive(index: usize, value: f64) -> Result<()> {
    if !(value > 0.0) || !value.is_finite() {
        return Err(Error::NonPositiveWeight { index, value });
    }
    Ok(())
}

/// Squared 2-Wasserstein distance between two sorted death sets.
pub fn wasserstein_cycle_distance(d_g: &[f64], d_h: &[f64]) -> Result<f64> {
    check_len(d_g.len(), d_h.len())?;
    Ok(d_g
        .iter()
        .zip(d_h)
        .map(|(a, b)| (a - b) * (a - b))
        .sum())
}

/// Gradient of the squared distance to `target` with respect to every edge
/// weight, indexed by edge id. Birth edges get 0; the l-th smallest death
/// edge gets `2 (d_l - target_l)`.
pub fn wasserstein_cycle_gradient(
    desc: &PersistenceDescriptor,
    target: &CycleBarycenter,
) -> Result<Vec<f64>> {
    check_len(desc.deaths.len(), target.death_values.len())?;
    let mut grad = vec![0.0; desc.edge_count()];
    for (death, &t) in desc.deaths.iter().zip(&target.death_values) {
        grad[death.edge_id] = 2.0 * (death.value - t);
    }
    Ok(grad)
}

/// Sorted death values representing the weighted centroid of several graphs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleBarycenter {
    pub death_values: Vec<f64>,
    /// Total weight of the graphs folded into this barycenter.
    pub mass: f64,
}

impl CycleBarycenter {
    /// Barycenter of a single death set with unit mass.
    pub fn from_deaths(deaths: &[f64]) -> Self {
        CycleBarycenter {
            death_values: deaths.to_vec(),
            mass: 1.0,
        }
    }

    pub fn len(&self) -> usize {
        self.death_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.death_values.is_empty()
    }
}

/// Weighted element-wise mean of sorted death sets.
pub fn cycle_barycenter(death_sets: &[Vec<f64>], weights: &[f64]) -> Result<CycleBarycenter> {
    check_len(death_sets.len(), weights.len())?;
    if death_sets.is_empty() {
        return Err(Error::CardinalityMismatch { left: 0, right: 1 });
    }
    for (i, &w) in weights.iter().enumerate() {
        check_positive(i, w)?;
    }
    let len = death_sets[0].len();
    for set in death_sets {
        check_len(len, set.len())?;
    }
    let mass: f64 = weights.iter().sum();
    let death_values = (0..len)
        .map(|l| {
            death_sets
                .iter()
                .zip(weights)
                .map(|(set, w)| w * set[l])
                .sum::<f64>()
                / mass
        })
        .collect();
    Ok(CycleBarycenter { death_values, mass })
}

/// Folds one more death set into a barycenter: `(p·prev + q·new) / (p + q)`.
///
/// The result is the batch barycenter in which the new set carries weight
/// `q/p` times the previous mass, which is how `mass` is updated.
pub fn barycenter_online_update(
    prev: &CycleBarycenter,
    new_deaths: &[f64],
    p: f64,
    q: f64,
) -> Result<CycleBarycenter> {
    check_len(prev.len(), new_deaths.len())?;
    check_positive(0, p)?;
    check_positive(1, q)?;
    let death_values = prev
        .death_values
        .iter()
        .zip(new_deaths)
        .map(|(a, b)| (p * a + q * b) / (p + q))
        .collect();
    Ok(CycleBarycenter {
        death_values,
        mass: prev.mass * (p + q) / p,
    })
}

/// Batch weights reproduced by `tasks - 1` online updates with `(p, q)`:
/// with `rho = q / (p + q)`, the first set gets `(1 - rho)^(tasks - 1)` and
/// set `i >= 2` gets `rho (1 - rho)^(tasks - i)`. They sum to one.
pub fn induced_weights(tasks: usize, p: f64, q: f64) -> Vec<f64> {
    let rho = q / (p + q);
    (1..=tasks)
        .map(|i| {
            let decay = (1.0 - rho).powi((tasks - i) as i32);
            if i == 1 {
                decay
            } else {
                rho * decay
            }
        })
        .collect()
}

/// Weighted sum of squared distances from `candidate` to every death set,
/// the quantity the barycenter minimizes.
pub fn barycenter_objective(candidate: &[f64], death_sets: &[Vec<f64>], weights: &[f64]) -> Result<f64> {
    check_len(death_sets.len(), weights.len())?;
    death_sets
        .iter()
        .zip(weights)
        .map(|(set, w)| wasserstein_cycle_distance(candidate, set).map(|d| w * d))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topo::persistence::Feature;

    #[test]
    fn distance_examples() {
        assert_eq!(wasserstein_cycle_distance(&[0.3, 0.9], &[0.3, 0.9]).unwrap(), 0.0);
        assert_eq!(wasserstein_cycle_distance(&[1.0, 3.0], &[0.0, 4.0]).unwrap(), 2.0);
        let d = wasserstein_cycle_distance(&[0.5], &[0.7]).unwrap();
        assert!((d - 0.04).abs() < 1e-15);
        assert_eq!(wasserstein_cycle_distance(&[], &[]).unwrap(), 0.0);
    }

    #[test]
    fn distance_rejects_mismatch() {
        assert!(matches!(
            wasserstein_cycle_distance(&[1.0], &[1.0, 2.0]),
            Err(Error::CardinalityMismatch { left: 1, right: 2 })
        ));
    }

    fn one_death_descriptor() -> PersistenceDescriptor {
        PersistenceDescriptor {
            births: vec![
                Feature { value: 2.0, edge_id: 1 },
                Feature { value: 3.0, edge_id: 0 },
            ],
            deaths: vec![Feature { value: 1.0, edge_id: 2 }],
        }
    }

    #[test]
    fn gradient_examples() {
        let desc = one_death_descriptor();
        let g = wasserstein_cycle_gradient(&desc, &CycleBarycenter::from_deaths(&[0.0])).unwrap();
        assert_eq!(g, vec![0.0, 0.0, 2.0]);
        let g = wasserstein_cycle_gradient(&desc, &CycleBarycenter::from_deaths(&[1.0])).unwrap();
        assert!(g.iter().all(|&x| x == 0.0));
        assert!(wasserstein_cycle_gradient(&desc, &CycleBarycenter::from_deaths(&[])).is_err());
    }

    #[test]
    fn barycenter_examples() {
        let sets = vec![vec![1.0, 5.0], vec![3.0, 7.0]];
        assert_eq!(cycle_barycenter(&sets, &[1.0, 1.0]).unwrap().death_values, vec![2.0, 6.0]);
        assert_eq!(cycle_barycenter(&sets, &[3.0, 1.0]).unwrap().death_values, vec![1.5, 5.5]);
        let single = cycle_barycenter(&sets[..1], &[0.3]).unwrap();
        assert_eq!(single.death_values, sets[0]);
        assert!(matches!(
            cycle_barycenter(&sets, &[1.0, 0.0]),
            Err(Error::NonPositiveWeight { index: 1, .. })
        ));
        assert!(matches!(
            cycle_barycenter(&[vec![1.0], vec![1.0, 2.0]], &[1.0, 1.0]),
            Err(Error::CardinalityMismatch { .. })
        ));
    }

    #[test]
    fn online_update_examples() {
        let prev = CycleBarycenter::from_deaths(&[2.0]);
        assert_eq!(barycenter_online_update(&prev, &[4.0], 1.0, 1.0).unwrap().death_values, vec![3.0]);
        let b = barycenter_online_update(&prev, &[4.0], 9.0, 1.0).unwrap();
        assert!((b.death_values[0] - 2.2).abs() < 1e-15);
        assert!(barycenter_online_update(&prev, &[4.0], 0.0, 1.0).is_err());
        assert!(barycenter_online_update(&prev, &[4.0, 5.0], 1.0, 1.0).is_err());
    }

    #[test]
    fn three_sequential_halves() {
        let (d1, d2, d3) = (1.0, 5.0, 11.0);
        let b = CycleBarycenter::from_deaths(&[d1]);
        let b = barycenter_online_update(&b, &[d2], 1.0, 1.0).unwrap();
        let b = barycenter_online_update(&b, &[d3], 1.0, 1.0).unwrap();
        assert!((b.death_values[0] - (d1 / 4.0 + d2 / 4.0 + d3 / 2.0)).abs() < 1e-15);
        let w = induced_weights(3, 1.0, 1.0);
        assert_eq!(w, vec![0.25, 0.25, 0.5]);
        let batch = cycle_barycenter(&[vec![d1], vec![d2], vec![d3]], &w).unwrap();
        assert!((batch.death_values[0] - b.death_values[0]).abs() < 1e-15);
    }

    #[test]
    fn empty_death_sets_are_valid() {
        let b = cycle_barycenter(&[vec![], vec![]], &[1.0, 2.0]).unwrap();
        assert!(b.is_empty());
        let b = barycenter_online_update(&b, &[], 9.0, 1.0).unwrap();
        assert!(b.is_empty());
    }
}

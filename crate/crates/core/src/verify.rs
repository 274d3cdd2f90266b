//! Self-check suite behind `topocl verify`: every fast path against its
//! brute-force or finite-difference reference, plus memory statistics and
//! the training reduction identities.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::data::{make_synthetic_tasks, SyntheticParams};
use crate::error::Result;
use crate::memory::{EpisodicMemory, MemoryItem, MemoryStrategy};
use crate::metrics::{compute_acc, compute_bwt};
use crate::nn::{subgraph_weights, Mlp, SubgraphSpec};
use crate::topo::{
    barycenter_objective, barycenter_online_update, betti_curve, birth_death_decompose, cycle_barycenter,
    induced_weights, oracle_matching_distance, oracle_persistence, wasserstein_cycle_distance,
    wasserstein_cycle_gradient, CycleBarycenter, PersistenceDescriptor, WeightTransform, WeightedGraph,
};
use crate::trainer::{run_experiment, run_experiment_observed, Method, TrainerConfig, TrainerState};
use crate::Error;

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub secs: f64,
}

fn check(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> CheckResult {
    let start = Instant::now();
    let (passed, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
    CheckResult {
        name,
        passed,
        detail,
        secs: start.elapsed().as_secs_f64(),
    }
}

/// Connected graph on `n` nodes: a random spanning tree plus `extra` random
/// non-tree edges, all weights distinct and in `(0, 1)`.
pub fn random_connected_graph<R: Rng + ?Sized>(rng: &mut R, n: usize, extra: usize) -> Result<WeightedGraph> {
    let mut pairs = HashSet::new();
    let mut edges = Vec::new();
    for v in 1..n {
        let u = rng.random_range(0..v);
        pairs.insert((u, v));
        edges.push((u, v));
    }
    let max_extra = n * (n - 1) / 2 - (n - 1);
    while edges.len() < n - 1 + extra.min(max_extra) {
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        let key = (a.min(b), a.max(b));
        if a != b && pairs.insert(key) {
            edges.push(key);
        }
    }
    let mut seen = HashSet::new();
    let weighted: Vec<(usize, usize, f64)> = edges
        .into_iter()
        .map(|(a, b)| loop {
            let w: f64 = rng.random_range(0.001..1.0);
            if seen.insert(w.to_bits()) {
                break (a, b, w);
            }
        })
        .collect();
    WeightedGraph::new(n, &weighted)
}

fn random_graph(rng: &mut ChaCha8Rng, max_nodes: usize) -> Result<WeightedGraph> {
    let n = rng.random_range(2..=max_nodes);
    let max_extra = n * (n - 1) / 2 - (n - 1);
    let extra = rng.random_range(0..=max_extra.min(3 * n));
    random_connected_graph(rng, n, extra)
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn birth_ids(d: &PersistenceDescriptor) -> Vec<usize> {
    let mut ids: Vec<usize> = d.births.iter().map(|f| f.edge_id).collect();
    ids.sort_unstable();
    ids
}

fn death_order(d: &PersistenceDescriptor) -> Vec<usize> {
    d.deaths.iter().map(|f| f.edge_id).collect()
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()) || (a - b).abs() < 1e-9
}

pub fn check_decomposition(graphs: usize, seed: u64) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..graphs {
        let g = random_graph(&mut rng, 50)?;
        let fast = birth_death_decompose(&g)?;
        let slow = oracle_persistence(&g)?;
        let (v, e) = (g.node_count(), g.edge_count());
        if fast.births.len() != v - 1 || fast.deaths.len() + v != e + 1 {
            return Ok((false, format!("graph {i}: |B|={} |D|={} for |V|={v} |W|={e}", fast.births.len(), fast.deaths.len())));
        }
        if fast.birth_values() != slow.birth_values() || fast.death_values() != slow.death_values() {
            return Ok((false, format!("graph {i}: decomposition differs from threshold sweep")));
        }
    }
    Ok((true, format!("{graphs} graphs")))
}

/// Closed-form distance against exhaustive matching. `distance` is a
/// parameter so a broken implementation can be shown to fail.
pub fn check_distance_oracle(
    distance: &dyn Fn(&[f64], &[f64]) -> Result<f64>,
    pairs: usize,
    seed: u64,
) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for i in 0..pairs {
        let k = rng.random_range(0..=7);
        let a: Vec<f64> = (0..k).map(|_| rng.random_range(-2.0..2.0)).collect();
        let b: Vec<f64> = (0..k).map(|_| rng.random_range(-2.0..2.0)).collect();
        let closed = distance(&sorted(a.clone()), &sorted(b.clone()))?;
        let brute = oracle_matching_distance(&a, &b)?;
        worst = worst.max((closed - brute).abs());
        if (closed - brute).abs() > 1e-9 {
            return Ok((false, format!("pair {i}: closed form {closed} vs matching {brute}")));
        }
    }
    Ok((true, format!("{pairs} pairs, max |diff| {worst:.1e}")))
}

pub fn check_gradient_fd(graphs: usize, seed: u64) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = 1e-4;
    let (mut checked, mut skipped) = (0, 0);
    for gi in 0..graphs {
        let g = random_graph(&mut rng, 20)?;
        let desc = birth_death_decompose(&g)?;
        let target = CycleBarycenter::from_deaths(&sorted(
            (0..desc.deaths.len()).map(|_| rng.random_range(0.0..1.0)).collect(),
        ));
        let grad = wasserstein_cycle_gradient(&desc, &target)?;
        let base: Vec<f64> = g.weights().collect();
        let perturbed = |e: usize, delta: f64| -> Result<(f64, PersistenceDescriptor)> {
            let mut w = base.clone();
            w[e] += delta;
            let mut i = 0;
            let gp = g.map_weights(|_| {
                i += 1;
                w[i - 1]
            });
            let d = birth_death_decompose(&gp)?;
            Ok((wasserstein_cycle_distance(&d.death_values(), &target.death_values)?, d))
        };
        for e in 0..g.edge_count() {
            let (lp, dp) = perturbed(e, h)?;
            let (lm, dm) = perturbed(e, -h)?;
            let stable = [&dp, &dm]
                .iter()
                .all(|d| birth_ids(d) == birth_ids(&desc) && death_order(d) == death_order(&desc));
            if !stable {
                skipped += 1;
                continue;
            }
            let fd = (lp - lm) / (2.0 * h);
            checked += 1;
            if !rel_close(grad[e], fd, 1e-4) {
                return Ok((false, format!("graph {gi} edge {e}: analytic {} vs fd {fd}", grad[e])));
            }
        }
    }
    Ok((true, format!("{checked} edges checked, {skipped} skipped for MST/rank flips")))
}

pub fn check_barycenter(seed: u64) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (sets_n, len) = (6, 9);
    let sets: Vec<Vec<f64>> = (0..sets_n)
        .map(|_| sorted((0..len).map(|_| rng.random_range(-1.0..1.0)).collect()))
        .collect();
    let weights: Vec<f64> = (0..sets_n).map(|_| rng.random_range(0.1..2.0)).collect();
    let bary = cycle_barycenter(&sets, &weights)?;
    let best = barycenter_objective(&bary.death_values, &sets, &weights)?;
    let noise = Normal::new(0.0, 0.05).unwrap();
    for i in 0..1000 {
        let cand = sorted(bary.death_values.iter().map(|v| v + noise.sample(&mut rng)).collect());
        let obj = barycenter_objective(&cand, &sets, &weights)?;
        if obj < best {
            return Ok((false, format!("perturbation {i} improves objective: {obj} < {best}")));
        }
    }

    let (p, q) = (9.0, 1.0);
    let tasks: Vec<Vec<f64>> = (0..10)
        .map(|_| sorted((0..len).map(|_| rng.random_range(-1.0..1.0)).collect()))
        .collect();
    let mut online = CycleBarycenter::from_deaths(&tasks[0]);
    for t in &tasks[1..] {
        online = barycenter_online_update(&online, t, p, q)?;
    }
    let batch = cycle_barycenter(&tasks, &induced_weights(tasks.len(), p, q))?;
    let diff = online
        .death_values
        .iter()
        .zip(&batch.death_values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok((diff <= 1e-6, format!("1000 perturbations; online vs batch max |diff| {diff:.1e}")))
}

pub fn check_betti(graphs: usize, seed: u64) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..graphs {
        let g = random_graph(&mut rng, 40)?;
        let c = betti_curve(&g);
        let mono = c.beta0.windows(2).all(|w| w[0] <= w[1]) && c.beta1.windows(2).all(|w| w[0] >= w[1]);
        let terminal = (*c.beta0.last().unwrap(), *c.beta1.last().unwrap());
        if !mono || terminal != (g.node_count(), 0) {
            return Ok((false, format!("graph {i}: monotone {mono}, terminal {terminal:?}")));
        }
    }
    Ok((true, format!("{graphs} filtrations")))
}

/// Mean cross-entropy computed straight from the logits.
fn cross_entropy(net: &Mlp, inputs: &[&[f32]], labels: &[usize]) -> Result<f64> {
    let logits = net.forward(inputs)?;
    let total: f64 = logits
        .iter()
        .zip(labels)
        .map(|(z, &y)| {
            let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lse = max + z.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
            lse - z[y]
        })
        .sum();
    Ok(total / inputs.len() as f64)
}

/// Central difference over one `f32` parameter, dividing by the step that
/// was actually representable.
fn fd_param(net: &mut Mlp, get: impl Fn(&mut Mlp) -> &mut f32, h: f64, loss: &dyn Fn(&Mlp) -> Result<f64>) -> Result<f64> {
    let orig = *get(net);
    let plus = (f64::from(orig) + h) as f32;
    let minus = (f64::from(orig) - h) as f32;
    *get(net) = plus;
    let lp = loss(net)?;
    *get(net) = minus;
    let lm = loss(net)?;
    *get(net) = orig;
    Ok((lp - lm) / (f64::from(plus) - f64::from(minus)))
}

pub fn check_backprop(seed: u64) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut net = Mlp::new(&[4, 2, 3], &mut rng)?;
    for l in 0..2 {
        for b in net.biases_mut(l) {
            *b = rng.random_range(-0.5..0.5);
        }
    }
    let xs: Vec<Vec<f32>> = (0..5).map(|_| (0..4).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let inputs: Vec<&[f32]> = xs.iter().map(Vec::as_slice).collect();
    let labels: Vec<usize> = (0..5).map(|_| rng.random_range(0..3)).collect();
    let (_, grads) = net.backward_cross_entropy(&inputs, &labels)?;
    let loss = |n: &Mlp| cross_entropy(n, &inputs, &labels);
    let mut count = 0;
    for l in 0..2 {
        for i in 0..net.weights(l).len() {
            let fd = fd_param(&mut net, |n| &mut n.weights_mut(l)[i], 1e-3, &loss)?;
            count += 1;
            if !rel_close(grads.weights[l][i], fd, 1e-4) {
                return Ok((false, format!("W{l}[{i}]: {} vs fd {fd}", grads.weights[l][i])));
            }
        }
        for i in 0..net.biases(l).len() {
            let fd = fd_param(&mut net, |n| &mut n.biases_mut(l)[i], 1e-3, &loss)?;
            count += 1;
            if !rel_close(grads.biases[l][i], fd, 1e-4) {
                return Ok((false, format!("b{l}[{i}]: {} vs fd {fd}", grads.biases[l][i])));
            }
        }
    }
    Ok((true, format!("{count} parameters of a 4-2-3 net")))
}

/// ERM plus `lambda/2 * sum W2` with decompositions from the threshold-sweep
/// oracle, for finite differences.
fn composite_loss(
    net: &Mlp,
    spec: &SubgraphSpec,
    barycenters: &[CycleBarycenter],
    lambda: f64,
    inputs: &[&[f32]],
    labels: &[usize],
) -> Result<(f64, Vec<PersistenceDescriptor>)> {
    let mut total = cross_entropy(net, inputs, labels)?;
    let mut descs = Vec::new();
    for (k, (&(a, b), bary)) in spec.layer_pairs.iter().zip(barycenters).enumerate() {
        let sizes = net.layer_sizes();
        let w = subgraph_weights(net, spec, k, WeightTransform::Raw);
        let d = oracle_persistence(&WeightedGraph::complete_bipartite(sizes[a], sizes[b], &w)?)?;
        total += lambda / 2.0 * wasserstein_cycle_distance(&d.death_values(), &bary.death_values)?;
        descs.push(d);
    }
    Ok((total, descs))
}

pub fn check_composite_gradient(seed: u64) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let net = Mlp::new(&[4, 3, 3, 2], &mut rng)?;
    let lambda = 1.3;
    let cfg = TrainerConfig {
        lambda,
        m: 1,
        hidden: vec![3, 3],
        subgraphs: Some("1-2,2-3".parse()?),
        ..TrainerConfig::default()
    };
    let mut state = TrainerState::with_net(cfg, Method::TopRing, net, 0)?;
    state.barycenters = state
        .spec
        .layer_pairs
        .iter()
        .map(|&(a, b)| {
            let sizes = state.net.layer_sizes();
            let deaths = sizes[a] * sizes[b] - (sizes[a] + sizes[b] - 1);
            CycleBarycenter::from_deaths(&sorted((0..deaths).map(|_| rng.random_range(-0.5..0.5)).collect()))
        })
        .collect();
    let xs: Vec<Vec<f32>> = (0..6).map(|_| (0..4).map(|_| rng.random_range(0.0..1.0)).collect()).collect();
    let inputs: Vec<&[f32]> = xs.iter().map(Vec::as_slice).collect();
    let labels: Vec<usize> = (0..6).map(|_| rng.random_range(0..2)).collect();
    let (_, grads) = state.composite_gradient(&inputs, &labels)?;

    let (spec, barys) = (state.spec.clone(), state.barycenters.clone());
    let (_, base) = composite_loss(&state.net, &spec, &barys, lambda, &inputs, &labels)?;
    let mut net = state.net.clone();
    let h = 1e-3;
    let (mut checked, mut skipped) = (0, 0);
    for l in 0..net.layer_sizes().len() - 1 {
        for i in 0..net.weights(l).len() {
            let orig = net.weights(l)[i];
            let eval = |v: f32, net: &mut Mlp| {
                net.weights_mut(l)[i] = v;
                composite_loss(net, &spec, &barys, lambda, &inputs, &labels)
            };
            let (plus, minus) = ((f64::from(orig) + h) as f32, (f64::from(orig) - h) as f32);
            let (lp, dp) = eval(plus, &mut net)?;
            let (lm, dm) = eval(minus, &mut net)?;
            net.weights_mut(l)[i] = orig;
            let stable = dp
                .iter()
                .chain(&dm)
                .zip(base.iter().chain(&base))
                .all(|(d, b)| birth_ids(d) == birth_ids(b) && death_order(d) == death_order(b));
            if !stable {
                skipped += 1;
                continue;
            }
            let fd = (lp - lm) / (f64::from(plus) - f64::from(minus));
            checked += 1;
            if !rel_close(grads.weights[l][i], fd, 1e-4) {
                return Ok((false, format!("W{l}[{i}]: {} vs fd {fd}", grads.weights[l][i])));
            }
        }
    }
    Ok((checked > 0, format!("{checked} weights checked, {skipped} skipped for MST/rank flips")))
}

/// Replays random updates against a per-class FIFO model.
pub fn check_ring_fuzz(ops: usize, seed: u64) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let capacity = 24;
    let mut mem = EpisodicMemory::new(MemoryStrategy::Ring, capacity, seed);
    let mut model: BTreeMap<(usize, usize), VecDeque<u32>> = BTreeMap::new();
    let mut next = 0u32;
    for op in 0..ops {
        if rng.random_bool(0.8) {
            let key = (rng.random_range(0..3), rng.random_range(0..4));
            let id = next;
            next += 1;
            if !model.contains_key(&key) {
                model.insert(key, VecDeque::new());
                let quota = capacity / model.len();
                for q in model.values_mut() {
                    while q.len() > quota {
                        q.pop_front();
                    }
                }
            }
            let quota = capacity / model.len();
            let q = model.get_mut(&key).unwrap();
            if quota > 0 {
                if q.len() >= quota {
                    q.pop_front();
                }
                q.push_back(id);
            }
            mem.update([MemoryItem {
                features: vec![id as f32],
                label: key.1,
                task_id: key.0,
            }]);
        } else {
            let b = rng.random_range(0..30);
            let len = mem.len();
            let s = mem.sample(b);
            let ids: HashSet<u32> = s.iter().map(|m| m.features[0] as u32).collect();
            if s.len() != b.min(len) || ids.len() != s.len() {
                return Ok((false, format!("op {op}: bad sample of {b} from {len}")));
            }
        }
        let mut got: BTreeMap<(usize, usize), VecDeque<u32>> = model.keys().map(|&k| (k, VecDeque::new())).collect();
        for item in mem.slots() {
            got.entry((item.task_id, item.label)).or_default().push_back(item.features[0] as u32);
        }
        if got != model || mem.len() > capacity {
            return Ok((false, format!("op {op}: memory diverged from FIFO model")));
        }
    }
    Ok((true, format!("{ops} operations, capacity {capacity}")))
}

/// Retention counts per stream position over many seeded reservoir runs,
/// tested for uniformity. Returns `(chi2, p_value)`.
pub fn reservoir_chi_square(trials: usize, stream_len: usize, capacity: usize, seed: u64) -> (f64, f64) {
    let mut counts = vec![0u64; stream_len];
    for t in 0..trials {
        let mut mem = EpisodicMemory::new(MemoryStrategy::Reservoir, capacity, seed.wrapping_add(t as u64));
        mem.update((0..stream_len).map(|i| MemoryItem {
            features: vec![i as f32],
            label: 0,
            task_id: 0,
        }));
        for item in mem.slots() {
            counts[item.features[0] as usize] += 1;
        }
    }
    let expected = (trials * capacity) as f64 / stream_len as f64;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let dist = ChiSquared::new((stream_len - 1) as f64).expect("positive degrees of freedom");
    (chi2, 1.0 - dist.cdf(chi2))
}

fn trajectory(method: Method, cfg: &TrainerConfig, seed: u64) -> Result<Vec<Vec<f32>>> {
    let stream = make_synthetic_tasks(&SyntheticParams {
        num_tasks: 3,
        classes: 4,
        dim: 16,
        per_task_train: 80,
        per_task_test: 20,
        spread: 0.3,
        seed,
    })?;
    let mut steps = Vec::new();
    run_experiment_observed(&stream, cfg, method, |net| {
        steps.push((0..net.layer_sizes().len() - 1).flat_map(|l| net.weights(l).to_vec()).collect());
    })?;
    Ok(steps)
}

pub fn check_reductions(seed: u64) -> Result<(bool, String)> {
    let base = TrainerConfig {
        hidden: vec![8, 6],
        seed,
        ..TrainerConfig::default()
    };
    let top0 = trajectory(Method::TopRing, &TrainerConfig { lambda: 0.0, ..base.clone() }, seed)?;
    let er = trajectory(Method::ErRing, &base, seed)?;
    let er_empty = trajectory(Method::ErRing, &TrainerConfig { mem_per_class: 0, ..base.clone() }, seed)?;
    let ft = trajectory(Method::Finetune, &base, seed)?;
    let top1 = trajectory(Method::TopRing, &base, seed)?;
    let bits = |t: &[Vec<f32>]| -> Vec<u32> { t.iter().flatten().map(|v| v.to_bits()).collect() };
    let a = bits(&top0) == bits(&er);
    let b = bits(&er_empty) == bits(&ft);
    // Guard against a vacuous pass: the penalty must change something.
    let c = bits(&top1) != bits(&er);
    Ok((a && b && c, format!("TOP(0)=ER {a}, ER(empty)=finetune {b}, TOP(1)!=ER {c}; {} steps", er.len())))
}

pub fn check_determinism(seed: u64) -> Result<(bool, String)> {
    let stream = make_synthetic_tasks(&SyntheticParams {
        num_tasks: 3,
        per_task_train: 100,
        per_task_test: 50,
        dim: 20,
        seed,
        ..SyntheticParams::default()
    })?;
    let cfg = TrainerConfig {
        hidden: vec![10, 10],
        seed,
        ..TrainerConfig::default()
    };
    let a = run_experiment(&stream, &cfg, Method::TopRes)?.to_json();
    let b = run_experiment(&stream, &cfg, Method::TopRes)?.to_json();
    Ok((a == b, format!("{} report bytes", a.len())))
}

pub fn check_metrics() -> Result<(bool, String)> {
    let r = vec![
        vec![Some(0.9), None, None],
        vec![Some(0.7), Some(0.8), None],
        vec![Some(0.6), Some(0.75), Some(0.95)],
    ];
    let acc = compute_acc(&r)?;
    let bwt = compute_bwt(&r)?;
    let ok_acc = (acc - (0.6 + 0.75 + 0.95) / 3.0).abs() <= 1e-12;
    let ok_bwt = (bwt - ((0.6 - 0.9) + (0.75 - 0.8)) / 2.0).abs() <= 1e-12;
    let single = matches!(compute_bwt(&[vec![Some(0.5)]]), Err(Error::UndefinedForSingleTask));
    Ok((ok_acc && ok_bwt && single, format!("ACC {acc:.6}, BWT {bwt:.6}")))
}

/// Runs every check. `seed` varies the random instances.
pub fn run_suite(seed: u64) -> Vec<CheckResult> {
    vec![
        check("decomposition vs threshold sweep", || check_decomposition(100, seed)),
        check("closed-form distance vs matching", || {
            check_distance_oracle(&wasserstein_cycle_distance, 200, seed)
        }),
        check("distance gradient vs finite differences", || check_gradient_fd(50, seed)),
        check("barycenter optimality and online update", || check_barycenter(seed)),
        check("monotone Betti curves", || check_betti(100, seed)),
        check("MLP backprop vs finite differences", || check_backprop(seed)),
        check("composite loss gradient", || check_composite_gradient(seed)),
        check("ring memory FIFO fuzz", || check_ring_fuzz(10_000, seed)),
        check("reservoir retention uniformity", || {
            let (chi2, p) = reservoir_chi_square(10_000, 50, 10, seed);
            Ok((p >= 0.01, format!("chi2 {chi2:.1} on 49 dof, p = {p:.3}")))
        }),
        check("reduction identities", || check_reductions(seed)),
        check("report determinism", || check_determinism(seed)),
        check("ACC/BWT arithmetic", check_metrics),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corrupted_distance_is_caught() {
        let broken = |a: &[f64], b: &[f64]| -> Result<f64> {
            // Matches in reverse order instead of sorted order.
            Ok(a.iter().zip(b.iter().rev()).map(|(x, y)| (x - y).powi(2)).sum())
        };
        let (passed, detail) = check_distance_oracle(&broken, 200, 1).unwrap();
        assert!(!passed, "{detail}");
        let (passed, _) = check_distance_oracle(&wasserstein_cycle_distance, 50, 1).unwrap();
        assert!(passed);
    }

    #[test]
    fn random_graphs_are_connected_with_distinct_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let g = random_graph(&mut rng, 12).unwrap();
            let mut w: Vec<u64> = g.weights().map(f64::to_bits).collect();
            let n = w.len();
            w.sort_unstable();
            w.dedup();
            assert_eq!(w.len(), n);
        }
    }
}

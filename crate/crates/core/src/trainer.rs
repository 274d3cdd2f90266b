//! Sequential training for the baselines and the cycle-regularized method.
//!
//! Every method shares one loop: shuffle the task, walk it in mini-batches,
//! append a replay batch from memory (tasks after the first), take one SGD
//! step on the aggregated batch, then push the current batch into memory.
//! Topological methods add `lambda/2 * sum_k W2(D_k(w), barycenter_k)` to the
//! loss on every task after the first.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Task, TaskStream};
use crate::error::{Error, Result};
use crate::memory::{EpisodicMemory, MemoryItem, MemoryStrategy};
use crate::metrics::{compute_acc, compute_bwt, ExperimentReport};
use crate::nn::{apply_chain_factor, extract_subgraphs, scatter_topo_gradient, subgraph_weights, Gradients, Mlp, SubgraphSpec};
use crate::seeding::{stream_rng, stream_seed, Stream};
use crate::topo::{
    barycenter_online_update, birth_death_decompose, wasserstein_cycle_distance, wasserstein_cycle_gradient,
    CycleBarycenter, PersistenceDescriptor, WeightTransform,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Finetune,
    ErRing,
    ErRes,
    TopRing,
    TopRes,
    Multitask,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Finetune,
        Method::ErRing,
        Method::ErRes,
        Method::TopRing,
        Method::TopRes,
        Method::Multitask,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Finetune => "finetune",
            Method::ErRing => "er-ring",
            Method::ErRes => "er-res",
            Method::TopRing => "top-ring",
            Method::TopRes => "top-res",
            Method::Multitask => "multitask",
        }
    }

    pub fn memory(self) -> Option<MemoryStrategy> {
        match self {
            Method::ErRing | Method::TopRing => Some(MemoryStrategy::Ring),
            Method::ErRes | Method::TopRes => Some(MemoryStrategy::Reservoir),
            Method::Finetune | Method::Multitask => None,
        }
    }

    pub fn is_topological(self) -> bool {
        matches!(self, Method::TopRing | Method::TopRes)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown method {s:?}")))
    }
}

/// Hyperparameters of one experiment. Field names double as config-file keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainerConfig {
    /// Weight of the topological penalty.
    pub lambda: f64,
    /// Iterations between fresh birth-death decompositions.
    pub m: usize,
    /// Barycenter update weights: `(p * old + q * new) / (p + q)`.
    pub p: f64,
    pub q: f64,
    /// SGD learning rate.
    pub gamma: f64,
    pub batch_size: usize,
    pub replay_batch_size: usize,
    /// Memory slots per class per task; total capacity is this times
    /// classes times tasks.
    pub mem_per_class: usize,
    pub hidden: Vec<usize>,
    /// Regularized layer pairs. `None` means the last two weight matrices.
    pub subgraphs: Option<SubgraphSpec>,
    pub weight_transform: WeightTransform,
    /// Training-loss curve resolution, in iterations.
    pub log_every: usize,
    pub seed: u64,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        TrainerConfig {
            lambda: 1.0,
            m: 5,
            p: 9.0,
            q: 1.0,
            gamma: 0.1,
            batch_size: 10,
            replay_batch_size: 10,
            mem_per_class: 1,
            hidden: vec![64, 64],
            subgraphs: None,
            weight_transform: WeightTransform::Raw,
            log_every: 10,
            seed: 0,
        }
    }
}

impl TrainerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be finite and >= 0, got {}", self.lambda));
        }
        if self.m == 0 {
            return bad("m must be at least 1".into());
        }
        for (name, v) in [("p", self.p), ("q", self.q), ("gamma", self.gamma)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be finite and > 0, got {v}"));
            }
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1".into());
        }
        if self.log_every == 0 {
            return bad("log_every must be at least 1".into());
        }
        if self.hidden.contains(&0) {
            return bad("hidden layer widths must be positive".into());
        }
        Ok(())
    }

    pub fn layer_sizes(&self, input_dim: usize, classes: usize) -> Vec<usize> {
        let mut sizes = vec![input_dim];
        sizes.extend(&self.hidden);
        sizes.push(classes);
        sizes
    }

    pub fn subgraph_spec(&self, layer_count: usize) -> SubgraphSpec {
        self.subgraphs
            .clone()
            .unwrap_or_else(|| SubgraphSpec::output_side(layer_count, 2))
    }

    pub fn memory_capacity(&self, stream: &TaskStream) -> usize {
        self.mem_per_class * stream.num_classes * stream.len()
    }
}

/// Mean training loss over consecutive windows of `log_every` iterations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningCurve {
    pub task_id: usize,
    pub iterations: Vec<usize>,
    pub loss: Vec<f64>,
}

impl LearningCurve {
    fn new(task_id: usize) -> Self {
        LearningCurve {
            task_id,
            iterations: Vec::new(),
            loss: Vec::new(),
        }
    }
}

struct CurveLogger {
    curve: LearningCurve,
    every: usize,
    sum: f64,
    count: usize,
}

impl CurveLogger {
    fn new(task_id: usize, every: usize) -> Self {
        CurveLogger {
            curve: LearningCurve::new(task_id),
            every,
            sum: 0.0,
            count: 0,
        }
    }

    fn push(&mut self, iter: usize, loss: f64) {
        self.sum += loss;
        self.count += 1;
        if self.count == self.every {
            self.flush(iter);
        }
    }

    fn flush(&mut self, iter: usize) {
        if self.count > 0 {
            self.curve.iterations.push(iter);
            self.curve.loss.push(self.sum / self.count as f64);
            self.sum = 0.0;
            self.count = 0;
        }
    }

    fn finish(mut self, iter: usize) -> LearningCurve {
        self.flush(iter);
        self.curve
    }
}

/// Everything that evolves while a method walks the task stream.
pub struct TrainerState {
    pub net: Mlp,
    pub spec: SubgraphSpec,
    pub config: TrainerConfig,
    pub method: Method,
    /// One per subgraph once the first task is done (topological methods).
    pub barycenters: Vec<CycleBarycenter>,
    /// Death-edge membership from the latest decomposition, per subgraph.
    cached: Vec<PersistenceDescriptor>,
    pub memory: Option<EpisodicMemory>,
    /// Iterations within the current task.
    pub iter: usize,
    /// Fresh decompositions performed inside training loops.
    pub decompositions: usize,
    /// Iterations at which the decompositions happened, within their task.
    pub refresh_log: Vec<(usize, usize)>,
    tasks_done: usize,
    current_task: usize,
    shuffle_rng: ChaCha8Rng,
}

impl TrainerState {
    pub fn new(config: TrainerConfig, method: Method, input_dim: usize, classes: usize, capacity: usize) -> Result<Self> {
        config.validate()?;
        let sizes = config.layer_sizes(input_dim, classes);
        let net = Mlp::new(&sizes, &mut stream_rng(config.seed, Stream::Init))?;
        Self::with_net(config, method, net, capacity)
    }

    /// Starts from a given network instead of a seeded initialization.
    pub fn with_net(config: TrainerConfig, method: Method, net: Mlp, capacity: usize) -> Result<Self> {
        config.validate()?;
        let spec = config.subgraph_spec(net.layer_sizes().len());
        spec.validate(&net)?;
        let memory = method
            .memory()
            .map(|s| EpisodicMemory::new(s, capacity, stream_seed(config.seed, Stream::Memory)));
        Ok(TrainerState {
            net,
            spec,
            memory,
            barycenters: Vec::new(),
            cached: Vec::new(),
            iter: 0,
            decompositions: 0,
            refresh_log: Vec::new(),
            tasks_done: 0,
            current_task: 0,
            shuffle_rng: stream_rng(config.seed, Stream::Shuffle),
            config,
            method,
        })
    }

    pub fn tasks_done(&self) -> usize {
        self.tasks_done
    }

    fn regularizing(&self) -> bool {
        self.method.is_topological() && !self.barycenters.is_empty()
    }

    fn decompose(&self) -> Result<Vec<PersistenceDescriptor>> {
        extract_subgraphs(&self.net, &self.spec, self.config.weight_transform)?
            .iter()
            .map(birth_death_decompose)
            .collect()
    }

    /// Cached death-edge membership re-sorted by the current weights.
    fn current_descriptors(&self) -> Vec<PersistenceDescriptor> {
        self.cached
            .iter()
            .enumerate()
            .map(|(k, d)| {
                let w = subgraph_weights(&self.net, &self.spec, k, self.config.weight_transform);
                d.with_current_weights(|e| w[e])
            })
            .collect()
    }

    /// `sum_k W2(D_k(w), barycenter_k)` using the cached membership.
    pub fn topological_penalty(&self) -> Result<f64> {
        self.current_descriptors()
            .iter()
            .zip(&self.barycenters)
            .map(|(d, b)| wasserstein_cycle_distance(&d.death_values(), &b.death_values))
            .sum()
    }

    /// Gradient of `ERM + lambda/2 * penalty` on one aggregated batch.
    /// Refreshes the death-edge membership when `iter` is a multiple of `m`.
    pub fn composite_gradient(&mut self, inputs: &[&[f32]], labels: &[usize]) -> Result<(f64, Gradients)> {
        let (loss, mut grads) = self.net.backward_cross_entropy(inputs, labels)?;
        if self.regularizing() {
            if self.iter % self.config.m == 0 {
                self.cached = self.decompose()?;
                self.decompositions += 1;
                self.refresh_log.push((self.current_task, self.iter));
            }
            let mut edge_grads = self
                .current_descriptors()
                .iter()
                .zip(&self.barycenters)
                .map(|(d, b)| wasserstein_cycle_gradient(d, b))
                .collect::<Result<Vec<_>>>()?;
            apply_chain_factor(&self.net, &self.spec, self.config.weight_transform, &mut edge_grads);
            scatter_topo_gradient(&mut grads, &self.spec, &edge_grads, self.config.lambda / 2.0)?;
        }
        Ok((loss, grads))
    }

    /// One pass over `task`; `on_step` sees the network after every update.
    pub fn train_task_observed(&mut self, task: &Task, mut on_step: impl FnMut(&Mlp)) -> Result<LearningCurve> {
        let mut order: Vec<usize> = (0..task.train.len()).collect();
        order.shuffle(&mut self.shuffle_rng);
        self.iter = 0;
        self.current_task = task.task_id;
        let replay = self.tasks_done > 0;
        let mut log = CurveLogger::new(task.task_id, self.config.log_every);
        for batch in order.chunks(self.config.batch_size) {
            let mut inputs: Vec<&[f32]> = batch.iter().map(|&i| task.train.features[i].as_slice()).collect();
            let mut labels: Vec<usize> = batch.iter().map(|&i| task.train.labels[i]).collect();
            let replayed: Vec<MemoryItem> = match (&mut self.memory, replay) {
                (Some(mem), true) => mem.sample(self.config.replay_batch_size).into_iter().cloned().collect(),
                _ => Vec::new(),
            };
            inputs.extend(replayed.iter().map(|m| m.features.as_slice()));
            labels.extend(replayed.iter().map(|m| m.label));

            let (loss, grads) = self.composite_gradient(&inputs, &labels)?;
            self.net.sgd_step(&grads, self.config.gamma);
            on_step(&self.net);
            log.push(self.iter + 1, loss);

            if let Some(mem) = &mut self.memory {
                mem.update(batch.iter().map(|&i| MemoryItem {
                    features: task.train.features[i].clone(),
                    label: task.train.labels[i],
                    task_id: task.task_id,
                }));
            }
            self.iter += 1;
        }
        self.finish_task()?;
        Ok(log.finish(self.iter))
    }

    /// Folds the final death sets into the barycenters.
    fn finish_task(&mut self) -> Result<()> {
        if self.method.is_topological() {
            let finals = self.decompose()?;
            self.barycenters = if self.barycenters.is_empty() {
                finals.iter().map(|d| CycleBarycenter::from_deaths(&d.death_values())).collect()
            } else {
                finals
                    .iter()
                    .zip(&self.barycenters)
                    .map(|(d, b)| barycenter_online_update(b, &d.death_values(), self.config.p, self.config.q))
                    .collect::<Result<_>>()?
            };
        }
        self.tasks_done += 1;
        Ok(())
    }

    /// Plain SGD with memory updates; initializes the barycenters.
    pub fn train_first_task(&mut self, task: &Task) -> Result<LearningCurve> {
        if self.tasks_done != 0 {
            return Err(Error::InvalidConfig("first task already trained".into()));
        }
        self.train_task_observed(task, |_| {})
    }

    /// Replay plus, for topological methods, the cycle penalty.
    pub fn train_later_task(&mut self, task: &Task) -> Result<LearningCurve> {
        if self.tasks_done == 0 {
            return Err(Error::InvalidConfig("train the first task before later ones".into()));
        }
        self.train_task_observed(task, |_| {})
    }
}

fn evaluate(net: &Mlp, task: &Task) -> Result<f64> {
    net.accuracy(&task.test.rows(), &task.test.labels)
}

/// Runs `method` over the whole stream and evaluates `R[i][j]` for `j <= i`
/// after each task. Multitask trains once on the shuffled union and fills
/// only the final row.
pub fn run_experiment(stream: &TaskStream, config: &TrainerConfig, method: Method) -> Result<ExperimentReport> {
    run_experiment_observed(stream, config, method, |_| {})
}

/// As [`run_experiment`], calling `on_step` after every SGD update.
pub fn run_experiment_observed(
    stream: &TaskStream,
    config: &TrainerConfig,
    method: Method,
    mut on_step: impl FnMut(&Mlp),
) -> Result<ExperimentReport> {
    if stream.is_empty() {
        return Err(Error::InvalidConfig("empty task stream".into()));
    }
    let start = Instant::now();
    let t = stream.len();
    let mut state = TrainerState::new(
        config.clone(),
        method,
        stream.dim,
        stream.num_classes,
        config.memory_capacity(stream),
    )?;
    let mut r = vec![vec![None; t]; t];
    let mut curves = Vec::new();

    if method == Method::Multitask {
        let mut union = Task {
            task_id: 0,
            transform: stream.tasks[0].transform.clone(),
            train: Default::default(),
            test: Default::default(),
        };
        for task in &stream.tasks {
            union.train.features.extend(task.train.features.iter().cloned());
            union.train.labels.extend(&task.train.labels);
        }
        curves.push(state.train_task_observed(&union, &mut on_step)?);
        for (j, task) in stream.tasks.iter().enumerate() {
            r[t - 1][j] = Some(evaluate(&state.net, task)?);
        }
    } else {
        for (i, task) in stream.tasks.iter().enumerate() {
            curves.push(state.train_task_observed(task, &mut on_step)?);
            for j in 0..=i {
                r[i][j] = Some(evaluate(&state.net, &stream.tasks[j])?);
            }
        }
    }

    let acc = compute_acc(&r)?;
    let bwt = if method == Method::Multitask || t < 2 {
        None
    } else {
        Some(compute_bwt(&r)?)
    };
    Ok(ExperimentReport {
        method,
        seed: config.seed,
        config: config.clone(),
        num_tasks: t,
        r,
        acc,
        bwt,
        curves,
        decompositions: state.decompositions,
        wall_clock_secs: start.elapsed().as_secs_f64(),
    })
}

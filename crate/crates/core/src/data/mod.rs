//! Task streams for single-head continual learning: permuted and rotated
//! variants of an image dataset, plus synthetic Gaussian blobs that need no
//! downloads.

mod cache;
mod idx;
mod transform;

use std::env;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

pub use cache::{load_stream, save_stream};
pub use idx::{encode_idx, load_idx, parse_idx, IMAGES_MAGIC, LABELS_MAGIC};
pub use transform::{downsample, permute, random_permutation, rotate};

use crate::error::{Error, Result};
use crate::seeding::{stream_rng, Stream};

/// Environment variable naming the directory with the four MNIST IDX files.
pub const DATA_DIR_ENV: &str = "TOPOCL_DATA_DIR";

/// Parallel feature rows and labels.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Examples {
    pub features: Vec<Vec<f32>>,
    pub labels: Vec<usize>,
}

impl Examples {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn rows(&self) -> Vec<&[f32]> {
        self.features.iter().map(Vec::as_slice).collect()
    }

    fn select(&self, idx: &[usize], mut f: impl FnMut(&[f32]) -> Vec<f32>) -> Examples {
        Examples {
            features: idx.iter().map(|&i| f(&self.features[i])).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

/// Images of a fixed `rows × cols` size.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageSet {
    pub rows: usize,
    pub cols: usize,
    pub examples: Examples,
}

impl ImageSet {
    pub fn downsampled(&self, factor: usize) -> ImageSet {
        if factor <= 1 {
            return self.clone();
        }
        ImageSet {
            rows: self.rows / factor,
            cols: self.cols / factor,
            examples: Examples {
                features: self
                    .examples
                    .features
                    .iter()
                    .map(|x| downsample(x, self.rows, self.cols, factor))
                    .collect(),
                labels: self.examples.labels.clone(),
            },
        }
    }
}

/// Train and test images a stream is cut from.
#[derive(Debug, Clone)]
pub struct BaseData {
    pub train: ImageSet,
    pub test: ImageSet,
}

impl BaseData {
    /// Loads the standard MNIST file names from `dir`.
    pub fn load_mnist(dir: &Path) -> Result<Self> {
        Ok(BaseData {
            train: load_idx(
                &dir.join("train-images-idx3-ubyte"),
                &dir.join("train-labels-idx1-ubyte"),
            )?,
            test: load_idx(
                &dir.join("t10k-images-idx3-ubyte"),
                &dir.join("t10k-labels-idx1-ubyte"),
            )?,
        })
    }

    /// Directory from `TOPOCL_DATA_DIR`, falling back to `./data`.
    pub fn default_dir() -> PathBuf {
        env::var_os(DATA_DIR_ENV).map_or_else(|| PathBuf::from("data"), PathBuf::from)
    }

    pub fn downsampled(&self, factor: usize) -> Self {
        BaseData {
            train: self.train.downsampled(factor),
            test: self.test.downsampled(factor),
        }
    }

    fn class_count(&self) -> usize {
        self.train
            .examples
            .labels
            .iter()
            .chain(&self.test.examples.labels)
            .max()
            .map_or(0, |m| m + 1)
    }
}

/// How a task's inputs were derived from the base data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum TaskTransform {
    Identity,
    Permuted,
    Rotated { degrees: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    pub task_id: usize,
    pub transform: TaskTransform,
    pub train: Examples,
    pub test: Examples,
}

/// Ordered tasks sharing one input width and one label space.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskStream {
    pub tasks: Vec<Task>,
    pub dim: usize,
    pub num_classes: usize,
}

impl TaskStream {
    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn total_train(&self) -> usize {
        self.tasks.iter().map(|t| t.train.len()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StreamParams {
    pub num_tasks: usize,
    pub per_task_train: usize,
    pub per_task_test: usize,
    pub seed: u64,
}

/// Rotation angle per task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AngleSchedule {
    /// Uniform draws from `[0, 180)`.
    #[default]
    Uniform,
    /// `180 * t / T` for task index `t`.
    Evenly,
}

fn check_params(p: &StreamParams, base: &BaseData) -> Result<()> {
    if p.num_tasks == 0 || p.per_task_train == 0 {
        return Err(Error::InvalidConfig("need at least one task and one example".into()));
    }
    let needed = p.num_tasks * p.per_task_train;
    if needed > base.train.examples.len() {
        return Err(Error::InsufficientData {
            needed,
            available: base.train.examples.len(),
        });
    }
    if p.per_task_test > base.test.examples.len() {
        return Err(Error::InsufficientData {
            needed: p.per_task_test,
            available: base.test.examples.len(),
        });
    }
    Ok(())
}

/// Disjoint train chunks per task plus one shared test subset.
fn split(base: &BaseData, p: &StreamParams) -> (Vec<Vec<usize>>, Vec<usize>) {
    let mut rng = stream_rng(p.seed, Stream::DataSplit);
    let mut train: Vec<usize> = (0..base.train.examples.len()).collect();
    train.shuffle(&mut rng);
    let chunks = train
        .chunks(p.per_task_train)
        .take(p.num_tasks)
        .map(<[usize]>::to_vec)
        .collect();
    let mut test: Vec<usize> = (0..base.test.examples.len()).collect();
    test.shuffle(&mut rng);
    test.truncate(p.per_task_test);
    (chunks, test)
}

/// Task 1 sees the original pixels; every later task applies its own fixed
/// pixel permutation to both its train and test images.
pub fn make_permuted_tasks(base: &BaseData, p: &StreamParams) -> Result<TaskStream> {
    check_params(p, base)?;
    let dim = base.train.rows * base.train.cols;
    let (chunks, test_idx) = split(base, p);
    let mut rng = stream_rng(p.seed, Stream::TaskTransforms);
    let tasks = chunks
        .iter()
        .enumerate()
        .map(|(t, idx)| {
            let (perm, transform) = if t == 0 {
                ((0..dim).collect::<Vec<_>>(), TaskTransform::Identity)
            } else {
                (random_permutation(dim, &mut rng), TaskTransform::Permuted)
            };
            Task {
                task_id: t,
                transform,
                train: base.train.examples.select(idx, |x| permute(x, &perm)),
                test: base.test.examples.select(&test_idx, |x| permute(x, &perm)),
            }
        })
        .collect();
    Ok(TaskStream {
        tasks,
        dim,
        num_classes: base.class_count(),
    })
}

pub fn rotation_angles<R: Rng + ?Sized>(num_tasks: usize, schedule: AngleSchedule, rng: &mut R) -> Vec<f64> {
    (0..num_tasks)
        .map(|t| match (t, schedule) {
            (0, _) => 0.0,
            (_, AngleSchedule::Uniform) => rng.random_range(0.0..180.0),
            (_, AngleSchedule::Evenly) => 180.0 * t as f64 / num_tasks as f64,
        })
        .collect()
}

/// Task 1 is unrotated; later tasks rotate all their images by one angle.
pub fn make_rotated_tasks(base: &BaseData, p: &StreamParams, schedule: AngleSchedule) -> Result<TaskStream> {
    check_params(p, base)?;
    let (rows, cols) = (base.train.rows, base.train.cols);
    let (chunks, test_idx) = split(base, p);
    let mut rng = stream_rng(p.seed, Stream::TaskTransforms);
    let angles = rotation_angles(p.num_tasks, schedule, &mut rng);
    let tasks = chunks
        .iter()
        .zip(&angles)
        .enumerate()
        .map(|(t, (idx, &deg))| Task {
            task_id: t,
            transform: if t == 0 {
                TaskTransform::Identity
            } else {
                TaskTransform::Rotated { degrees: deg }
            },
            train: base.train.examples.select(idx, |x| rotate(x, rows, cols, deg)),
            test: base.test.examples.select(&test_idx, |x| rotate(x, rows, cols, deg)),
        })
        .collect();
    Ok(TaskStream {
        tasks,
        dim: rows * cols,
        num_classes: base.class_count(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticParams {
    pub num_tasks: usize,
    pub classes: usize,
    pub dim: usize,
    pub per_task_train: usize,
    pub per_task_test: usize,
    /// Standard deviation of the per-coordinate noise around each prototype.
    pub spread: f64,
    pub seed: u64,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        SyntheticParams {
            num_tasks: 5,
            classes: 10,
            dim: 196,
            per_task_train: 1000,
            per_task_test: 500,
            spread: 0.35,
            seed: 0,
        }
    }
}

/// Gaussian blobs around uniform prototypes in `[0, 1]^dim`, clamped to the
/// unit cube. Every task draws fresh examples; tasks after the first apply a
/// fixed coordinate permutation, mirroring the permuted-image construction.
pub fn make_synthetic_tasks(p: &SyntheticParams) -> Result<TaskStream> {
    if p.num_tasks == 0 || p.classes < 2 || p.dim == 0 || p.per_task_train == 0 {
        return Err(Error::InvalidConfig(format!("degenerate synthetic parameters {p:?}")));
    }
    if !(p.spread >= 0.0) {
        return Err(Error::InvalidConfig(format!("spread must be non-negative, got {}", p.spread)));
    }
    let mut proto_rng = stream_rng(p.seed, Stream::Prototypes);
    let prototypes: Vec<Vec<f64>> = (0..p.classes)
        .map(|_| (0..p.dim).map(|_| proto_rng.random::<f64>()).collect())
        .collect();
    let mut sample_rng = stream_rng(p.seed, Stream::DataSplit);
    let mut perm_rng = stream_rng(p.seed, Stream::TaskTransforms);
    let draw = |n: usize, rng: &mut rand_chacha::ChaCha8Rng| -> Examples {
        let mut ex = Examples::default();
        for i in 0..n {
            let y = i % p.classes;
            let x = prototypes[y]
                .iter()
                .map(|&m| {
                    let z: f64 = StandardNormal.sample(rng);
                    (m + p.spread * z).clamp(0.0, 1.0) as f32
                })
                .collect();
            ex.features.push(x);
            ex.labels.push(y);
        }
        ex
    };
    let mut tasks = Vec::with_capacity(p.num_tasks);
    for t in 0..p.num_tasks {
        let train = draw(p.per_task_train, &mut sample_rng);
        let test = draw(p.per_task_test, &mut sample_rng);
        let (train, test, transform) = if t == 0 {
            (train, test, TaskTransform::Identity)
        } else {
            let perm = random_permutation(p.dim, &mut perm_rng);
            let all: Vec<usize> = (0..train.len()).collect();
            let all_test: Vec<usize> = (0..test.len()).collect();
            (
                train.select(&all, |x| permute(x, &perm)),
                test.select(&all_test, |x| permute(x, &perm)),
                TaskTransform::Permuted,
            )
        };
        tasks.push(Task {
            task_id: t,
            transform,
            train,
            test,
        });
    }
    Ok(TaskStream {
        tasks,
        dim: p.dim,
        num_classes: p.classes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn toy_base(n_train: usize, n_test: usize) -> BaseData {
        let img = |i: usize| -> Vec<f32> { (0..16).map(|j| ((i * 7 + j * 3) % 11) as f32 / 10.0).collect() };
        let set = |n: usize, off: usize| ImageSet {
            rows: 4,
            cols: 4,
            examples: Examples {
                features: (0..n).map(|i| img(i + off)).collect(),
                labels: (0..n).map(|i| (i + off) % 3).collect(),
            },
        };
        BaseData {
            train: set(n_train, 0),
            test: set(n_test, 1000),
        }
    }

    fn params(t: usize, n: usize) -> StreamParams {
        StreamParams {
            num_tasks: t,
            per_task_train: n,
            per_task_test: 5,
            seed: 11,
        }
    }

    #[test]
    fn single_permuted_task_is_original_data() {
        let base = toy_base(20, 10);
        let s = make_permuted_tasks(&base, &params(1, 20)).unwrap();
        let mut got = s.tasks[0].train.features.clone();
        let mut want = base.train.examples.features.clone();
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(got, want);
        assert_eq!(s.num_classes, 3);
        assert_eq!(s.dim, 16);
    }

    #[test]
    fn permuted_stream_properties() {
        let base = toy_base(40, 10);
        let a = make_permuted_tasks(&base, &params(3, 10)).unwrap();
        let b = make_permuted_tasks(&base, &params(3, 10)).unwrap();
        assert_eq!(a, b);
        let (chunks, test) = split(&base, &params(3, 10));
        let mut all: Vec<usize> = chunks.concat();
        all.sort();
        all.dedup();
        assert_eq!(all.len(), 30);
        assert_eq!(test.len(), 5);
        assert_ne!(a.tasks[1].test.features, a.tasks[2].test.features);
        assert!(matches!(
            make_permuted_tasks(&base, &params(5, 10)),
            Err(Error::InsufficientData { needed: 50, available: 40 })
        ));
    }

    #[test]
    fn rotated_stream_properties() {
        let base = toy_base(30, 10);
        let a = make_rotated_tasks(&base, &params(3, 10), AngleSchedule::Uniform).unwrap();
        let b = make_rotated_tasks(&base, &params(3, 10), AngleSchedule::Uniform).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.tasks[0].transform, TaskTransform::Identity);
        for t in &a.tasks[1..] {
            match t.transform {
                TaskTransform::Rotated { degrees } => assert!((0.0..180.0).contains(&degrees)),
                ref other => panic!("{other:?}"),
            }
        }
        for x in a.tasks.iter().flat_map(|t| &t.train.features).flatten() {
            assert!((0.0..=1.0).contains(x));
        }
        let even = make_rotated_tasks(&base, &params(3, 10), AngleSchedule::Evenly).unwrap();
        assert_eq!(even.tasks[2].transform, TaskTransform::Rotated { degrees: 120.0 });
    }

    #[test]
    fn synthetic_stream_properties() {
        let p = SyntheticParams {
            num_tasks: 3,
            per_task_train: 40,
            per_task_test: 20,
            dim: 12,
            ..SyntheticParams::default()
        };
        let a = make_synthetic_tasks(&p).unwrap();
        assert_eq!(a, make_synthetic_tasks(&p).unwrap());
        assert_ne!(a, make_synthetic_tasks(&SyntheticParams { seed: 1, ..p }).unwrap());
        assert_eq!(a.len(), 3);
        assert_eq!(a.tasks[1].train.len(), 40);
        assert!(a.tasks.iter().flat_map(|t| &t.test.features).flatten().all(|x| (0.0..=1.0).contains(x)));
    }
}

//! Command-line front end.
//!
//! Settings resolve as built-in defaults, then the `--config` TOML file,
//! then flags. The config file uses the [`TrainerConfig`] field names at top
//! level, an optional `method` key, and an optional `[dataset]` table with
//! the [`DatasetSpec`] field names. Every run directory gets `config.toml`
//! (feed it back with `--config` to repeat the run), `manifest.json`,
//! `report.json`, `accuracy.csv`, `curves.csv` and `timing.json`.
//!
//! Exit codes: 0 success, 1 usage error, 2 runtime error, 3 failed
//! verification.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{
    make_permuted_tasks, make_rotated_tasks, make_synthetic_tasks, save_stream, AngleSchedule, BaseData,
    StreamParams, SyntheticParams, TaskStream,
};
use crate::error::{Error, Result};
use crate::metrics::{aggregate_csv, mean_std, write_report, AggregateRow, ExperimentReport, ReportFormat};
use crate::nn::SubgraphSpec;
use crate::topo::WeightTransform;
use crate::trainer::{run_experiment, Method, TrainerConfig};
use crate::verify::run_suite;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetKind {
    /// Pixel-permuted MNIST (needs the IDX files).
    Permuted,
    /// Rotated MNIST (needs the IDX files).
    Rotated,
    /// Permuted Gaussian blobs; no files needed.
    Synthetic,
}

/// Which task stream to build. The stream is seeded by the run seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetSpec {
    pub kind: DatasetKind,
    pub tasks: usize,
    pub per_task: usize,
    pub per_task_test: usize,
    /// Directory with the MNIST IDX files; falls back to `TOPOCL_DATA_DIR`,
    /// then `./data`.
    pub data_dir: Option<PathBuf>,
    /// Average-pooling factor for MNIST images (2 turns 28x28 into 14x14).
    pub downsample: usize,
    pub angles: AngleSchedule,
    /// Synthetic only.
    pub classes: usize,
    pub dim: usize,
    pub spread: f64,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        let syn = SyntheticParams::default();
        DatasetSpec {
            kind: DatasetKind::Synthetic,
            tasks: 5,
            per_task: 1000,
            per_task_test: 500,
            data_dir: None,
            downsample: 2,
            angles: AngleSchedule::Uniform,
            classes: syn.classes,
            dim: syn.dim,
            spread: syn.spread,
        }
    }
}

impl DatasetSpec {
    pub fn build(&self, seed: u64) -> Result<TaskStream> {
        let params = StreamParams {
            num_tasks: self.tasks,
            per_task_train: self.per_task,
            per_task_test: self.per_task_test,
            seed,
        };
        let mnist = || -> Result<BaseData> {
            let dir = self.data_dir.clone().unwrap_or_else(BaseData::default_dir);
            Ok(BaseData::load_mnist(&dir)?.downsampled(self.downsample))
        };
        match self.kind {
            DatasetKind::Synthetic => make_synthetic_tasks(&SyntheticParams {
                num_tasks: self.tasks,
                classes: self.classes,
                dim: self.dim,
                per_task_train: self.per_task,
                per_task_test: self.per_task_test,
                spread: self.spread,
                seed,
            }),
            DatasetKind::Permuted => make_permuted_tasks(&mnist()?, &params),
            DatasetKind::Rotated => make_rotated_tasks(&mnist()?, &params, self.angles),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "topocl", version, about = "Continual learning with cycle-structure regularization")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train one method on one seed.
    Run(RunArgs),
    /// Several methods over several seeds, with a mean ± std table.
    Compare(CompareArgs),
    /// One method over a grid of lambda, m or memory size.
    Sweep(SweepArgs),
    /// Oracle and property checks; exit code 3 on any failure.
    Verify(VerifyArgs),
    /// Write a generated task stream to disk.
    GenData(GenDataArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AngleArg {
    Uniform,
    Evenly,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TransformArg {
    Raw,
    Absolute,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SettingsArgs {
    /// TOML file with trainer keys, optional `method`, optional `[dataset]`.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub dataset: Option<DatasetKind>,
    /// Number of tasks.
    #[arg(long)]
    pub tasks: Option<usize>,
    /// Training examples per task.
    #[arg(long)]
    pub per_task: Option<usize>,
    /// Test examples per task.
    #[arg(long)]
    pub per_task_test: Option<usize>,
    /// Directory with the MNIST IDX files.
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    /// Average-pooling factor for MNIST images.
    #[arg(long)]
    pub downsample: Option<usize>,
    /// Rotation angles per task for the rotated dataset.
    #[arg(long, value_enum)]
    pub angles: Option<AngleArg>,
    /// Synthetic dataset: number of classes.
    #[arg(long)]
    pub classes: Option<usize>,
    /// Synthetic dataset: input width.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Synthetic dataset: noise around class prototypes.
    #[arg(long)]
    pub spread: Option<f64>,
    /// Topological penalty weight.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Iterations between birth-death decompositions.
    #[arg(long)]
    pub m: Option<usize>,
    /// Barycenter weight on the past.
    #[arg(long)]
    pub p: Option<f64>,
    /// Barycenter weight on the newest task.
    #[arg(long)]
    pub q: Option<f64>,
    /// SGD learning rate.
    #[arg(long)]
    pub lr: Option<f64>,
    /// Mini-batch size.
    #[arg(long)]
    pub batch: Option<usize>,
    /// Replay examples added to each batch.
    #[arg(long)]
    pub replay_batch: Option<usize>,
    /// Memory slots per class per task.
    #[arg(long)]
    pub mem_per_class: Option<usize>,
    /// Hidden layer widths, e.g. `64,64`.
    #[arg(long, value_delimiter = ',')]
    pub hidden: Option<Vec<usize>>,
    /// Regularized layer pairs, e.g. `1-2,2-3`.
    #[arg(long)]
    pub subgraphs: Option<SubgraphSpec>,
    /// Filtration value of an edge: the weight itself or its magnitude.
    #[arg(long, value_enum)]
    pub weight_transform: Option<TransformArg>,
    /// Learning-curve resolution in iterations.
    #[arg(long)]
    pub log_every: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub settings: SettingsArgs,
    #[arg(long)]
    pub method: Option<Method>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "runs/run")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub settings: SettingsArgs,
    #[arg(long, value_delimiter = ',', default_value = "finetune,er-ring,top-ring,er-res,top-res,multitask")]
    pub methods: Vec<Method>,
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,4")]
    pub seeds: Vec<u64>,
    #[arg(long, default_value = "runs/compare")]
    pub out: PathBuf,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepParam {
    Lambda,
    M,
    MemPerClass,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub settings: SettingsArgs,
    #[arg(long)]
    pub method: Option<Method>,
    #[arg(long, value_enum)]
    pub param: SweepParam,
    #[arg(long, value_delimiter = ',', required = true)]
    pub values: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,4")]
    pub seeds: Vec<u64>,
    #[arg(long, default_value = "runs/sweep")]
    pub out: PathBuf,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Seed for the random test instances.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    #[command(flatten)]
    pub settings: SettingsArgs,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = "runs/data")]
    pub out: PathBuf,
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolved {
    pub method: Method,
    #[serde(flatten)]
    pub trainer: TrainerConfig,
    pub dataset: DatasetSpec,
}

fn toml_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::InvalidConfig(format!("{}: {e}", path.display()))
}

/// Reads a config file into `(method, trainer, dataset)`, each field
/// defaulting when absent. Unknown keys are rejected.
pub fn read_config_file(path: &Path) -> Result<(Option<Method>, TrainerConfig, DatasetSpec)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    let mut table: toml::Table = text.parse().map_err(|e| toml_err(path, e))?;
    let method = match table.remove("method") {
        Some(toml::Value::String(s)) => Some(s.parse::<Method>()?),
        Some(other) => return Err(toml_err(path, format!("method must be a string, got {other}"))),
        None => None,
    };
    let dataset = match table.remove("dataset") {
        Some(v) => v.try_into().map_err(|e| toml_err(path, e))?,
        None => DatasetSpec::default(),
    };
    let trainer = toml::Value::Table(table).try_into().map_err(|e| toml_err(path, e))?;
    Ok((method, trainer, dataset))
}

impl SettingsArgs {
    fn resolve(&self, method: Option<Method>, seed: Option<u64>, fallback: Method) -> Result<Resolved> {
        let (file_method, mut t, mut d) = match &self.config {
            Some(path) => read_config_file(path)?,
            None => (None, TrainerConfig::default(), DatasetSpec::default()),
        };
        macro_rules! set {
            ($dst:expr, $src:expr) => {
                if let Some(v) = $src.clone() {
                    $dst = v.into();
                }
            };
        }
        set!(d.kind, self.dataset);
        set!(d.tasks, self.tasks);
        set!(d.per_task, self.per_task);
        set!(d.per_task_test, self.per_task_test);
        if self.data_dir.is_some() {
            d.data_dir = self.data_dir.clone();
        }
        set!(d.downsample, self.downsample);
        if let Some(a) = self.angles {
            d.angles = match a {
                AngleArg::Uniform => AngleSchedule::Uniform,
                AngleArg::Evenly => AngleSchedule::Evenly,
            };
        }
        set!(d.classes, self.classes);
        set!(d.dim, self.dim);
        set!(d.spread, self.spread);
        set!(t.lambda, self.lambda);
        set!(t.m, self.m);
        set!(t.p, self.p);
        set!(t.q, self.q);
        set!(t.gamma, self.lr);
        set!(t.batch_size, self.batch);
        set!(t.replay_batch_size, self.replay_batch);
        set!(t.mem_per_class, self.mem_per_class);
        set!(t.hidden, self.hidden);
        if self.subgraphs.is_some() {
            t.subgraphs = self.subgraphs.clone();
        }
        if let Some(w) = self.weight_transform {
            t.weight_transform = match w {
                TransformArg::Raw => WeightTransform::Raw,
                TransformArg::Absolute => WeightTransform::Absolute,
            };
        }
        set!(t.log_every, self.log_every);
        set!(t.seed, seed);
        t.validate()?;
        Ok(Resolved {
            method: method.or(file_method).unwrap_or(fallback),
            trainer: t,
            dataset: d,
        })
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    method: Method,
    seed: u64,
    dataset: &'a DatasetSpec,
    config: &'a TrainerConfig,
    num_tasks: usize,
    input_dim: usize,
    num_classes: usize,
    memory_capacity: usize,
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

fn curves_csv(report: &ExperimentReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(["task", "iteration", "loss"]).map_err(err)?;
    for c in &report.curves {
        for (it, loss) in c.iterations.iter().zip(&c.loss) {
            w.write_record([(c.task_id + 1).to_string(), it.to_string(), loss.to_string()])
                .map_err(err)?;
        }
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| Error::Format(e.to_string()))?).expect("utf-8"))
}

/// Builds the stream, trains, and writes the run directory.
pub fn execute(resolved: &Resolved, out: &Path) -> Result<ExperimentReport> {
    let stream = resolved.dataset.build(resolved.trainer.seed)?;
    let report = run_experiment(&stream, &resolved.trainer, resolved.method)?;
    fs::create_dir_all(out).map_err(|e| Error::io(format!("creating {}", out.display()), e))?;
    let manifest = Manifest {
        tool: "topocl",
        version: env!("CARGO_PKG_VERSION"),
        method: resolved.method,
        seed: resolved.trainer.seed,
        dataset: &resolved.dataset,
        config: &resolved.trainer,
        num_tasks: stream.len(),
        input_dim: stream.dim,
        num_classes: stream.num_classes,
        memory_capacity: if resolved.method.memory().is_some() {
            resolved.trainer.memory_capacity(&stream)
        } else {
            0
        },
    };
    write(
        &out.join("manifest.json"),
        &serde_json::to_string_pretty(&manifest).expect("manifest serializes"),
    )?;
    write(
        &out.join("config.toml"),
        &toml::to_string(resolved).map_err(|e| Error::Format(e.to_string()))?,
    )?;
    write_report(&report, &out.join("report.json"), ReportFormat::Json)?;
    write_report(&report, &out.join("accuracy.csv"), ReportFormat::Csv)?;
    write(&out.join("curves.csv"), &curves_csv(&report)?)?;
    write(
        &out.join("timing.json"),
        &format!("{{\n  \"wall_clock_secs\": {}\n}}\n", report.wall_clock_secs),
    )?;
    Ok(report)
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))
}

fn summary(r: &ExperimentReport) -> String {
    let bwt = r.bwt.map_or_else(|| "--".into(), |b| format!("{b:+.4}"));
    format!("ACC {:.2}%  BWT {bwt}", 100.0 * r.acc)
}

fn cmd_run(args: &RunArgs) -> Result<()> {
    let resolved = args.settings.resolve(args.method, args.seed, Method::TopRing)?;
    let report = execute(&resolved, &args.out)?;
    println!(
        "{} seed {}: {}  ({} decompositions, {:.1}s) -> {}",
        resolved.method,
        resolved.trainer.seed,
        summary(&report),
        report.decompositions,
        report.wall_clock_secs,
        args.out.display()
    );
    Ok(())
}

fn run_grid(jobs: Vec<(Resolved, PathBuf)>, threads: usize) -> Result<Vec<ExperimentReport>> {
    pool(threads)?.install(|| jobs.par_iter().map(|(r, out)| execute(r, out)).collect())
}

fn cmd_compare(args: &CompareArgs) -> Result<()> {
    if args.methods.is_empty() || args.seeds.is_empty() {
        return Err(Error::InvalidConfig("need at least one method and one seed".into()));
    }
    let mut jobs = Vec::new();
    for &method in &args.methods {
        for &seed in &args.seeds {
            let r = args.settings.resolve(Some(method), Some(seed), method)?;
            jobs.push((r, args.out.join(method.name()).join(format!("seed_{seed}"))));
        }
    }
    let reports = run_grid(jobs, args.jobs)?;
    let rows: Vec<AggregateRow> = reports
        .chunks(args.seeds.len())
        .zip(&args.methods)
        .map(|(reps, m)| AggregateRow::from_reports(m.name(), reps))
        .collect();
    for row in &rows {
        println!("{}", row.display_line());
    }
    write(&args.out.join("aggregate.csv"), &aggregate_csv(&rows)?)
}

fn sweep_point(base: &Resolved, param: SweepParam, value: f64) -> Result<Resolved> {
    let mut r = base.clone();
    let as_count = |v: f64| -> Result<usize> {
        if v >= 0.0 && v.fract() == 0.0 {
            Ok(v as usize)
        } else {
            Err(Error::InvalidConfig(format!("{param:?} takes whole numbers, got {v}")))
        }
    };
    match param {
        SweepParam::Lambda => r.trainer.lambda = value,
        SweepParam::M => r.trainer.m = as_count(value)?,
        SweepParam::MemPerClass => r.trainer.mem_per_class = as_count(value)?,
    }
    r.trainer.validate()?;
    Ok(r)
}

fn param_name(p: SweepParam) -> &'static str {
    match p {
        SweepParam::Lambda => "lambda",
        SweepParam::M => "m",
        SweepParam::MemPerClass => "mem_per_class",
    }
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    if args.values.is_empty() || args.seeds.is_empty() {
        return Err(Error::InvalidConfig("grid and seed list must be non-empty".into()));
    }
    let name = param_name(args.param);
    let mut jobs = Vec::new();
    for &value in &args.values {
        for &seed in &args.seeds {
            let base = args.settings.resolve(args.method, Some(seed), Method::TopRing)?;
            let r = sweep_point(&base, args.param, value)?;
            jobs.push((r, args.out.join(format!("{name}_{value}")).join(format!("seed_{seed}"))));
        }
    }
    let reports = run_grid(jobs, args.jobs)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(["param", "value", "n", "acc_mean", "acc_std", "bwt_mean", "bwt_std", "decompositions_mean"])
        .map_err(err)?;
    for (reps, value) in reports.chunks(args.seeds.len()).zip(&args.values) {
        let row = AggregateRow::from_reports(format!("{name}={value}"), reps);
        let decomps: Vec<f64> = reps.iter().map(|r| r.decompositions as f64).collect();
        let (dmean, _) = mean_std(&decomps);
        println!("{}  decompositions {dmean:.1}", row.display_line());
        let opt = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
        w.write_record([
            name.to_string(),
            value.to_string(),
            row.n.to_string(),
            row.acc_mean.to_string(),
            row.acc_std.to_string(),
            opt(row.bwt_mean),
            opt(row.bwt_std),
            dmean.to_string(),
        ])
        .map_err(err)?;
    }
    let text = String::from_utf8(w.into_inner().map_err(|e| Error::Format(e.to_string()))?).expect("utf-8");
    write(&args.out.join("aggregate.csv"), &text)
}

fn cmd_verify(args: &VerifyArgs) -> bool {
    let results = run_suite(args.seed);
    let width = results.iter().map(|r| r.name.len()).max().unwrap_or(0);
    for r in &results {
        println!(
            "{}  {:<width$}  {:>7.2}s  {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.secs,
            r.detail
        );
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    println!("{} checks, {failed} failed", results.len());
    failed == 0
}

fn cmd_gen_data(args: &GenDataArgs) -> Result<()> {
    let resolved = args.settings.resolve(None, args.seed, Method::Finetune)?;
    let stream = resolved.dataset.build(resolved.trainer.seed)?;
    save_stream(&stream, &args.out)?;
    println!(
        "{} tasks, {} train examples, input width {} -> {}",
        stream.len(),
        stream.total_train(),
        stream.dim,
        args.out.display()
    );
    Ok(())
}

fn report_error(e: &Error) {
    eprintln!("error: {e}");
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::GenData(a) => cmd_gen_data(a),
        Command::Verify(a) => return if cmd_verify(a) { EXIT_OK } else { EXIT_VERIFY },
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e @ Error::InvalidConfig(_)) => {
            report_error(&e);
            EXIT_USAGE
        }
        Err(e) => {
            report_error(&e);
            EXIT_RUNTIME
        }
    }
}

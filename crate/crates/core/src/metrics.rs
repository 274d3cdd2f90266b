//! Accuracy-matrix bookkeeping, ACC/BWT, and report files.
//!
//! `r[i][j]` is the test accuracy on task `j` after training task `i`, as a
//! fraction in `[0, 1]`; entries above the diagonal are `None`.
//!
//! Report files:
//! - `report.json`: every field of [`ExperimentReport`] except wall-clock
//!   time (`method`, `seed`, `config`, `num_tasks`, `r`, `acc`, `bwt`,
//!   `curves`, `decompositions`), so reruns compare byte for byte.
//! - `accuracy.csv`: header `after_task,task_1,...,task_T`, then one row per
//!   task with empty cells for undefined entries.
//! - `aggregate.csv`: `label,n,acc_mean,acc_std,bwt_mean,bwt_std`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trainer::{LearningCurve, Method, TrainerConfig};

pub type AccuracyMatrix = Vec<Vec<Option<f64>>>;

fn final_row(r: &[Vec<Option<f64>>]) -> Result<Vec<f64>> {
    let t = r.len();
    let last = r.last().ok_or_else(|| Error::IncompleteMatrix("no rows".into()))?;
    if last.len() != t {
        return Err(Error::IncompleteMatrix(format!("final row has {} entries, expected {t}", last.len())));
    }
    last.iter()
        .enumerate()
        .map(|(j, v)| v.ok_or_else(|| Error::IncompleteMatrix(format!("R[{t}][{}] missing", j + 1))))
        .collect()
}

/// Mean of the final row.
pub fn compute_acc(r: &[Vec<Option<f64>>]) -> Result<f64> {
    let row = final_row(r)?;
    Ok(row.iter().sum::<f64>() / row.len() as f64)
}

/// `1/(T-1) * sum_{j<T} (R[T][j] - R[j][j])`; negative means forgetting.
pub fn compute_bwt(r: &[Vec<Option<f64>>]) -> Result<f64> {
    let row = final_row(r)?;
    let t = row.len();
    if t < 2 {
        return Err(Error::UndefinedForSingleTask);
    }
    let mut sum = 0.0;
    for (j, &last) in row.iter().enumerate().take(t - 1) {
        let diag = r[j]
            .get(j)
            .copied()
            .flatten()
            .ok_or_else(|| Error::IncompleteMatrix(format!("R[{}][{}] missing", j + 1, j + 1)))?;
        sum += last - diag;
    }
    Ok(sum / (t - 1) as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub method: Method,
    pub seed: u64,
    pub config: TrainerConfig,
    pub num_tasks: usize,
    pub r: AccuracyMatrix,
    pub acc: f64,
    /// Absent for multitask and single-task runs.
    pub bwt: Option<f64>,
    pub curves: Vec<LearningCurve>,
    pub decompositions: usize,
    #[serde(skip)]
    pub wall_clock_secs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Format(format!("report: {e}")))
    }

    pub fn accuracy_csv(&self) -> Result<String> {
        accuracy_csv(&self.r)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(format!("csv: {e}"))
}

pub fn accuracy_csv(r: &[Vec<Option<f64>>]) -> Result<String> {
    let t = r.len();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["after_task".to_string()];
    header.extend((1..=t).map(|j| format!("task_{j}")));
    w.write_record(&header).map_err(csv_err)?;
    for (i, row) in r.iter().enumerate() {
        let mut rec = vec![(i + 1).to_string()];
        rec.extend(row.iter().map(|v| v.map_or_else(String::new, |x| x.to_string())));
        w.write_record(&rec).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn parse_accuracy_csv(s: &str) -> Result<AccuracyMatrix> {
    let mut rd = csv::Reader::from_reader(s.as_bytes());
    let mut r = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(csv_err)?;
        let row = rec
            .iter()
            .skip(1)
            .map(|cell| {
                if cell.is_empty() {
                    Ok(None)
                } else {
                    cell.parse::<f64>()
                        .map(Some)
                        .map_err(|_| Error::Format(format!("bad accuracy cell {cell:?}")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        r.push(row);
    }
    Ok(r)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))
}

pub fn write_report(report: &ExperimentReport, path: &Path, format: ReportFormat) -> Result<()> {
    match format {
        ReportFormat::Json => write_file(path, &report.to_json()),
        ReportFormat::Csv => write_file(path, &report.accuracy_csv()?),
    }
}

pub fn read_report(path: &Path) -> Result<ExperimentReport> {
    ExperimentReport::from_json(&read_file(path)?)
}

pub fn read_accuracy_csv(path: &Path) -> Result<AccuracyMatrix> {
    parse_accuracy_csv(&read_file(path)?)
}

/// Sample mean and unbiased (`n - 1`) standard deviation; the deviation is 0
/// for a single value.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub label: String,
    pub n: usize,
    pub acc_mean: f64,
    pub acc_std: f64,
    pub bwt_mean: Option<f64>,
    pub bwt_std: Option<f64>,
}

impl AggregateRow {
    /// Summarizes reports, e.g. one method over several seeds.
    pub fn from_reports(label: impl Into<String>, reports: &[ExperimentReport]) -> Self {
        let accs: Vec<f64> = reports.iter().map(|r| r.acc).collect();
        let bwts: Option<Vec<f64>> = reports.iter().map(|r| r.bwt).collect();
        let (acc_mean, acc_std) = mean_std(&accs);
        let (bwt_mean, bwt_std) = match bwts {
            Some(b) if !b.is_empty() => {
                let (m, s) = mean_std(&b);
                (Some(m), Some(s))
            }
            _ => (None, None),
        };
        AggregateRow {
            label: label.into(),
            n: reports.len(),
            acc_mean,
            acc_std,
            bwt_mean,
            bwt_std,
        }
    }

    /// `ACC 71.05 ± 0.40 / BWT -0.05 ± 0.01`, percent for ACC.
    pub fn display_line(&self) -> String {
        let bwt = match (self.bwt_mean, self.bwt_std) {
            (Some(m), Some(s)) => format!("{m:+.4} ± {s:.4}"),
            _ => "--".into(),
        };
        format!(
            "{:<12} n={} ACC {:6.2} ± {:.2}  BWT {}",
            self.label,
            self.n,
            100.0 * self.acc_mean,
            100.0 * self.acc_std,
            bwt
        )
    }
}

pub fn aggregate_csv(rows: &[AggregateRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["label", "n", "acc_mean", "acc_std", "bwt_mean", "bwt_std"])
        .map_err(csv_err)?;
    let opt = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
    for row in rows {
        w.write_record([
            row.label.clone(),
            row.n.to_string(),
            row.acc_mean.to_string(),
            row.acc_std.to_string(),
            opt(row.bwt_mean),
            opt(row.bwt_std),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn write_aggregate(rows: &[AggregateRow], path: &Path) -> Result<()> {
    write_file(path, &aggregate_csv(rows)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri(rows: &[&[f64]]) -> AccuracyMatrix {
        let t = rows.len();
        rows.iter()
            .map(|row| (0..t).map(|j| row.get(j).copied()).collect())
            .collect()
    }

    #[test]
    fn acc_examples() {
        assert_eq!(compute_acc(&tri(&[&[0.9]])).unwrap(), 0.9);
        assert!((compute_acc(&tri(&[&[0.9], &[0.8, 0.85]])).unwrap() - 0.825).abs() < 1e-15);
        assert_eq!(compute_acc(&tri(&[&[0.5], &[0.0, 0.0]])).unwrap(), 0.0);
    }

    #[test]
    fn bwt_examples() {
        let r = tri(&[&[0.9], &[0.8, 0.85]]);
        assert!((compute_bwt(&r).unwrap() + 0.1).abs() < 1e-12);
        let r = tri(&[&[0.7], &[0.7, 0.6]]);
        assert_eq!(compute_bwt(&r).unwrap(), 0.0);
        assert!(matches!(compute_bwt(&tri(&[&[0.9]])), Err(Error::UndefinedForSingleTask)));
    }

    #[test]
    fn incomplete_matrix() {
        let mut r = tri(&[&[0.9], &[0.8, 0.85]]);
        r[1][1] = None;
        assert!(matches!(compute_acc(&r), Err(Error::IncompleteMatrix(_))));
        let mut r = tri(&[&[0.9], &[0.8, 0.85]]);
        r[0][0] = None;
        assert!(matches!(compute_bwt(&r), Err(Error::IncompleteMatrix(_))));
        assert!(compute_acc(&[]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let r = tri(&[&[0.1], &[0.2, 1.0 / 3.0], &[0.4, 0.5, 0.6]]);
        let text = accuracy_csv(&r).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with("after_task,task_1,task_2,task_3\n1,0.1,,\n"));
        assert_eq!(parse_accuracy_csv(&text).unwrap(), r);
    }

    #[test]
    fn mean_std_reference() {
        let (m, s) = mean_std(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]);
        assert_eq!(m, 5.0);
        assert!((s - (32.0f64 / 7.0).sqrt()).abs() < 1e-12);
        assert_eq!(mean_std(&[3.0]), (3.0, 0.0));
    }
}

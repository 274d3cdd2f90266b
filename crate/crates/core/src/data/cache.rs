//! On-disk cache of a generated task stream: `manifest.json` plus one
//! little-endian binary file per task split
//! (`u32 count, u32 dim, f32 features, u32 labels`).

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Examples, Task, TaskStream, TaskTransform};
use crate::binio::{put_f32s, put_u32, to_u32, ByteReader};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    dim: usize,
    num_classes: usize,
    tasks: Vec<ManifestTask>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestTask {
    task_id: usize,
    transform: TaskTransform,
    train: String,
    test: String,
}

fn encode(ex: &Examples, dim: usize) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    let io = |e| Error::io("encoding task split", e);
    put_u32(&mut out, to_u32(ex.len(), "example count")?).map_err(io)?;
    put_u32(&mut out, to_u32(dim, "input width")?).map_err(io)?;
    for x in &ex.features {
        if x.len() != dim {
            return Err(Error::shape(format!("{dim} features"), format!("{}", x.len())));
        }
        put_f32s(&mut out, x).map_err(io)?;
    }
    for &y in &ex.labels {
        put_u32(&mut out, to_u32(y, "label")?).map_err(io)?;
    }
    Ok(out)
}

fn decode(bytes: &[u8], what: &str) -> Result<(Examples, usize)> {
    let mut r = ByteReader::new(bytes, what);
    let n = r.u32_le()? as usize;
    let dim = r.u32_le()? as usize;
    let mut features = Vec::with_capacity(n);
    for _ in 0..n {
        features.push(r.f32s_le(dim)?);
    }
    let labels = (0..n).map(|_| r.u32_le().map(|y| y as usize)).collect::<Result<_>>()?;
    r.finish()?;
    Ok((Examples { features, labels }, dim))
}

pub fn save_stream(stream: &TaskStream, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
    let mut manifest = Manifest {
        dim: stream.dim,
        num_classes: stream.num_classes,
        tasks: Vec::new(),
    };
    for task in &stream.tasks {
        let train = format!("task_{}_train.bin", task.task_id);
        let test = format!("task_{}_test.bin", task.task_id);
        for (name, ex) in [(&train, &task.train), (&test, &task.test)] {
            let path = dir.join(name);
            fs::write(&path, encode(ex, stream.dim)?)
                .map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
        }
        manifest.tasks.push(ManifestTask {
            task_id: task.task_id,
            transform: task.transform.clone(),
            train,
            test,
        });
    }
    let path = dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Format(e.to_string()))?;
    fs::write(&path, json).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

pub fn load_stream(dir: &Path) -> Result<TaskStream> {
    let read = |name: &str| {
        let path = dir.join(name);
        fs::read(&path).map_err(|e| Error::io(format!("reading {}", path.display()), e))
    };
    let manifest: Manifest =
        serde_json::from_slice(&read("manifest.json")?).map_err(|e| Error::Format(format!("manifest.json: {e}")))?;
    let mut tasks = Vec::with_capacity(manifest.tasks.len());
    for t in manifest.tasks {
        let split = |name: &str| -> Result<Examples> {
            let (ex, dim) = decode(&read(name)?, name)?;
            if dim != manifest.dim {
                return Err(Error::shape(format!("{} features", manifest.dim), format!("{dim} in {name}")));
            }
            if let Some(&y) = ex.labels.iter().find(|&&y| y >= manifest.num_classes) {
                return Err(Error::InvalidLabel {
                    label: y,
                    classes: manifest.num_classes,
                });
            }
            Ok(ex)
        };
        tasks.push(Task {
            task_id: t.task_id,
            transform: t.transform,
            train: split(&t.train)?,
            test: split(&t.test)?,
        });
    }
    Ok(TaskStream {
        tasks,
        dim: manifest.dim,
        num_classes: manifest.num_classes,
    })
}

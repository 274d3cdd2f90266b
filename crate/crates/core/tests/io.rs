use std::fs;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use topocl::data::{
    encode_idx, load_stream, make_permuted_tasks, make_rotated_tasks, save_stream, AngleSchedule, BaseData, Examples,
    ImageSet, StreamParams,
};
use topocl::memory::{EpisodicMemory, MemoryItem, MemoryStrategy};
use topocl::metrics::{
    compute_acc, compute_bwt, read_accuracy_csv, read_report, write_aggregate, write_report, AggregateRow,
    ReportFormat,
};
use topocl::nn::Mlp;
use topocl::trainer::{run_experiment, Method, TrainerConfig};
use topocl::Error;

/// 28x28 images with a bright square whose position depends on the label.
fn fake_images(n: usize, offset: usize) -> ImageSet {
    let mut ex = Examples::default();
    for i in 0..n {
        let y = (i + offset) % 10;
        let mut img = vec![0.0f32; 28 * 28];
        let (r0, c0) = (2 + 2 * (y / 5) * 5, 2 + 4 * (y % 5));
        for r in r0..r0 + 6 {
            for c in c0..c0 + 4 {
                img[r * 28 + c] = 1.0;
            }
        }
        ex.features.push(img);
        ex.labels.push(y);
    }
    ImageSet {
        rows: 28,
        cols: 28,
        examples: ex,
    }
}

fn write_mnist_dir(dir: &std::path::Path) {
    for (prefix, set) in [("train", fake_images(300, 0)), ("t10k", fake_images(60, 3))] {
        let (img, lab) = encode_idx(&set);
        fs::write(dir.join(format!("{prefix}-images-idx3-ubyte")), img).unwrap();
        fs::write(dir.join(format!("{prefix}-labels-idx1-ubyte")), lab).unwrap();
    }
}

#[test]
fn mnist_directory_to_permuted_and_rotated_streams() {
    let dir = tempfile::tempdir().unwrap();
    write_mnist_dir(dir.path());
    let base = BaseData::load_mnist(dir.path()).unwrap().downsampled(2);
    assert_eq!((base.train.rows, base.train.cols), (14, 14));
    assert_eq!(base.train.examples.features[0].len(), 196);
    let p = StreamParams {
        num_tasks: 3,
        per_task_train: 100,
        per_task_test: 40,
        seed: 1,
    };
    let perm = make_permuted_tasks(&base, &p).unwrap();
    assert_eq!((perm.len(), perm.dim, perm.num_classes), (3, 196, 10));
    let rot = make_rotated_tasks(&base, &p, AngleSchedule::Uniform).unwrap();
    assert_eq!(rot.tasks[1].train.len(), 100);
    let too_many = StreamParams { num_tasks: 4, ..p };
    assert!(matches!(
        make_permuted_tasks(&base, &too_many),
        Err(Error::InsufficientData { needed: 400, available: 300 })
    ));

    let cache = dir.path().join("cache");
    save_stream(&perm, &cache).unwrap();
    assert_eq!(load_stream(&cache).unwrap(), perm);
    assert!(cache.join("manifest.json").exists());
}

#[test]
fn missing_mnist_files_are_io_errors() {
    let dir = tempfile::tempdir().unwrap();
    let err = BaseData::load_mnist(dir.path()).unwrap_err();
    assert!(matches!(err, Error::Io { .. }));
    assert!(err.to_string().contains("train-images-idx3-ubyte"));
}

#[test]
fn checkpoint_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let net = Mlp::new(&[6, 5, 3], &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
    let path = dir.path().join("net.bin");
    net.save(&path).unwrap();
    assert_eq!(fs::metadata(&path).unwrap().len() as usize, 4 + 3 * 4 + (30 + 5 + 15 + 3) * 4);
    assert_eq!(Mlp::load(&path).unwrap(), net);
}

#[test]
fn restored_memory_continues_identically() {
    let dir = tempfile::tempdir().unwrap();
    let item = |i: usize| MemoryItem {
        features: vec![i as f32, 0.5],
        label: i % 3,
        task_id: i / 30,
    };
    for strategy in [MemoryStrategy::Ring, MemoryStrategy::Reservoir] {
        let mut mem = EpisodicMemory::new(strategy, 12, 77);
        mem.update((0..50).map(item));
        let path = dir.path().join("mem.bin");
        mem.save(&path).unwrap();
        let mut back = EpisodicMemory::load(&path).unwrap();
        mem.update((50..90).map(item));
        back.update((50..90).map(item));
        assert_eq!(mem.slots(), back.slots());
        let a: Vec<MemoryItem> = mem.sample(5).into_iter().cloned().collect();
        let b: Vec<MemoryItem> = back.sample(5).into_iter().cloned().collect();
        assert_eq!(a, b);
    }
}

#[test]
fn report_files_round_trip() {
    let stream = topocl::data::make_synthetic_tasks(&topocl::data::SyntheticParams {
        num_tasks: 3,
        per_task_train: 100,
        per_task_test: 30,
        dim: 20,
        ..Default::default()
    })
    .unwrap();
    let cfg = TrainerConfig {
        hidden: vec![8, 8],
        ..TrainerConfig::default()
    };
    let rep = run_experiment(&stream, &cfg, Method::ErRing).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("report.json");
    let csv = dir.path().join("accuracy.csv");
    write_report(&rep, &json, ReportFormat::Json).unwrap();
    write_report(&rep, &csv, ReportFormat::Csv).unwrap();

    let back = read_report(&json).unwrap();
    assert_eq!(back.r, rep.r);
    assert_eq!(back.acc, rep.acc);
    assert_eq!(back.bwt, rep.bwt);
    assert_eq!(back.config, rep.config);
    assert!((compute_acc(&back.r).unwrap() - rep.acc).abs() <= 1e-12);
    assert!((compute_bwt(&back.r).unwrap() - rep.bwt.unwrap()).abs() <= 1e-12);
    assert!(!fs::read_to_string(&json).unwrap().contains("wall_clock"));

    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 3 + 1);
    assert_eq!(read_accuracy_csv(&csv).unwrap(), rep.r);

    let agg = dir.path().join("aggregate.csv");
    write_aggregate(&[AggregateRow::from_reports("er-ring", &[rep.clone(), back])], &agg).unwrap();
    let lines: Vec<String> = fs::read_to_string(&agg).unwrap().lines().map(String::from).collect();
    assert_eq!(lines[0], "label,n,acc_mean,acc_std,bwt_mean,bwt_std");
    assert!(lines[1].starts_with("er-ring,2,"));
}

#[test]
fn aggregate_uses_unbiased_deviation() {
    let stream = topocl::data::make_synthetic_tasks(&topocl::data::SyntheticParams {
        num_tasks: 2,
        per_task_train: 50,
        per_task_test: 20,
        dim: 10,
        ..Default::default()
    })
    .unwrap();
    let reports: Vec<_> = (0..3u64)
        .map(|seed| {
            let cfg = TrainerConfig {
                hidden: vec![6],
                seed,
                ..TrainerConfig::default()
            };
            run_experiment(&stream, &cfg, Method::Finetune).unwrap()
        })
        .collect();
    let row = AggregateRow::from_reports("finetune", &reports);
    let accs: Vec<f64> = reports.iter().map(|r| r.acc).collect();
    let mean = accs.iter().sum::<f64>() / 3.0;
    let var = accs.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / 2.0;
    assert!((row.acc_mean - mean).abs() < 1e-15);
    assert!((row.acc_std - var.sqrt()).abs() < 1e-15);
    assert_eq!(row.n, 3);
}

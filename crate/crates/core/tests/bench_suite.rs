use credal_core::bench::{generate_suite, read_manifest, run_benchmark, BenchOptions, MANIFEST};
use credal_core::generate::GenParams;
use credal_core::io::{read_benchmark_csv, BenchmarkRecord};
use credal_core::{Metric, ReductionPolicy};

fn params(vertices: (usize, usize), seed: u64) -> GenParams {
    GenParams {
        n_nodes: 5,
        card_range: (2, 3),
        max_indegree: 2,
        vertex_range: vertices,
        seed,
    }
}

fn bounds_only(records: &[BenchmarkRecord]) -> Vec<(String, String, usize, u64, u64)> {
    records
        .iter()
        .map(|r| (r.model_id.clone(), r.method.clone(), r.state, r.lower.to_bits(), r.upper.to_bits()))
        .collect()
}

#[test]
fn runs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let ea = generate_suite(&a, 6, &params((2, 3), 11), Some(5_000)).unwrap();
    let eb = generate_suite(&b, 6, &params((2, 3), 11), Some(5_000)).unwrap();
    assert_eq!(ea, eb);
    assert_eq!(read_manifest(a.join(MANIFEST)).unwrap(), ea);
    for f in std::fs::read_dir(&a).unwrap() {
        let name = f.unwrap().file_name();
        assert_eq!(std::fs::read(a.join(&name)).unwrap(), std::fs::read(b.join(&name)).unwrap());
    }
    let ra = run_benchmark(&a, &BenchOptions::default()).unwrap();
    let rb = run_benchmark(&b, &BenchOptions::default()).unwrap();
    assert_eq!(bounds_only(&ra.records), bounds_only(&rb.records));
}

#[test]
fn reference_and_inner_properties() {
    let dir = tempfile::tempdir().unwrap();
    generate_suite(dir.path(), 8, &params((2, 3), 21), Some(5_000)).unwrap();
    let out = dir.path().join("results.csv");
    let opts = BenchOptions {
        methods: [2, 5, 10, 20]
            .into_iter()
            .map(|k| ReductionPolicy::k_reduce(k, Metric::Euclidean))
            .collect(),
        out_csv: Some(out.clone()),
        ..BenchOptions::default()
    };
    let outcome = run_benchmark(dir.path(), &opts).unwrap();
    let s = &outcome.summary;
    assert_eq!(s.method("exact").unwrap().rmse, Some(0.0));
    let mut losses = Vec::new();
    for k in ["k2", "k5", "k10", "k20"] {
        let m = s.method(k).unwrap();
        assert!(m.rmse.unwrap().is_finite());
        assert_eq!(m.outside_reference, 0, "{k}");
        losses.push(m.mean_width_loss.unwrap());
    }
    assert!(losses.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{losses:?}");
    let written = read_benchmark_csv(&out).unwrap();
    assert_eq!(written.len(), outcome.records.len());
}

#[test]
fn bayesian_suite_has_zero_error() {
    let dir = tempfile::tempdir().unwrap();
    generate_suite(dir.path(), 5, &params((1, 1), 31), None).unwrap();
    let outcome = run_benchmark(dir.path(), &BenchOptions::default()).unwrap();
    for k in ["k10", "k5"] {
        assert!(outcome.summary.method(k).unwrap().rmse.unwrap() < 1e-12);
    }
}

#[test]
fn external_records_are_merged() {
    let dir = tempfile::tempdir().unwrap();
    generate_suite(dir.path(), 3, &params((2, 2), 41), Some(5_000)).unwrap();
    let first = run_benchmark(dir.path(), &BenchOptions::default()).unwrap();
    let external: Vec<BenchmarkRecord> = first
        .records
        .iter()
        .filter(|r| r.method == "exact")
        .map(|r| BenchmarkRecord {
            method: "Outer".into(),
            lower: (r.lower - 0.01).max(0.0),
            upper: (r.upper + 0.01).min(1.0),
            time_ms: r.time_ms * 2.0,
            ..r.clone()
        })
        .collect();
    let opts = BenchOptions {
        methods: Vec::new(),
        external,
        ..BenchOptions::default()
    };
    let outcome = run_benchmark(dir.path(), &opts).unwrap();
    let m = outcome.summary.method("Outer").unwrap();
    assert!(m.rmse.unwrap() > 0.0 && m.rmse.unwrap() <= 0.01 + 1e-12);
    assert!(m.outside_reference > 0);
}

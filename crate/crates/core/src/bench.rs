//! Suite generation and the accuracy/speed comparison of inference methods
//! against exact credal VE.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::time::Duration;

use thiserror::Error;

use crate::generate::{random_network, select_tasks, GenError, GenParams};
use crate::inference::{credal_ve, InferenceError, ReductionPolicy};
use crate::io::{
    format_evidence, parse_evidence, parse_vcredal, serialize_vcredal, write_benchmark_csv, BenchmarkRecord, IoError,
    TaskKind,
};
use crate::model::{IntervalResult, Query};
use crate::preprocess::requisite_graph;

pub const MANIFEST: &str = "manifest.csv";
pub const MANIFEST_HEADER: [&str; 5] = ["model_id", "file", "task", "target", "evidence"];
pub const REFERENCE: &str = "exact";

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error("manifest row {row}: {message}")]
    Manifest { row: usize, message: String },
    #[error("no records align with the reference")]
    NoAligned,
    #[error("times must be positive (baseline {baseline} ms, method {method} ms)")]
    BadTime { baseline: f64, method: f64 },
}

impl From<std::io::Error> for BenchError {
    fn from(e: std::io::Error) -> Self {
        BenchError::Io(IoError::Io(e))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub model_id: String,
    /// Relative to the suite directory.
    pub file: String,
    pub task: TaskKind,
    pub query: Query,
}

pub fn write_manifest(path: impl AsRef<Path>, entries: &[ManifestEntry]) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    w.write_record(MANIFEST_HEADER).map_err(csv_error)?;
    for e in entries {
        w.write_record([
            e.model_id.clone(),
            e.file.clone(),
            e.task.to_string(),
            e.query.target.to_string(),
            format_evidence(&e.query.evidence),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> BenchError {
    BenchError::Manifest {
        row: e.position().map_or(0, |p| p.line() as usize),
        message: e.to_string(),
    }
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>, BenchError> {
    let mut rdr = csv::Reader::from_path(path).map_err(csv_error)?;
    let header = rdr.headers().map_err(csv_error)?;
    if header.iter().map(str::trim).ne(MANIFEST_HEADER.iter().copied()) {
        return Err(BenchError::Manifest {
            row: 1,
            message: format!("header must be `{}`", MANIFEST_HEADER.join(",")),
        });
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let err = |message: String| BenchError::Manifest { row, message };
        let rec = rec.map_err(csv_error)?;
        let target = rec[3].trim().parse().map_err(|_| err(format!("bad target `{}`", &rec[3])))?;
        out.push(ManifestEntry {
            model_id: rec[0].trim().to_string(),
            file: rec[1].trim().to_string(),
            task: rec[2].trim().parse().map_err(err)?,
            query: Query {
                target,
                evidence: parse_evidence(&rec[4]).map_err(err)?,
            },
        });
    }
    Ok(out)
}

/// Writes `n_models` random networks and their selected tasks into `dir`.
///
/// Seeds run upward from `params.seed`. With `max_selections` set, a network
/// is skipped when the requisite graph of either task has more joint vertex
/// selections than that, which keeps exact inference affordable.
pub fn generate_suite(
    dir: impl AsRef<Path>,
    n_models: usize,
    params: &GenParams,
    max_selections: Option<u128>,
) -> Result<Vec<ManifestEntry>, BenchError> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let mut entries = Vec::new();
    let mut made = 0;
    let mut attempt = 0u64;
    while made < n_models {
        if attempt > 1000 * (n_models as u64 + 1) {
            return Err(BenchError::Gen(GenError::InvalidParams(format!(
                "only {made} of {n_models} networks fit under the selection cap"
            ))));
        }
        let p = GenParams {
            seed: params.seed.wrapping_add(attempt),
            ..params.clone()
        };
        attempt += 1;
        let net = random_network(&p)?;
        let (marginal, conditional) = select_tasks(&net);
        let tasks: Vec<(TaskKind, Query)> = std::iter::once((TaskKind::Marginal, marginal))
            .chain(conditional.map(|q| (TaskKind::Conditional, q)))
            .collect();
        if let Some(cap) = max_selections {
            let fits = tasks.iter().all(|(_, q)| {
                requisite_graph(&net, q).is_ok_and(|r| r.reduced.selection_count() <= cap)
            });
            if !fits {
                continue;
            }
        }
        let model_id = format!("model_{made:03}");
        let file = format!("{model_id}.vcredal");
        std::fs::write(dir.join(&file), serialize_vcredal(&net))?;
        for (task, query) in tasks {
            entries.push(ManifestEntry {
                model_id: model_id.clone(),
                file: file.clone(),
                task,
                query,
            });
        }
        made += 1;
    }
    write_manifest(dir.join(MANIFEST), &entries)?;
    Ok(entries)
}

type Key = (String, TaskKind, usize);

fn key(r: &BenchmarkRecord) -> Key {
    (r.model_id.clone(), r.task, r.state)
}

/// Root mean squared error pooled over lower and upper bounds of every
/// `(model, task, state)` present in both record sets.
pub fn compute_rmse(approx: &[BenchmarkRecord], exact: &[BenchmarkRecord]) -> Result<f64, BenchError> {
    let reference: BTreeMap<Key, &BenchmarkRecord> = exact.iter().map(|r| (key(r), r)).collect();
    let (mut sum, mut n) = (0.0, 0usize);
    for a in approx {
        if let Some(e) = reference.get(&key(a)) {
            sum += (a.lower - e.lower).powi(2) + (a.upper - e.upper).powi(2);
            n += 2;
        }
    }
    if n == 0 {
        return Err(BenchError::NoAligned);
    }
    Ok((sum / n as f64).sqrt())
}

pub fn compute_speedup(baseline_ms: f64, method_ms: f64) -> Result<f64, BenchError> {
    if !(baseline_ms > 0.0 && method_ms > 0.0) {
        return Err(BenchError::BadTime {
            baseline: baseline_ms,
            method: method_ms,
        });
    }
    Ok(baseline_ms / method_ms)
}

/// Time per query (`model`, `task`), taken from any of its state records.
fn query_times<'a>(records: impl Iterator<Item = &'a BenchmarkRecord>) -> BTreeMap<(String, TaskKind), f64> {
    records.map(|r| ((r.model_id.clone(), r.task), r.time_ms)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodSummary {
    pub method: String,
    pub rmse: Option<f64>,
    pub speed_up: Option<f64>,
    /// Queries aligned with the reference.
    pub queries: usize,
    /// Reference queries this method has no result for.
    pub dropped: usize,
    /// Aligned states whose interval is not inside the reference one.
    pub outside_reference: usize,
    /// Mean of (reference width - method width) over aligned states.
    pub mean_width_loss: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BenchmarkSummary {
    pub overall: Vec<MethodSummary>,
    pub per_task: Vec<(TaskKind, Vec<MethodSummary>)>,
    /// `(model, task, method, message)` for every failed run.
    pub failures: Vec<(String, TaskKind, String, String)>,
}

impl BenchmarkSummary {
    pub fn method(&self, name: &str) -> Option<&MethodSummary> {
        self.overall.iter().find(|m| m.method == name)
    }
}

/// Compares every method in `records` with the `exact` records.
pub fn summarize(records: &[BenchmarkRecord]) -> BenchmarkSummary {
    let mut per_task = Vec::new();
    for task in [TaskKind::Marginal, TaskKind::Conditional] {
        let subset: Vec<BenchmarkRecord> = records.iter().filter(|r| r.task == task).cloned().collect();
        if !subset.is_empty() {
            per_task.push((task, summarize_methods(&subset)));
        }
    }
    BenchmarkSummary {
        overall: summarize_methods(records),
        per_task,
        failures: Vec::new(),
    }
}

fn summarize_methods(records: &[BenchmarkRecord]) -> Vec<MethodSummary> {
    let mut by_method: BTreeMap<&str, Vec<BenchmarkRecord>> = BTreeMap::new();
    for r in records {
        by_method.entry(r.method.as_str()).or_default().push(r.clone());
    }
    let exact = by_method.get(REFERENCE).cloned().unwrap_or_default();
    let exact_keys: BTreeMap<Key, &BenchmarkRecord> = exact.iter().map(|r| (key(r), r)).collect();
    let exact_times = query_times(exact.iter());
    let mut names: Vec<&str> = by_method.keys().copied().collect();
    // reference first, then by k descending for kN names, then the rest
    names.sort_by_key(|m| (*m != REFERENCE, std::cmp::Reverse(k_of(m)), m.to_string()));
    names
        .into_iter()
        .map(|name| {
            let rs = &by_method[name];
            let times = query_times(rs.iter());
            let common: BTreeSet<_> = times.keys().filter(|q| exact_times.contains_key(*q)).cloned().collect();
            let (base, mine) = common
                .iter()
                .fold((0.0, 0.0), |(b, m), q| (b + exact_times[q], m + times[q]));
            let aligned: Vec<(&BenchmarkRecord, &BenchmarkRecord)> = rs
                .iter()
                .filter_map(|r| exact_keys.get(&key(r)).map(|e| (r, *e)))
                .collect();
            let outside = aligned
                .iter()
                .filter(|(a, e)| a.lower < e.lower - 1e-9 || a.upper > e.upper + 1e-9)
                .count();
            let loss = (!aligned.is_empty()).then(|| {
                aligned
                    .iter()
                    .map(|(a, e)| (e.upper - e.lower) - (a.upper - a.lower))
                    .sum::<f64>()
                    / aligned.len() as f64
            });
            MethodSummary {
                method: name.to_string(),
                rmse: compute_rmse(rs, &exact).ok(),
                speed_up: compute_speedup(base, mine).ok(),
                queries: common.len(),
                dropped: exact_times.len() - common.len(),
                outside_reference: outside,
                mean_width_loss: loss,
            }
        })
        .collect()
}

fn k_of(method: &str) -> usize {
    ReductionPolicy::from_label(method).and_then(|p| p.k()).unwrap_or(0)
}

impl fmt::Display for BenchmarkSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn table(out: &mut String, rows: &[MethodSummary]) {
            let opt = |x: Option<f64>, p: usize| x.map_or("-".to_string(), |v| format!("{v:.p$}"));
            let w = rows.iter().map(|r| r.method.len()).max().unwrap_or(6).max(6);
            let _ = writeln!(out, "{:<w$} | {:>8} | {:>9} | {:>7}", "Method", "RMSE", "Speed up", "Queries");
            let _ = writeln!(out, "{}", "-".repeat(w + 35));
            for r in rows {
                let _ = writeln!(
                    out,
                    "{:<w$} | {:>8} | {:>9} | {:>7}",
                    r.method,
                    opt(r.rmse, 4),
                    opt(r.speed_up, 3),
                    r.queries
                );
            }
        }
        let mut out = String::new();
        table(&mut out, &self.overall);
        for (task, rows) in &self.per_task {
            let _ = writeln!(out, "\n{task} tasks");
            table(&mut out, rows);
        }
        let _ = writeln!(
            out,
            "\nRMSE pools lower and upper bounds over all states and tasks; \
             speed up is total exact time over total method time on common queries."
        );
        if !self.failures.is_empty() {
            let _ = writeln!(out, "\n{} failed runs:", self.failures.len());
            for (m, t, method, msg) in &self.failures {
                let _ = writeln!(out, "  {m} {t} {method}: {msg}");
            }
        }
        f.write_str(&out)
    }
}

#[derive(Debug, Clone)]
pub struct BenchOptions {
    /// Methods run in addition to the exact reference.
    pub methods: Vec<ReductionPolicy>,
    /// Records from other tools merged by key; `exact` records are ignored.
    pub external: Vec<BenchmarkRecord>,
    pub out_csv: Option<PathBuf>,
    /// Each timing is the minimum over this many runs.
    pub repeats: usize,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            methods: vec![
                ReductionPolicy::k_reduce(10, crate::geometry::Metric::Euclidean),
                ReductionPolicy::k_reduce(5, crate::geometry::Metric::Euclidean),
            ],
            external: Vec::new(),
            out_csv: None,
            repeats: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchOutcome {
    pub records: Vec<BenchmarkRecord>,
    pub summary: BenchmarkSummary,
}

fn records_for(e: &ManifestEntry, method: &str, r: &IntervalResult, time: Duration) -> Vec<BenchmarkRecord> {
    r.bounds
        .iter()
        .enumerate()
        .map(|(state, b)| BenchmarkRecord {
            model_id: e.model_id.clone(),
            task: e.task,
            target: e.query.target,
            evidence: e.query.evidence.clone(),
            method: method.to_string(),
            state,
            lower: b.lower,
            upper: b.upper,
            time_ms: time.as_secs_f64() * 1e3,
        })
        .collect()
}

/// Runs exact VE and every requested method on each manifest task, after
/// identical requisite pruning. Failures are recorded and skipped.
pub fn run_benchmark(suite: impl AsRef<Path>, opts: &BenchOptions) -> Result<BenchOutcome, BenchError> {
    let suite = suite.as_ref();
    let entries = read_manifest(suite.join(MANIFEST))?;
    let mut policies = vec![ReductionPolicy::exact()];
    policies.extend(opts.methods.iter().filter(|p| p.k().is_some()).copied());
    let mut records = Vec::new();
    let mut failures = Vec::new();
    let mut cache: Option<(String, Result<crate::model::CredalNetwork, String>)> = None;
    for e in &entries {
        if cache.as_ref().is_none_or(|(f, _)| *f != e.file) {
            let net = std::fs::read_to_string(suite.join(&e.file))
                .map_err(IoError::from)
                .and_then(|t| parse_vcredal(&t))
                .map_err(|err| err.to_string());
            cache = Some((e.file.clone(), net));
        }
        let net = match &cache.as_ref().unwrap().1 {
            Ok(n) => n,
            Err(msg) => {
                failures.push((e.model_id.clone(), e.task, "load".into(), msg.clone()));
                continue;
            }
        };
        let pre = match requisite_graph(net, &e.query) {
            Ok(p) => p,
            Err(err) => {
                failures.push((e.model_id.clone(), e.task, "preprocess".into(), err.to_string()));
                continue;
            }
        };
        for p in &policies {
            match timed(|| credal_ve(&pre.reduced, &pre.query, p), opts.repeats.max(1)) {
                Ok((r, t)) => records.extend(records_for(e, &p.label(), &r, t)),
                Err(err) => failures.push((e.model_id.clone(), e.task, p.label(), err.to_string())),
            }
        }
    }
    let models: BTreeSet<&str> = entries.iter().map(|e| e.model_id.as_str()).collect();
    records.extend(
        opts.external
            .iter()
            .filter(|r| r.method != REFERENCE && models.contains(r.model_id.as_str()))
            .cloned(),
    );
    records.sort_by(|a, b| {
        (&a.model_id, a.task, &a.method, a.state).cmp(&(&b.model_id, b.task, &b.method, b.state))
    });
    if let Some(path) = &opts.out_csv {
        write_benchmark_csv(path, &records)?;
    }
    let mut summary = summarize(&records);
    summary.failures = failures;
    Ok(BenchOutcome { records, summary })
}

fn timed(
    f: impl Fn() -> Result<IntervalResult, InferenceError>,
    repeats: usize,
) -> Result<(IntervalResult, Duration), InferenceError> {
    let mut best: Option<(IntervalResult, Duration)> = None;
    for _ in 0..repeats {
        let start = std::time::Instant::now();
        let r = f()?;
        let t = start.elapsed();
        if best.as_ref().is_none_or(|(_, b)| t < *b) {
            best = Some((r, t));
        }
    }
    Ok(best.unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(model: &str, method: &str, state: usize, lower: f64, upper: f64, time_ms: f64) -> BenchmarkRecord {
        BenchmarkRecord {
            model_id: model.into(),
            task: TaskKind::Marginal,
            target: 0,
            evidence: BTreeMap::new(),
            method: method.into(),
            state,
            lower,
            upper,
            time_ms,
        }
    }

    #[test]
    fn rmse_examples() {
        let exact = vec![rec("m", "exact", 0, 0.2, 0.5, 1.0)];
        assert_eq!(compute_rmse(&exact, &exact).unwrap(), 0.0);
        let approx = vec![rec("m", "k5", 0, 0.3, 0.5, 1.0)];
        assert!((compute_rmse(&approx, &exact).unwrap() - (0.01f64 / 2.0).sqrt()).abs() < 1e-12);
        let other = vec![rec("n", "k5", 0, 0.3, 0.5, 1.0)];
        assert!(matches!(compute_rmse(&other, &exact), Err(BenchError::NoAligned)));
    }

    #[test]
    fn speedup_examples() {
        assert_eq!(compute_speedup(5.0, 5.0).unwrap(), 1.0);
        assert_eq!(compute_speedup(200.0, 20.0).unwrap(), 10.0);
        assert!(compute_speedup(0.0, 1.0).is_err());
        assert!(compute_speedup(1.0, -1.0).is_err());
    }

    #[test]
    fn summary_pools_queries() {
        let records = vec![
            rec("a", "exact", 0, 0.2, 0.6, 10.0),
            rec("a", "exact", 1, 0.4, 0.8, 10.0),
            rec("b", "exact", 0, 0.1, 0.1, 30.0),
            rec("a", "k5", 0, 0.3, 0.5, 2.0),
            rec("a", "k5", 1, 0.5, 0.7, 2.0),
        ];
        let s = summarize(&records);
        let k5 = s.method("k5").unwrap();
        assert_eq!(k5.queries, 1);
        assert_eq!(k5.dropped, 1);
        assert_eq!(k5.speed_up, Some(5.0));
        assert!((k5.rmse.unwrap() - 0.1).abs() < 1e-12);
        assert!((k5.mean_width_loss.unwrap() - 0.2).abs() < 1e-12);
        assert_eq!(k5.outside_reference, 0);
        assert_eq!(s.overall[0].method, "exact");
        assert_eq!(s.method("exact").unwrap().rmse, Some(0.0));
        assert!(s.to_string().contains("Speed up"));
    }

    #[test]
    fn methods_are_ordered_by_k() {
        let records = vec![
            rec("a", "k5", 0, 0.1, 0.1, 1.0),
            rec("a", "ApproxLP", 0, 0.1, 0.1, 1.0),
            rec("a", "exact", 0, 0.1, 0.1, 1.0),
            rec("a", "k10", 0, 0.1, 0.1, 1.0),
        ];
        let names: Vec<String> = summarize(&records).overall.into_iter().map(|m| m.method).collect();
        assert_eq!(names, ["exact", "k10", "k5", "ApproxLP"]);
    }
}

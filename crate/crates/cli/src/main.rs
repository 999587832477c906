use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};

use credal_core::bench::{generate_suite, run_benchmark, BenchOptions};
use credal_core::generate::GenParams;
use credal_core::geometry::{k_reduction_with, KlPairing, PointSet, ReduceOptions, EPS_FEAS};
use credal_core::inference::{credal_ve, infer, InferenceError, ReductionMode};
use credal_core::io::{
    parse_evidence, parse_network, read_benchmark_csv, serialize_hcredal, serialize_vcredal, write_benchmark_csv,
    BenchmarkRecord, HCredalNetwork, TaskKind,
};
use credal_core::{ConditionalCredalTable, CredalNetwork, CredalSet, Metric, Query, ReductionPolicy};

#[derive(Parser)]
#[command(name = "credal", version, about = "Exact and approximate inference on credal networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Exact,
    KReduce,
}

#[derive(Clone, Copy, ValueEnum)]
enum Pairing {
    FinalHull,
    SameEdge,
}

#[derive(Clone, Copy, ValueEnum)]
enum Repr {
    V,
    H,
}

#[derive(Subcommand)]
enum Command {
    /// Lower and upper probabilities of every state of a target variable.
    Infer {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        target: usize,
        /// Observation as `var=state`; repeatable.
        #[arg(long = "evidence", value_name = "VAR=STATE")]
        evidence: Vec<String>,
        #[arg(long, value_enum, default_value = "exact")]
        method: Method,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value = "euclidean")]
        metric: Metric,
        #[arg(long, value_enum, default_value = "final-hull")]
        kl_pairing: Pairing,
        /// Run on the full network instead of the requisite part.
        #[arg(long)]
        no_preprocess: bool,
        /// Also write the bounds as benchmark records.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Convert a network between vertex and constraint form.
    Convert {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        to: Repr,
    },
    /// Write a suite of random networks and a task manifest.
    Generate {
        #[arg(long, default_value_t = 10)]
        n_models: usize,
        #[arg(long, default_value_t = 6)]
        nodes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2)]
        min_card: usize,
        #[arg(long, default_value_t = 3)]
        max_card: usize,
        #[arg(long, default_value_t = 2)]
        max_indegree: usize,
        #[arg(long, default_value_t = 2)]
        min_vertices: usize,
        #[arg(long, default_value_t = 3)]
        max_vertices: usize,
        /// Skip networks whose requisite graphs allow more joint vertex selections.
        #[arg(long)]
        max_selections: Option<u128>,
    },
    /// Apply k-reduction to every credal set of a network.
    Reduce {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value = "euclidean")]
        metric: Metric,
        #[arg(long, value_enum, default_value = "final-hull")]
        kl_pairing: Pairing,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare methods against exact inference on a generated suite.
    Benchmark {
        #[arg(long)]
        suite: PathBuf,
        /// Comma-separated: `exact`, `kN` or `kN:sym-kl`.
        #[arg(long, default_value = "exact,k10,k5", value_delimiter = ',')]
        methods: Vec<String>,
        /// Results of other tools in the benchmark CSV schema.
        #[arg(long = "extern")]
        external: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Each timing is the fastest of this many runs.
        #[arg(long, default_value_t = 1)]
        repeats: usize,
    },
}

enum Failure {
    Usage(anyhow::Error),
    Data(anyhow::Error),
    Infeasible(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        let infeasible = e
            .chain()
            .any(|c| c.downcast_ref::<InferenceError>().is_some_and(InferenceError::is_zero_evidence));
        if infeasible {
            Failure::Infeasible(e)
        } else {
            Failure::Data(e)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Infeasible(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}

fn pairing(p: Pairing) -> KlPairing {
    match p {
        Pairing::FinalHull => KlPairing::FinalHull,
        Pairing::SameEdge => KlPairing::SameEdge,
    }
}

fn load(path: &Path) -> anyhow::Result<CredalNetwork> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file = parse_network(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(file.into_vnet()?)
}

fn write_out(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Infer {
            model,
            target,
            evidence,
            method,
            k,
            metric,
            kl_pairing,
            no_preprocess,
            csv,
        } => {
            let mut ev = std::collections::BTreeMap::new();
            for item in &evidence {
                let parsed = parse_evidence(item).map_err(|e| Failure::Usage(anyhow!(e)))?;
                ev.extend(parsed);
            }
            let policy = match method {
                Method::Exact => ReductionPolicy::exact(),
                Method::KReduce if k == 0 => return Err(Failure::Usage(anyhow!("--k must be at least 1"))),
                Method::KReduce => ReductionPolicy {
                    kl_pairing: pairing(kl_pairing),
                    ..ReductionPolicy::k_reduce(k, metric)
                },
            };
            let net = load(&model)?;
            let query = Query { target, evidence: ev };
            let result = if no_preprocess {
                credal_ve(&net, &query, &policy)
            } else {
                infer(&net, &query, &policy)
            }
            .map_err(anyhow::Error::from)?;
            for (s, b) in result.bounds.iter().enumerate() {
                println!("state {s}: [{:.6}, {:.6}]", b.lower, b.upper);
            }
            if result.dropped_tables > 0 {
                eprintln!("note: {} tables with zero evidence mass were skipped", result.dropped_tables);
            }
            if let Some(path) = csv {
                let model_id = model.file_stem().map_or("model".into(), |s| s.to_string_lossy().into_owned());
                let records: Vec<BenchmarkRecord> = result
                    .bounds
                    .iter()
                    .enumerate()
                    .map(|(state, b)| BenchmarkRecord {
                        model_id: model_id.clone(),
                        task: if query.is_marginal() {
                            TaskKind::Marginal
                        } else {
                            TaskKind::Conditional
                        },
                        target,
                        evidence: query.evidence.clone(),
                        method: policy.label(),
                        state,
                        lower: b.lower,
                        upper: b.upper,
                        time_ms: result.elapsed.as_secs_f64() * 1e3,
                    })
                    .collect();
                write_benchmark_csv(&path, &records).map_err(anyhow::Error::from)?;
            }
            Ok(())
        }
        Command::Convert { input, out, to } => {
            let net = load(&input)?;
            let text = match to {
                Repr::V => serialize_vcredal(&net),
                Repr::H => serialize_hcredal(&HCredalNetwork::from_vnet(&net, EPS_FEAS).map_err(anyhow::Error::from)?),
            };
            Ok(write_out(Some(&out), &text)?)
        }
        Command::Generate {
            n_models,
            nodes,
            seed,
            out,
            min_card,
            max_card,
            max_indegree,
            min_vertices,
            max_vertices,
            max_selections,
        } => {
            let params = GenParams {
                n_nodes: nodes,
                card_range: (min_card, max_card),
                max_indegree,
                vertex_range: (min_vertices, max_vertices),
                seed,
            };
            params.validate().map_err(|e| Failure::Usage(e.into()))?;
            let entries = generate_suite(&out, n_models, &params, max_selections).map_err(anyhow::Error::from)?;
            println!("wrote {n_models} networks and {} tasks to {}", entries.len(), out.display());
            Ok(())
        }
        Command::Reduce {
            input,
            k,
            metric,
            kl_pairing,
            out,
        } => {
            if k == 0 {
                return Err(Failure::Usage(anyhow!("--k must be at least 1")));
            }
            let net = load(&input)?;
            let opts = ReduceOptions {
                tol: EPS_FEAS,
                kl_pairing: pairing(kl_pairing),
            };
            let mut tables = Vec::with_capacity(net.len());
            for t in net.tables() {
                let sets = t
                    .sets
                    .iter()
                    .map(|s| {
                        let ps = PointSet::new(s.dimension(), s.vertices().to_vec())?;
                        let reduced = k_reduction_with(&ps, k, metric, opts)?;
                        Ok(CredalSet::new(s.dimension(), reduced.into_points())?)
                    })
                    .collect::<anyhow::Result<Vec<_>>>()?;
                tables.push(ConditionalCredalTable::new(t.child, t.parents.clone(), sets));
            }
            let reduced = CredalNetwork::new(net.cards(), tables).map_err(anyhow::Error::from)?;
            Ok(write_out(out.as_deref(), &serialize_vcredal(&reduced))?)
        }
        Command::Benchmark {
            suite,
            methods,
            external,
            out,
            repeats,
        } => {
            let mut policies = Vec::new();
            for m in &methods {
                let p = ReductionPolicy::from_label(m)
                    .ok_or_else(|| Failure::Usage(anyhow!("unknown method `{m}` (use exact, kN or kN:sym-kl)")))?;
                if matches!(p.mode, ReductionMode::KReduce(_)) {
                    policies.push(p);
                }
            }
            let mut extern_records = Vec::new();
            for path in &external {
                let recs = read_benchmark_csv(path).with_context(|| format!("reading {}", path.display()))?;
                extern_records.extend(recs);
            }
            let opts = BenchOptions {
                methods: policies,
                external: extern_records,
                out_csv: out,
                repeats,
            };
            let outcome = run_benchmark(&suite, &opts).map_err(anyhow::Error::from)?;
            print!("{}", outcome.summary);
            if outcome.records.is_empty() {
                bail_data("no query succeeded")?;
            }
            Ok(())
        }
    }
}

fn bail_data(msg: &str) -> anyhow::Result<()> {
    bail!("{msg}")
}

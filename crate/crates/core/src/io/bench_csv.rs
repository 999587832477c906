use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use super::{format_float, IoError};

pub const HEADER: [&str; 9] = [
    "model_id", "task", "target", "evidence", "method", "state", "lower", "upper", "time_ms",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TaskKind {
    Marginal,
    Conditional,
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TaskKind::Marginal => "marginal",
            TaskKind::Conditional => "conditional",
        })
    }
}

impl FromStr for TaskKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "marginal" => Ok(TaskKind::Marginal),
            "conditional" => Ok(TaskKind::Conditional),
            _ => Err(format!("unknown task `{s}`")),
        }
    }
}

/// One bound pair for one state of one query, as produced by one method.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRecord {
    pub model_id: String,
    pub task: TaskKind,
    pub target: usize,
    pub evidence: BTreeMap<usize, usize>,
    /// Free-form; names from other tools are kept verbatim.
    pub method: String,
    pub state: usize,
    pub lower: f64,
    pub upper: f64,
    pub time_ms: f64,
}

/// `var=state[;var=state]*`, empty for no evidence.
pub fn format_evidence(ev: &BTreeMap<usize, usize>) -> String {
    ev.iter().map(|(v, s)| format!("{v}={s}")).collect::<Vec<_>>().join(";")
}

pub fn parse_evidence(s: &str) -> Result<BTreeMap<usize, usize>, String> {
    let mut out = BTreeMap::new();
    for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (v, st) = part
            .split_once('=')
            .ok_or_else(|| format!("evidence item `{part}` is not var=state"))?;
        let v: usize = v.trim().parse().map_err(|_| format!("bad variable in `{part}`"))?;
        let st: usize = st.trim().parse().map_err(|_| format!("bad state in `{part}`"))?;
        if out.insert(v, st).is_some() {
            return Err(format!("variable {v} observed twice"));
        }
    }
    Ok(out)
}

pub fn read_benchmark_records<R: std::io::Read>(reader: R) -> Result<Vec<BenchmarkRecord>, IoError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = rdr.headers().map_err(|e| IoError::Csv {
        row: 1,
        message: e.to_string(),
    })?;
    if header.iter().map(str::trim).ne(HEADER.iter().copied()) {
        return Err(IoError::Csv {
            row: 1,
            message: format!("header must be `{}`", HEADER.join(",")),
        });
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let err = |message: String| IoError::Csv { row, message };
        let rec = rec.map_err(|e| err(e.to_string()))?;
        if rec.len() != HEADER.len() {
            return Err(err(format!("{} fields, expected {}", rec.len(), HEADER.len())));
        }
        let f = |k: usize| rec[k].trim();
        let int = |k: usize| f(k).parse::<usize>().map_err(|_| err(format!("bad {} `{}`", HEADER[k], f(k))));
        let real = |k: usize| {
            f(k).parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| err(format!("bad {} `{}`", HEADER[k], f(k))))
        };
        let r = BenchmarkRecord {
            model_id: f(0).to_string(),
            task: f(1).parse().map_err(err)?,
            target: int(2)?,
            evidence: parse_evidence(f(3)).map_err(err)?,
            method: f(4).to_string(),
            state: int(5)?,
            lower: real(6)?,
            upper: real(7)?,
            time_ms: real(8)?,
        };
        if r.lower > r.upper {
            return Err(err(format!("lower {} above upper {}", r.lower, r.upper)));
        }
        if r.time_ms < 0.0 {
            return Err(err(format!("negative time {}", r.time_ms)));
        }
        out.push(r);
    }
    Ok(out)
}

pub fn write_benchmark_records<W: std::io::Write>(writer: W, records: &[BenchmarkRecord]) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(writer);
    let csv_err = |e: csv::Error| IoError::Csv {
        row: 0,
        message: e.to_string(),
    };
    w.write_record(HEADER).map_err(csv_err)?;
    for r in records {
        w.write_record([
            r.model_id.clone(),
            r.task.to_string(),
            r.target.to_string(),
            format_evidence(&r.evidence),
            r.method.clone(),
            r.state.to_string(),
            format_float(r.lower),
            format_float(r.upper),
            format_float(r.time_ms),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_benchmark_csv(path: impl AsRef<Path>) -> Result<Vec<BenchmarkRecord>, IoError> {
    read_benchmark_records(std::fs::File::open(path)?)
}

pub fn write_benchmark_csv(path: impl AsRef<Path>, records: &[BenchmarkRecord]) -> Result<(), IoError> {
    write_benchmark_records(std::fs::File::create(path)?, records)
}

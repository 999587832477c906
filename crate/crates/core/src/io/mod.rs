//! Network files in vertex (`V-CREDAL`) and constraint (`H-CREDAL`) form,
//! and benchmark result CSV.
//!
//! Both network formats share a preamble:
//!
//! ```text
//! V-CREDAL            # or H-CREDAL
//! 2                   # variables
//! 2 3                 # cardinalities
//! 2                   # tables
//! 1 0                 # scope of each table: size, parents..., child
//! 2 0 1
//! ...                 # per table and parent configuration (last parent fastest):
//!                     #   V: vertex count, then one row of |child| floats per vertex
//!                     #   H: row count, then |child| coefficients and a bound per row
//! ```
//!
//! Tokens are separated by any whitespace and `#` comments run to the end of
//! the line.

mod bench_csv;
mod lexer;
mod network;

use thiserror::Error;

use crate::geometry::GeometryError;
use crate::model::ModelError;

pub use bench_csv::{
    format_evidence, parse_evidence, read_benchmark_csv, read_benchmark_records, write_benchmark_csv,
    write_benchmark_records, BenchmarkRecord, TaskKind, HEADER as CSV_HEADER,
};
pub use network::{
    parse_hcredal, parse_network, parse_vcredal, parse_vcredal_counted, serialize_hcredal, serialize_vcredal,
    HCredalNetwork, NetworkFile,
};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("line {line}, column {column}: expected {expected}, found {found}")]
    Parse {
        line: usize,
        column: usize,
        expected: String,
        found: String,
    },
    #[error("line {line}: {message}")]
    Shape { line: usize, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("CSV row {row}: {message}")]
    Csv { row: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl IoError {
    /// Line of the offending input, when known.
    pub fn line(&self) -> Option<usize> {
        match self {
            IoError::Parse { line, .. } | IoError::Shape { line, .. } => Some(*line),
            IoError::Csv { row, .. } => Some(*row),
            _ => None,
        }
    }
}

/// `%.17g`: 17 significant digits, trailing zeros dropped, exponent form
/// outside `[1e-5, 1e17)`.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if (-5..17).contains(&exp) {
        let s = format!("{:.*}", (16 - exp) as usize, x);
        trim_zeros(&s).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::format_float;

    #[test]
    fn seventeen_digits() {
        assert_eq!(format_float(0.1), "0.10000000000000001");
        assert_eq!(format_float(0.5), "0.5");
        assert_eq!(format_float(1.0), "1");
        assert_eq!(format_float(0.0), "0");
        assert_eq!(format_float(1e-7), "9.9999999999999995e-08");
        assert_eq!(format_float(123.25), "123.25");
        assert_eq!(format_float(2.5e20), "2.5e+20");
    }

    #[test]
    fn round_trips() {
        for x in [0.1, 1.0 / 3.0, 2.0 / 3.0, 1e-300, 0.7000000000000001, 12345.678901234567] {
            assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
        }
    }
}

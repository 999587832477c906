//! Credal variable elimination and a brute-force reference.

mod factor;
mod oracle;
mod order;
mod ve;

use thiserror::Error;

use crate::geometry::{GeometryError, KlPairing, Metric, EPS_FEAS};
use crate::model::ModelError;

pub use factor::{combine, factor_from_table, marginalize_out, reduce_factor, restrict_evidence, table_value, CredalFactor};
pub use oracle::{brute_force_oracle, DEFAULT_ORACLE_CAP};
pub use order::{elimination_order, moral_graph};
pub use ve::{credal_ve, credal_ve_traced, infer, VeStep, VeTrace};

/// Final tables whose evidence mass is at most this are skipped.
pub const EPS_ZERO: f64 = 1e-12;

/// Marginal tables must sum to one within this.
pub const EPS_MARGINAL: f64 = 1e-6;

/// Upper limit on the number of tables in any intermediate factor.
pub const MAX_TABLES: usize = 1 << 21;

#[derive(Debug, Error)]
pub enum InferenceError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("malformed factor: {0}")]
    Shape(String),
    #[error("variable {0} is not in the factor's scope")]
    NotInScope(usize),
    #[error("variable {var} has cardinality {left} in one factor and {right} in the other")]
    CardinalityMismatch { var: usize, left: usize, right: usize },
    #[error("state {state} out of range for variable {var} with {card} states")]
    StateOutOfRange { var: usize, state: usize, card: usize },
    #[error("evidence has zero probability under every extreme distribution ({dropped} tables dropped)")]
    ZeroEvidence { dropped: usize },
    #[error("{count} vertex selections exceed the enumeration cap of {cap}")]
    CapExceeded { count: u128, cap: u128 },
    #[error("factor would hold {0} tables")]
    TooLarge(u128),
    #[error("marginal table sums to {sum}")]
    Normalization { sum: f64 },
    #[error("k must be at least 1")]
    InvalidPolicy,
}

impl InferenceError {
    pub fn is_zero_evidence(&self) -> bool {
        matches!(self, InferenceError::ZeroEvidence { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReductionMode {
    /// Keep exactly the extreme points after each combination.
    ExactHull,
    /// Reduce each combination to at most `k` points.
    KReduce(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReductionPolicy {
    pub mode: ReductionMode,
    pub metric: Metric,
    pub kl_pairing: KlPairing,
    pub tol: f64,
}

impl Default for ReductionPolicy {
    fn default() -> Self {
        ReductionPolicy::exact()
    }
}

impl ReductionPolicy {
    pub fn exact() -> Self {
        ReductionPolicy {
            mode: ReductionMode::ExactHull,
            metric: Metric::Euclidean,
            kl_pairing: KlPairing::default(),
            tol: EPS_FEAS,
        }
    }

    pub fn k_reduce(k: usize, metric: Metric) -> Self {
        ReductionPolicy {
            mode: ReductionMode::KReduce(k),
            metric,
            ..ReductionPolicy::exact()
        }
    }

    pub fn k(&self) -> Option<usize> {
        match self.mode {
            ReductionMode::ExactHull => None,
            ReductionMode::KReduce(k) => Some(k),
        }
    }

    /// `exact`, `k5` or `k5:sym-kl`.
    pub fn label(&self) -> String {
        match (self.mode, self.metric) {
            (ReductionMode::ExactHull, _) => "exact".into(),
            (ReductionMode::KReduce(k), Metric::Euclidean) => format!("k{k}"),
            (ReductionMode::KReduce(k), m) => format!("k{k}:{m}"),
        }
    }

    /// Inverse of [`label`](Self::label).
    pub fn from_label(s: &str) -> Option<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("exact") {
            return Some(ReductionPolicy::exact());
        }
        let rest = s.strip_prefix('k').or_else(|| s.strip_prefix('K'))?;
        let (num, metric) = match rest.split_once(':') {
            Some((n, m)) => (n, m.parse().ok()?),
            None => (rest, Metric::Euclidean),
        };
        let k: usize = num.parse().ok()?;
        (k >= 1).then(|| ReductionPolicy::k_reduce(k, metric))
    }
}

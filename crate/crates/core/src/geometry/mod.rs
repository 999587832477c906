//! Convex-set machinery for credal sets: extreme-point pruning, k-reduction,
//! rank-repairing embeddings and V/H conversion.

mod embed;
mod hrep;
mod hull;
pub(crate) mod lp;
pub(crate) mod reduce;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use embed::{full_rank_embedding, Embedding};
pub use hrep::{h_to_v, v_to_h, HPolytope, HRow};
pub use hull::{
    are_adjacent, certify_vertex, extreme_indices, in_convex_hull, remove_redundant_vertices,
};
pub use reduce::{
    distance, k_reduction, k_reduction_traced, k_reduction_with, pairwise_min_distance,
    KlPairing, MergeStep, ReduceOptions, ReductionTrace,
};

/// Tolerance for every LP feasibility decision.
pub const EPS_FEAS: f64 = 1e-9;
/// Residual norm below which Gram-Schmidt treats a direction as null.
pub const EPS_RANK: f64 = 1e-9;
/// Smoothing added to every coordinate before the log ratio in `sym-kl`.
pub const EPS_KL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("empty point set")]
    Empty,
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite coordinate in point {0}")]
    NonFinite(usize),
    #[error("k must be at least 1")]
    InvalidK,
    #[error("constraint system is infeasible (empty credal set)")]
    Infeasible,
    #[error("constraint system is infeasible at tolerance {tol:e} but feasible at {relaxed:e}")]
    NumericalFailure { tol: f64, relaxed: f64 },
    #[error("vertex certification failed for point {0}")]
    Certification(usize),
    #[error("linear program did not converge")]
    Stalled,
}

/// A finite list of points sharing one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dimension: usize,
    points: Vec<Vec<f64>>,
}

impl PointSet {
    pub fn new(dimension: usize, points: Vec<Vec<f64>>) -> Result<Self, GeometryError> {
        for (i, p) in points.iter().enumerate() {
            if p.len() != dimension {
                return Err(GeometryError::DimensionMismatch {
                    expected: dimension,
                    got: p.len(),
                });
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(GeometryError::NonFinite(i));
            }
        }
        Ok(PointSet { dimension, points })
    }

    /// Dimension taken from the first point.
    pub fn from_points(points: Vec<Vec<f64>>) -> Result<Self, GeometryError> {
        let dimension = points.first().ok_or(GeometryError::Empty)?.len();
        Self::new(dimension, points)
    }

    pub(crate) fn from_parts(dimension: usize, points: Vec<Vec<f64>>) -> Self {
        PointSet { dimension, points }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn into_points(self) -> Vec<Vec<f64>> {
        self.points
    }

    /// Set equality up to permutation, matching points within `tol` in max-norm.
    pub fn same_set(&self, other: &PointSet, tol: f64) -> bool {
        if self.dimension != other.dimension || self.len() != other.len() {
            return false;
        }
        let mut used = vec![false; other.len()];
        'outer: for p in &self.points {
            for (j, q) in other.points.iter().enumerate() {
                if !used[j] && crate::model::max_norm(p, q) <= tol {
                    used[j] = true;
                    continue 'outer;
                }
            }
            return false;
        }
        true
    }
}

/// `{x : normal·x = offset}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperplane {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Hyperplane {
    pub fn new(normal: Vec<f64>, offset: f64) -> Option<Self> {
        normal
            .iter()
            .any(|x| *x != 0.0)
            .then_some(Hyperplane { normal, offset })
    }

    /// Signed value `normal·x - offset`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        dot(&self.normal, x) - self.offset
    }

    /// True if every point satisfies `normal·x <= offset + tol`.
    pub fn supports(&self, points: &[Vec<f64>], tol: f64) -> bool {
        points.iter().all(|p| self.eval(p) <= tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Metric {
    #[default]
    Euclidean,
    /// Jeffreys divergence `KL(p||q) + KL(q||p)` with smoothed logs.
    SymKl,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Euclidean => "euclidean",
            Metric::SymKl => "sym-kl",
        })
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "euclidean" | "l2" => Ok(Metric::Euclidean),
            "sym-kl" | "kl" | "symkl" | "jeffreys" => Ok(Metric::SymKl),
            other => Err(format!("unknown metric `{other}` (expected euclidean or sym-kl)")),
        }
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}

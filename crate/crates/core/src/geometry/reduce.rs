use std::cmp::Ordering;

use super::hull::{are_adjacent, extreme_indices};
use super::{lex_cmp, GeometryError, Metric, PointSet, EPS_FEAS, EPS_KL};

/// Distance between two vectors of equal length.
///
/// `SymKl` is `Σ (p_i - q_i)(ln(p_i + ε) - ln(q_i + ε))`, which equals
/// `KL(p||q) + KL(q||p)` with smoothed logs for probability vectors and stays
/// non-negative and symmetric for any non-negative vectors.
pub fn distance(metric: Metric, p: &[f64], q: &[f64]) -> Result<f64, GeometryError> {
    if p.len() != q.len() {
        return Err(GeometryError::DimensionMismatch {
            expected: p.len(),
            got: q.len(),
        });
    }
    Ok(raw_distance(metric, p, q))
}

fn raw_distance(metric: Metric, p: &[f64], q: &[f64]) -> f64 {
    match metric {
        Metric::Euclidean => p
            .iter()
            .zip(q)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt(),
        Metric::SymKl => p
            .iter()
            .zip(q)
            .map(|(&a, &b)| {
                let (a, b) = (a.max(0.0), b.max(0.0));
                (a - b) * ((a + EPS_KL).ln() - (b + EPS_KL).ln())
            })
            .sum::<f64>()
            .max(0.0),
    }
}

/// Orders candidate pairs: distance first, then position of the pair in the
/// lexicographically sorted point list. Pairs are given with `a <lex b`.
fn pair_cmp(points: &[Vec<f64>], x: (f64, usize, usize), y: (f64, usize, usize)) -> Ordering {
    x.0.total_cmp(&y.0)
        .then_with(|| lex_cmp(&points[x.1], &points[y.1]))
        .then_with(|| lex_cmp(&points[x.2], &points[y.2]))
        .then_with(|| (x.1, x.2).cmp(&(y.1, y.2)))
}

fn ordered(points: &[Vec<f64>], i: usize, j: usize) -> (usize, usize) {
    match lex_cmp(&points[i], &points[j]) {
        Ordering::Greater => (j, i),
        Ordering::Equal if j < i => (j, i),
        _ => (i, j),
    }
}

/// The closest pair of points, as `(i, j)` with `i < j`.
///
/// Ties are broken on the lexicographically sorted point list, so the chosen
/// pair does not depend on the input order.
pub fn pairwise_min_distance(ps: &PointSet, metric: Metric) -> Result<(usize, usize), GeometryError> {
    let pts = ps.points();
    if pts.len() < 2 {
        return Err(GeometryError::TooFewPoints {
            needed: 2,
            got: pts.len(),
        });
    }
    let mut best: Option<(f64, usize, usize)> = None;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let (a, b) = ordered(pts, i, j);
            let cand = (raw_distance(metric, &pts[a], &pts[b]), a, b);
            if best.is_none_or(|bst| pair_cmp(pts, cand, bst) == Ordering::Less) {
                best = Some(cand);
            }
        }
    }
    let (_, a, b) = best.expect("at least one pair");
    Ok((a.min(b), a.max(b)))
}

/// How closest pairs are chosen under the `sym-kl` metric, where a merged
/// midpoint is not guaranteed to be a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KlPairing {
    /// Merge the closest pair, then prune the result with one hull pass.
    #[default]
    FinalHull,
    /// Only merge pairs spanning an edge of the current set (no final pass).
    SameEdge,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReduceOptions {
    pub tol: f64,
    pub kl_pairing: KlPairing,
}

impl Default for ReduceOptions {
    fn default() -> Self {
        ReduceOptions {
            tol: EPS_FEAS,
            kl_pairing: KlPairing::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MergeStep {
    pub first: Vec<f64>,
    pub second: Vec<f64>,
    pub midpoint: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionTrace {
    /// Extreme points of the input.
    pub hull: PointSet,
    pub steps: Vec<MergeStep>,
    pub output: PointSet,
}

/// Replaces the extreme points of `ps` by at most `k` points, repeatedly
/// merging the closest pair into its midpoint.
pub fn k_reduction(ps: &PointSet, k: usize, metric: Metric) -> Result<PointSet, GeometryError> {
    k_reduction_with(ps, k, metric, ReduceOptions::default())
}

pub fn k_reduction_with(
    ps: &PointSet,
    k: usize,
    metric: Metric,
    opts: ReduceOptions,
) -> Result<PointSet, GeometryError> {
    Ok(run(ps.points(), ps.dimension(), k, metric, opts, false)?.output)
}

/// Same as [`k_reduction_with`] but records every merge.
pub fn k_reduction_traced(
    ps: &PointSet,
    k: usize,
    metric: Metric,
    opts: ReduceOptions,
) -> Result<ReductionTrace, GeometryError> {
    run(ps.points(), ps.dimension(), k, metric, opts, true)
}

/// Slice-level entry used by inference, which owns its tables.
pub(crate) fn reduce_points(
    points: &[Vec<f64>],
    k: usize,
    metric: Metric,
    opts: ReduceOptions,
) -> Result<Vec<Vec<f64>>, GeometryError> {
    let dim = points.first().map_or(0, |p| p.len());
    Ok(run(points, dim, k, metric, opts, false)?.output.into_points())
}

/// As [`reduce_points`] for points already known to be distinct extreme
/// points, which skips the hull pass.
pub(crate) fn reduce_extreme_points(
    points: Vec<Vec<f64>>,
    k: usize,
    metric: Metric,
    opts: ReduceOptions,
) -> Result<Vec<Vec<f64>>, GeometryError> {
    if k < 1 {
        return Err(GeometryError::InvalidK);
    }
    if points.is_empty() {
        return Err(GeometryError::Empty);
    }
    let dim = points[0].len();
    Ok(merge_phase(points, dim, k, metric, opts, None)?.into_points())
}

fn run(
    input: &[Vec<f64>],
    dimension: usize,
    k: usize,
    metric: Metric,
    opts: ReduceOptions,
    trace: bool,
) -> Result<ReductionTrace, GeometryError> {
    if k < 1 {
        return Err(GeometryError::InvalidK);
    }
    if input.is_empty() {
        return Err(GeometryError::Empty);
    }
    let hull: Vec<Vec<f64>> = extreme_indices(input, opts.tol)
        .into_iter()
        .map(|i| input[i].clone())
        .collect();
    let mut steps = Vec::new();
    let output = merge_phase(hull.clone(), dimension, k, metric, opts, trace.then_some(&mut steps))?;
    Ok(ReductionTrace {
        hull: PointSet::from_parts(dimension, hull),
        steps,
        output,
    })
}

fn merge_phase(
    mut points: Vec<Vec<f64>>,
    dimension: usize,
    k: usize,
    metric: Metric,
    opts: ReduceOptions,
    mut steps: Option<&mut Vec<MergeStep>>,
) -> Result<PointSet, GeometryError> {
    if points.len() <= k {
        return Ok(PointSet::from_parts(dimension, points));
    }
    let edge_only = metric == Metric::SymKl && opts.kl_pairing == KlPairing::SameEdge;
    let mut alive = vec![true; points.len()];
    // best partner of each row among alive points with a smaller index
    let row_best = |points: &[Vec<f64>], alive: &[bool], i: usize| -> Option<(f64, usize, usize)> {
        let mut best: Option<(f64, usize, usize)> = None;
        for j in (0..i).filter(|&j| alive[j]) {
            let (a, b) = ordered(points, i, j);
            let cand = (raw_distance(metric, &points[i], &points[j]), a, b);
            if best.is_none_or(|bst| pair_cmp(points, cand, bst) == Ordering::Less) {
                best = Some(cand);
            }
        }
        best
    };
    let mut best: Vec<Option<(f64, usize, usize)>> = if edge_only {
        Vec::new()
    } else {
        (0..points.len()).map(|i| row_best(&points, &alive, i)).collect()
    };
    let mut count = points.len();

    while count > k {
        let chosen = if edge_only {
            edge_pair(&points, &alive, dimension, metric, opts.tol)?
        } else {
            (0..points.len())
                .filter(|&i| alive[i])
                .filter_map(|i| best[i])
                .min_by(|x, y| pair_cmp(&points, *x, *y))
        };
        let (_, a, b) = chosen.expect("more than k >= 1 points leaves a pair");
        let midpoint: Vec<f64> = points[a]
            .iter()
            .zip(&points[b])
            .map(|(x, y)| 0.5 * (x + y))
            .collect();
        if let Some(steps) = steps.as_deref_mut() {
            steps.push(MergeStep {
                first: points[a].clone(),
                second: points[b].clone(),
                midpoint: midpoint.clone(),
            });
        }
        alive[a] = false;
        alive[b] = false;
        points.push(midpoint);
        alive.push(true);
        count -= 1;
        if !edge_only {
            best[a] = None;
            best[b] = None;
            let m = points.len() - 1;
            best.push(row_best(&points, &alive, m));
            for i in 0..m {
                if alive[i] && best[i].is_some_and(|(_, x, y)| x == a || x == b || y == a || y == b) {
                    best[i] = row_best(&points, &alive, i);
                }
            }
        }
    }

    let mut output: Vec<Vec<f64>> = points
        .into_iter()
        .zip(alive)
        .filter_map(|(p, a)| a.then_some(p))
        .collect();
    if metric == Metric::SymKl && opts.kl_pairing == KlPairing::FinalHull {
        let keep = extreme_indices(&output, opts.tol);
        output = keep.into_iter().map(|i| output[i].clone()).collect();
    }
    Ok(PointSet::from_parts(dimension, output))
}

/// The closest alive pair spanning an edge of the current set.
fn edge_pair(
    points: &[Vec<f64>],
    alive: &[bool],
    dimension: usize,
    metric: Metric,
    tol: f64,
) -> Result<Option<(f64, usize, usize)>, GeometryError> {
    let alive_idx: Vec<usize> = (0..points.len()).filter(|&i| alive[i]).collect();
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (pos, &i) in alive_idx.iter().enumerate() {
        for &j in &alive_idx[..pos] {
            let (a, b) = ordered(points, i, j);
            candidates.push((raw_distance(metric, &points[a], &points[b]), a, b));
        }
    }
    candidates.sort_by(|x, y| pair_cmp(points, *x, *y));
    let current = PointSet::from_parts(dimension, alive_idx.iter().map(|&i| points[i].clone()).collect());
    let local = |g: usize| alive_idx.iter().position(|&i| i == g).unwrap();
    for cand in &candidates {
        if are_adjacent(&current, local(cand.1), local(cand.2), tol)? {
            return Ok(Some(*cand));
        }
    }
    // numerically flat sets may report no edge at all
    Ok(candidates.first().copied())
}

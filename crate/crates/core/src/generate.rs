//! Random credal networks and query selection.

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use thiserror::Error;

use crate::geometry::{extreme_indices, EPS_FEAS};
use crate::model::{ConditionalCredalTable, CredalNetwork, CredalSet, ModelError, Query};
use crate::preprocess::requisite_graph;

pub const DEFAULT_RETRY_CAP: usize = 1000;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
    #[error("the simplex needs at least 2 coordinates, got {0}")]
    Dimension(usize),
    #[error("no set with {vertices} vertices in dimension {dimension} after {attempts} attempts")]
    RetryCap {
        dimension: usize,
        vertices: usize,
        attempts: usize,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenParams {
    pub n_nodes: usize,
    /// Inclusive range of cardinalities.
    pub card_range: (usize, usize),
    pub max_indegree: usize,
    /// Inclusive range of vertex counts, drawn per credal set.
    pub vertex_range: (usize, usize),
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            n_nodes: 10,
            card_range: (2, 3),
            max_indegree: 6,
            vertex_range: (2, 6),
            seed: 0,
        }
    }
}

impl GenParams {
    pub fn validate(&self) -> Result<(), GenError> {
        let bad = |m: String| Err(GenError::InvalidParams(m));
        if !(1..=10).contains(&self.n_nodes) {
            return bad(format!("n_nodes = {} outside 1..=10", self.n_nodes));
        }
        let (c0, c1) = self.card_range;
        if c0 < 2 || c1 > 3 || c0 > c1 {
            return bad(format!("card_range {c0}..={c1} outside 2..=3"));
        }
        if self.max_indegree > 6 {
            return bad(format!("max_indegree = {} above 6", self.max_indegree));
        }
        let (v0, v1) = self.vertex_range;
        if v0 < 1 || v1 > 6 || v0 > v1 {
            return bad(format!("vertex_range {v0}..={v1} outside 1..=6"));
        }
        Ok(())
    }
}

/// A uniform draw from the probability simplex with `d` coordinates:
/// independent unit exponentials divided by their sum.
pub fn sample_simplex<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<Vec<f64>, GenError> {
    if d < 2 {
        return Err(GenError::Dimension(d));
    }
    loop {
        let mut x: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let s: f64 = x.iter().sum();
        if s > 0.0 {
            x.iter_mut().for_each(|xi| *xi /= s);
            return Ok(x);
        }
    }
}

/// Draws `v` simplex points until all of them are extreme, up to `retry_cap`
/// attempts.
pub fn sample_credal_set<R: Rng + ?Sized>(
    d: usize,
    v: usize,
    rng: &mut R,
    retry_cap: usize,
) -> Result<CredalSet, GenError> {
    if d < 2 {
        return Err(GenError::Dimension(d));
    }
    if v == 0 {
        return Err(GenError::InvalidParams("a credal set needs at least one vertex".into()));
    }
    for _ in 0..retry_cap {
        let points: Vec<Vec<f64>> = (0..v).map(|_| sample_simplex(d, rng)).collect::<Result<_, _>>()?;
        if extreme_indices(&points, EPS_FEAS).len() == v {
            return Ok(CredalSet::new(d, points)?);
        }
    }
    Err(GenError::RetryCap {
        dimension: d,
        vertices: v,
        attempts: retry_cap,
    })
}

/// A random network: random topological order, uniform indegree, parents
/// drawn uniformly among the predecessors. Binary variables get at most two
/// vertices per set since a segment has only two extreme points.
pub fn random_network(p: &GenParams) -> Result<CredalNetwork, GenError> {
    p.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let n = p.n_nodes;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let cards: Vec<usize> = (0..n)
        .map(|_| rng.random_range(p.card_range.0..=p.card_range.1))
        .collect();
    let mut parents = vec![Vec::new(); n];
    for (i, &v) in order.iter().enumerate() {
        let m = rng.random_range(0..=p.max_indegree.min(i));
        let mut ps: Vec<usize> = index::sample(&mut rng, i, m).into_iter().map(|j| order[j]).collect();
        ps.sort_unstable();
        parents[v] = ps;
    }
    let mut tables = Vec::with_capacity(n);
    for v in 0..n {
        let configs: usize = parents[v].iter().map(|&q| cards[q]).product();
        let d = cards[v];
        let vmax = if d == 2 { p.vertex_range.1.min(2) } else { p.vertex_range.1 };
        let vmin = p.vertex_range.0.min(vmax);
        let sets = (0..configs)
            .map(|_| {
                let k = rng.random_range(vmin..=vmax);
                sample_credal_set(d, k, &mut rng, DEFAULT_RETRY_CAP)
            })
            .collect::<Result<Vec<_>, _>>()?;
        tables.push(ConditionalCredalTable::new(v, parents[v].clone(), sets));
    }
    Ok(CredalNetwork::new(cards, tables)?)
}

/// Number of variables left after requisite pruning for `q`.
pub fn requisite_size(net: &CredalNetwork, q: &Query) -> usize {
    requisite_graph(net, q).map_or(0, |r| r.reduced.len())
}

/// The marginal query with the largest requisite graph and, when the network
/// has a root and a distinct leaf, the root-target/leaf-evidence query with
/// the largest requisite graph. Ties go to the smallest ids.
pub fn select_tasks(net: &CredalNetwork) -> (Query, Option<Query>) {
    let marginal = (0..net.len())
        .map(|t| (requisite_size(net, &Query::marginal(t)), std::cmp::Reverse(t)))
        .max()
        .map(|(_, std::cmp::Reverse(t))| Query::marginal(t))
        .unwrap_or_default();
    let children = net.dag().children();
    let roots: Vec<usize> = (0..net.len()).filter(|&v| net.parents(v).is_empty()).collect();
    let leaves: Vec<usize> = (0..net.len()).filter(|&v| children[v].is_empty()).collect();
    let mut best: Option<(usize, Query)> = None;
    for &r in &roots {
        for &l in leaves.iter().filter(|&&l| l != r) {
            let q = Query::conditional(r, [(l, 0)]);
            let size = requisite_size(net, &q);
            if best.as_ref().is_none_or(|(s, _)| size > *s) {
                best = Some((size, q));
            }
        }
    }
    (marginal, best.map(|(_, q)| q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{certify_vertex, PointSet};
    use crate::model::validate_network;

    #[test]
    fn simplex_points_are_normalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for d in 2..6 {
            let x = sample_simplex(d, &mut rng).unwrap();
            assert_eq!(x.len(), d);
            assert!((x.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(x.iter().all(|&xi| xi >= 0.0));
        }
        assert!(matches!(sample_simplex(1, &mut rng), Err(GenError::Dimension(1))));
    }

    #[test]
    fn binary_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = sample_credal_set(2, 2, &mut rng, DEFAULT_RETRY_CAP).unwrap();
        assert_eq!(s.len(), 2);
        assert!(matches!(
            sample_credal_set(2, 3, &mut rng, DEFAULT_RETRY_CAP),
            Err(GenError::RetryCap { vertices: 3, .. })
        ));
    }

    #[test]
    fn ternary_four_vertices_are_certified() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = sample_credal_set(3, 4, &mut rng, DEFAULT_RETRY_CAP).unwrap();
        assert_eq!(s.len(), 4);
        let ps = PointSet::new(3, s.vertices().to_vec()).unwrap();
        for v in s.vertices() {
            assert!(certify_vertex(v, &ps).unwrap());
        }
    }

    #[test]
    fn single_node_network() {
        let p = GenParams {
            n_nodes: 1,
            ..GenParams::default()
        };
        let net = random_network(&p).unwrap();
        assert_eq!(net.len(), 1);
        assert_eq!(net.table(0).sets.len(), 1);
        let (m, c) = select_tasks(&net);
        assert_eq!(m, Query::marginal(0));
        assert!(c.is_none());
    }

    #[test]
    fn generation_is_deterministic_and_valid() {
        for seed in 0..20 {
            let p = GenParams {
                n_nodes: 6,
                max_indegree: 3,
                seed,
                ..GenParams::default()
            };
            let a = random_network(&p).unwrap();
            assert_eq!(a, random_network(&p).unwrap());
            assert!(validate_network(&a).is_empty());
            for v in 0..a.len() {
                assert!(a.parents(v).len() <= 3);
            }
        }
    }

    #[test]
    fn params_are_checked() {
        let mut p = GenParams {
            n_nodes: 11,
            ..GenParams::default()
        };
        assert!(p.validate().is_err());
        p = GenParams {
            card_range: (3, 2),
            ..GenParams::default()
        };
        assert!(random_network(&p).is_err());
    }

    #[test]
    fn chain_tasks() {
        let s = |x: f64| CredalSet::precise(vec![x, 1.0 - x]).unwrap();
        let net = CredalNetwork::new(
            vec![2, 2, 2],
            vec![
                ConditionalCredalTable::new(0, vec![], vec![s(0.3)]),
                ConditionalCredalTable::new(1, vec![0], vec![s(0.2), s(0.6)]),
                ConditionalCredalTable::new(2, vec![1], vec![s(0.1), s(0.9)]),
            ],
        )
        .unwrap();
        let (m, c) = select_tasks(&net);
        assert_eq!(m, Query::marginal(2));
        assert_eq!(c, Some(Query::conditional(0, [(2, 0)])));
        assert_eq!(requisite_size(&net, &c.unwrap()), 3);
    }
}

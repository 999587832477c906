use super::{InferenceError, ReductionMode, ReductionPolicy, MAX_TABLES};
use crate::geometry::reduce::{reduce_extreme_points, reduce_points};
use crate::geometry::{extreme_indices, ReduceOptions, EPS_FEAS};
use crate::model::{config_index, ConditionalCredalTable};

/// A finite set of non-negative tables over a joint scope. Each table is one
/// generator of the factor's convex set; tables are row-major over `scope`
/// with the last variable varying fastest.
#[derive(Debug, Clone)]
pub struct CredalFactor {
    scope: Vec<usize>,
    cards: Vec<usize>,
    tables: Vec<Vec<f64>>,
    /// Every table is known to be an extreme point of their hull.
    extreme: bool,
}

impl PartialEq for CredalFactor {
    fn eq(&self, other: &Self) -> bool {
        self.scope == other.scope && self.cards == other.cards && self.tables == other.tables
    }
}

impl CredalFactor {
    pub fn new(scope: Vec<usize>, cards: Vec<usize>, tables: Vec<Vec<f64>>) -> Result<Self, InferenceError> {
        if scope.len() != cards.len() {
            return Err(InferenceError::Shape(format!(
                "scope has {} variables but {} cardinalities",
                scope.len(),
                cards.len()
            )));
        }
        if tables.is_empty() {
            return Err(InferenceError::Shape("factor without tables".into()));
        }
        let size: usize = cards.iter().product();
        if let Some(t) = tables.iter().find(|t| t.len() != size) {
            return Err(InferenceError::Shape(format!(
                "table of length {} over a domain of size {size}",
                t.len()
            )));
        }
        if tables.iter().flatten().any(|x| !x.is_finite() || *x < -crate::model::EPS_NORM) {
            return Err(InferenceError::Shape("negative or non-finite entry".into()));
        }
        Ok(CredalFactor {
            scope,
            cards,
            tables,
            extreme: false,
        })
    }

    /// The neutral element for [`combine`]: empty scope, one table `[1]`.
    pub fn unit() -> Self {
        CredalFactor {
            scope: Vec::new(),
            cards: Vec::new(),
            tables: vec![vec![1.0]],
            extreme: true,
        }
    }

    pub fn scope(&self) -> &[usize] {
        &self.scope
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn tables(&self) -> &[Vec<f64>] {
        &self.tables
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }

    pub fn domain_size(&self) -> usize {
        self.cards.iter().product()
    }

    pub fn contains(&self, var: usize) -> bool {
        self.scope.contains(&var)
    }

    fn position(&self, var: usize) -> Result<usize, InferenceError> {
        self.scope
            .iter()
            .position(|&v| v == var)
            .ok_or(InferenceError::NotInScope(var))
    }
}

/// One table per joint choice of a vertex in every parent configuration;
/// the scope is the parents followed by the child.
pub fn factor_from_table(t: &ConditionalCredalTable, cards: &[usize]) -> Result<CredalFactor, InferenceError> {
    let child_card = cards[t.child];
    // vertex tuples of a product of polytopes are exactly its vertices
    let vertex_lists: Vec<Vec<&Vec<f64>>> = t
        .sets
        .iter()
        .map(|s| {
            let vs = s.vertices();
            let mut keep = extreme_indices(vs, EPS_FEAS);
            keep.sort_unstable();
            keep.into_iter().map(|i| &vs[i]).collect()
        })
        .collect();
    let radices: Vec<usize> = vertex_lists.iter().map(|l| l.len()).collect();
    let count = radices
        .iter()
        .try_fold(1usize, |acc, &r| acc.checked_mul(r))
        .filter(|&c| c <= MAX_TABLES)
        .ok_or(InferenceError::TooLarge(
            radices.iter().fold(1u128, |a, &r| a.saturating_mul(r as u128)),
        ))?;
    let mut scope = t.parents.clone();
    scope.push(t.child);
    let fcards: Vec<usize> = scope.iter().map(|&v| cards[v]).collect();
    let size = t.sets.len() * child_card;
    let mut tables = Vec::with_capacity(count);
    let mut choice = vec![0usize; radices.len()];
    for _ in 0..count {
        let mut table = vec![0.0; size];
        for (cfg, (&c, list)) in choice.iter().zip(&vertex_lists).enumerate() {
            table[cfg * child_card..(cfg + 1) * child_card].copy_from_slice(list[c]);
        }
        tables.push(table);
        for pos in (0..choice.len()).rev() {
            choice[pos] += 1;
            if choice[pos] < radices[pos] {
                break;
            }
            choice[pos] = 0;
        }
    }
    Ok(CredalFactor {
        scope,
        cards: fcards,
        tables,
        extreme: true,
    })
}

/// Index of each joint configuration of `scope` inside a factor over `sub`.
fn projection_map(scope: &[usize], cards: &[usize], sub: &[usize]) -> Vec<usize> {
    let size: usize = cards.iter().product();
    // stride of each scope variable inside `sub` (0 when absent)
    let strides: Vec<usize> = scope
        .iter()
        .map(|v| {
            sub.iter().position(|s| s == v).map_or(0, |p| {
                sub[p + 1..]
                    .iter()
                    .map(|w| cards[scope.iter().position(|x| x == w).unwrap()])
                    .product()
            })
        })
        .collect();
    let mut out = Vec::with_capacity(size);
    let mut states = vec![0usize; scope.len()];
    let mut idx = 0usize;
    for _ in 0..size {
        out.push(idx);
        for pos in (0..scope.len()).rev() {
            states[pos] += 1;
            idx += strides[pos];
            if states[pos] < cards[pos] {
                break;
            }
            idx -= strides[pos] * cards[pos];
            states[pos] = 0;
        }
    }
    out
}

/// Pointwise products of every pair of tables, followed by the reduction the
/// policy asks for.
pub fn combine(f: &CredalFactor, g: &CredalFactor, policy: &ReductionPolicy) -> Result<CredalFactor, InferenceError> {
    let product = combine_raw(f, g)?;
    reduce_factor(product, policy)
}

pub(crate) fn combine_raw(f: &CredalFactor, g: &CredalFactor) -> Result<CredalFactor, InferenceError> {
    let mut scope = f.scope.clone();
    let mut cards = f.cards.clone();
    for (&v, &c) in g.scope.iter().zip(&g.cards) {
        match f.scope.iter().position(|&w| w == v) {
            Some(p) if f.cards[p] != c => {
                return Err(InferenceError::CardinalityMismatch {
                    var: v,
                    left: f.cards[p],
                    right: c,
                })
            }
            Some(_) => {}
            None => {
                scope.push(v);
                cards.push(c);
            }
        }
    }
    let count = f.len() * g.len();
    if count > MAX_TABLES {
        return Err(InferenceError::TooLarge(count as u128));
    }
    let fmap = projection_map(&scope, &cards, &f.scope);
    let gmap = projection_map(&scope, &cards, &g.scope);
    let mut tables = Vec::with_capacity(count);
    for ft in &f.tables {
        for gt in &g.tables {
            tables.push(fmap.iter().zip(&gmap).map(|(&i, &j)| ft[i] * gt[j]).collect());
        }
    }
    Ok(CredalFactor {
        scope,
        cards,
        tables,
        extreme: false,
    })
}

/// Applies the policy's reduction to the factor's tables.
pub fn reduce_factor(mut f: CredalFactor, policy: &ReductionPolicy) -> Result<CredalFactor, InferenceError> {
    match policy.mode {
        ReductionMode::ExactHull if f.extreme => {}
        ReductionMode::ExactHull => {
            let keep = extreme_indices(&f.tables, policy.tol);
            if keep.len() < f.tables.len() {
                let mut flags = vec![false; f.tables.len()];
                keep.iter().for_each(|&i| flags[i] = true);
                f.tables = f
                    .tables
                    .into_iter()
                    .zip(flags)
                    .filter_map(|(t, k)| k.then_some(t))
                    .collect();
            }
            f.extreme = true;
        }
        ReductionMode::KReduce(k) => {
            let opts = ReduceOptions {
                tol: policy.tol,
                kl_pairing: policy.kl_pairing,
            };
            f.tables = if f.extreme {
                reduce_extreme_points(std::mem::take(&mut f.tables), k, policy.metric, opts)?
            } else {
                reduce_points(&f.tables, k, policy.metric, opts)?
            };
            f.extreme = false;
        }
    }
    Ok(f)
}

/// Sums every table over `var`.
pub fn marginalize_out(f: &CredalFactor, var: usize) -> Result<CredalFactor, InferenceError> {
    let p = f.position(var)?;
    let card = f.cards[p];
    let inner: usize = f.cards[p + 1..].iter().product();
    let size = f.domain_size() / card;
    let tables = f
        .tables
        .iter()
        .map(|t| {
            let mut out = vec![0.0; size];
            for (idx, &x) in t.iter().enumerate() {
                out[(idx / (card * inner)) * inner + idx % inner] += x;
            }
            out
        })
        .collect();
    let mut scope = f.scope.clone();
    let mut cards = f.cards.clone();
    scope.remove(p);
    cards.remove(p);
    Ok(CredalFactor {
        scope,
        cards,
        tables,
        extreme: false,
    })
}

/// Slices every table at `var = state`; `var` leaves the scope.
pub fn restrict_evidence(f: &CredalFactor, var: usize, state: usize) -> Result<CredalFactor, InferenceError> {
    let p = f.position(var)?;
    let card = f.cards[p];
    if state >= card {
        return Err(InferenceError::StateOutOfRange { var, state, card });
    }
    let inner: usize = f.cards[p + 1..].iter().product();
    let outer: usize = f.cards[..p].iter().product();
    let tables = f
        .tables
        .iter()
        .map(|t| {
            let mut out = Vec::with_capacity(outer * inner);
            for o in 0..outer {
                let start = (o * card + state) * inner;
                out.extend_from_slice(&t[start..start + inner]);
            }
            out
        })
        .collect();
    let mut scope = f.scope.clone();
    let mut cards = f.cards.clone();
    scope.remove(p);
    cards.remove(p);
    Ok(CredalFactor {
        scope,
        cards,
        tables,
        extreme: false,
    })
}

/// Entry of a table at an assignment of the factor's scope.
pub fn table_value(f: &CredalFactor, table: usize, states: &[usize]) -> Result<f64, InferenceError> {
    let idx = config_index(states, &f.cards)?;
    Ok(f.tables[table][idx])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{in_convex_hull, Metric, PointSet};
    use crate::model::CredalSet;

    fn set(vs: &[&[f64]]) -> CredalSet {
        CredalSet::new(vs[0].len(), vs.iter().map(|v| v.to_vec()).collect()).unwrap()
    }

    #[test]
    fn precise_table_gives_one_table() {
        let t = ConditionalCredalTable::new(1, vec![0], vec![set(&[&[0.9, 0.1]]), set(&[&[0.2, 0.8]])]);
        let f = factor_from_table(&t, &[2, 2]).unwrap();
        assert_eq!(f.scope(), &[0, 1]);
        assert_eq!(f.tables(), &[vec![0.9, 0.1, 0.2, 0.8]]);
    }

    #[test]
    fn two_by_two_product() {
        let t = ConditionalCredalTable::new(
            1,
            vec![0],
            vec![set(&[&[0.1, 0.9], &[0.2, 0.8]]), set(&[&[0.5, 0.5], &[0.6, 0.4]])],
        );
        let f = factor_from_table(&t, &[2, 2]).unwrap();
        assert_eq!(f.len(), 4);
    }

    #[test]
    fn ternary_child_columns_are_set_members() {
        let s0 = set(&[&[0.2, 0.3, 0.5], &[0.6, 0.2, 0.2]]);
        let s1 = set(&[&[0.1, 0.1, 0.8], &[0.3, 0.4, 0.3], &[0.5, 0.4, 0.1]]);
        let t = ConditionalCredalTable::new(1, vec![0], vec![s0.clone(), s1.clone()]);
        let f = factor_from_table(&t, &[2, 3]).unwrap();
        assert_eq!(f.len(), 6);
        let mut seen = Vec::new();
        for table in f.tables() {
            let c0 = table[0..3].to_vec();
            let c1 = table[3..6].to_vec();
            assert!(s0.vertices().contains(&c0));
            assert!(s1.vertices().contains(&c1));
            seen.push((c0, c1));
        }
        for a in s0.vertices() {
            for b in s1.vertices() {
                assert!(seen.contains(&(a.clone(), b.clone())));
            }
        }
    }

    #[test]
    fn single_table_combination_is_plain_product() {
        let f = CredalFactor::new(vec![0], vec![2], vec![vec![0.3, 0.7]]).unwrap();
        let g = CredalFactor::new(vec![0, 1], vec![2, 2], vec![vec![0.9, 0.1, 0.2, 0.8]]).unwrap();
        let h = combine(&f, &g, &ReductionPolicy::exact()).unwrap();
        assert_eq!(h.scope(), &[0, 1]);
        let expect = [0.27, 0.03, 0.14, 0.56];
        for (a, b) in h.tables()[0].iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn unit_factor_is_neutral() {
        let f = CredalFactor::new(vec![3], vec![2], vec![vec![0.3, 0.7], vec![0.6, 0.4]]).unwrap();
        let h = combine(&f, &CredalFactor::unit(), &ReductionPolicy::exact()).unwrap();
        assert_eq!(h, f);
        let h = combine(&CredalFactor::unit(), &f, &ReductionPolicy::exact()).unwrap();
        assert_eq!(h, f);
    }

    #[test]
    fn cardinality_mismatch_is_an_error() {
        let f = CredalFactor::new(vec![0], vec![2], vec![vec![0.3, 0.7]]).unwrap();
        let g = CredalFactor::new(vec![0], vec![3], vec![vec![0.3, 0.3, 0.4]]).unwrap();
        assert!(matches!(
            combine(&f, &g, &ReductionPolicy::exact()),
            Err(InferenceError::CardinalityMismatch { var: 0, .. })
        ));
    }

    #[test]
    fn k_reduced_product_stays_inside_the_hull() {
        let f = CredalFactor::new(
            vec![0],
            vec![3],
            vec![vec![0.2, 0.3, 0.5], vec![0.6, 0.2, 0.2], vec![0.1, 0.8, 0.1]],
        )
        .unwrap();
        let g = CredalFactor::new(
            vec![1],
            vec![2],
            vec![vec![0.1, 0.9], vec![0.4, 0.6], vec![0.7, 0.3], vec![0.95, 0.05]],
        )
        .unwrap();
        let raw = combine_raw(&f, &g).unwrap();
        assert_eq!(raw.len(), 12);
        let h = combine(&f, &g, &ReductionPolicy::k_reduce(5, Metric::Euclidean)).unwrap();
        assert!(h.len() <= 5);
        let hull = PointSet::new(6, raw.tables().to_vec()).unwrap();
        for t in h.tables() {
            assert!(in_convex_hull(t, &hull, 1e-9).unwrap());
        }
    }

    #[test]
    fn marginalize_row_sums() {
        let f = CredalFactor::new(vec![0, 1], vec![2, 2], vec![vec![0.1, 0.2, 0.3, 0.4]]).unwrap();
        let g = marginalize_out(&f, 1).unwrap();
        assert_eq!(g.scope(), &[0]);
        assert!((g.tables()[0][0] - 0.3).abs() < 1e-15);
        assert!((g.tables()[0][1] - 0.7).abs() < 1e-15);
        let s = marginalize_out(&g, 0).unwrap();
        assert!(s.scope().is_empty());
        assert!((s.tables()[0][0] - 1.0).abs() < 1e-15);
        assert!(matches!(marginalize_out(&f, 7), Err(InferenceError::NotInScope(7))));
    }

    #[test]
    fn marginalize_middle_axis_matches_loops() {
        let cards = [2, 3, 2];
        let t1: Vec<f64> = (0..12).map(|i| i as f64 / 66.0).collect();
        let t2: Vec<f64> = (0..12).map(|i| (12 - i) as f64 / 78.0).collect();
        let f = CredalFactor::new(vec![4, 5, 6], cards.to_vec(), vec![t1.clone(), t2.clone()]).unwrap();
        let g = marginalize_out(&f, 5).unwrap();
        assert_eq!(g.scope(), &[4, 6]);
        for (t, gt) in [t1, t2].iter().zip(g.tables()) {
            for a in 0..2 {
                for c in 0..2 {
                    let mut s = 0.0;
                    for b in 0..3 {
                        s += t[(a * 3 + b) * 2 + c];
                    }
                    assert!((gt[a * 2 + c] - s).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn restriction_slices() {
        let f = CredalFactor::new(vec![0, 1], vec![2, 2], vec![vec![0.1, 0.2, 0.3, 0.4]]).unwrap();
        let g = restrict_evidence(&f, 1, 1).unwrap();
        assert_eq!(g.scope(), &[0]);
        assert_eq!(g.tables()[0], vec![0.2, 0.4]);
        // P(B = 1) by restriction then summing out A
        let p = marginalize_out(&g, 0).unwrap();
        assert!((p.tables()[0][0] - 0.6).abs() < 1e-15);
        assert!(restrict_evidence(&f, 1, 2).is_err());
        let z = CredalFactor::new(vec![0], vec![2], vec![vec![1.0, 0.0]]).unwrap();
        assert_eq!(restrict_evidence(&z, 0, 1).unwrap().tables()[0], vec![0.0]);
    }
}

//! Conversion between vertex lists and inequality systems on the simplex.
//!
//! Inequalities are stored as `coeffs·x <= bound`; `Σx = 1` and `x >= 0`
//! are always implied and never stored.

use nalgebra::{DMatrix, DVector};

use super::embed::{embed_points, orthonormal_complement};
use super::hull::{certify_vertex, extreme_indices};
use super::{dot, GeometryError, PointSet, EPS_RANK};
use crate::model::{dedup_points, EPS_DUP};

#[derive(Debug, Clone, PartialEq)]
pub struct HRow {
    pub coeffs: Vec<f64>,
    pub bound: f64,
}

impl HRow {
    pub fn new(coeffs: Vec<f64>, bound: f64) -> Self {
        HRow { coeffs, bound }
    }

    pub fn slack(&self, x: &[f64]) -> f64 {
        self.bound - dot(&self.coeffs, x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HPolytope {
    pub dimension: usize,
    pub rows: Vec<HRow>,
    /// `(origin, orthonormal basis)` of the affine hull used while building
    /// the rows, when they came from [`v_to_h`].
    pub embedding: Option<(Vec<f64>, Vec<Vec<f64>>)>,
}

impl HPolytope {
    pub fn new(dimension: usize, rows: Vec<HRow>) -> Self {
        HPolytope {
            dimension,
            rows,
            embedding: None,
        }
    }

    /// True if `x` satisfies every row and the implicit simplex constraints.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.dimension
            && x.iter().all(|&v| v >= -tol)
            && (x.iter().sum::<f64>() - 1.0).abs() <= tol
            && self.rows.iter().all(|r| r.slack(x) >= -tol)
    }
}

/// H-representation of `CH(ps)` for points on the probability simplex.
///
/// Facets are enumerated in an orthonormal basis of the affine hull (where
/// the points have full rank) and mapped back; directions orthogonal to the
/// hull and to the all-ones vector become pairs of opposite rows pinning it.
/// Rows are canonicalised to a zero last coefficient (using `Σx = 1`) and
/// unit max-norm.
pub fn v_to_h(ps: &PointSet, tol: f64) -> Result<HPolytope, GeometryError> {
    if ps.is_empty() {
        return Err(GeometryError::Empty);
    }
    let d = ps.dimension();
    let vertices: Vec<Vec<f64>> = extreme_indices(ps.points(), tol)
        .into_iter()
        .map(|i| ps.points()[i].clone())
        .collect();
    let emb = embed_points(&vertices, d, EPS_RANK);
    let r = emb.rank();

    let mut raw: Vec<HRow> = Vec::new();
    let facets = match r {
        0 => Vec::new(),
        1 => {
            let ys: Vec<f64> = emb.coords.iter().map(|y| y[0]).collect();
            let lo = ys.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            vec![(vec![1.0], hi), (vec![-1.0], -lo)]
        }
        _ => embedded_facets(&emb.coords, r, tol),
    };
    for (normal, b) in facets {
        let mut coeffs = vec![0.0; d];
        for (nk, basis) in normal.iter().zip(&emb.basis) {
            for (c, bv) in coeffs.iter_mut().zip(basis) {
                *c += nk * bv;
            }
        }
        let bound = b + dot(&coeffs, &emb.origin);
        raw.push(HRow::new(coeffs, bound));
    }
    let mut spanning = emb.basis.clone();
    spanning.push(vec![1.0 / (d as f64).sqrt(); d]);
    for u in orthonormal_complement(&spanning, d, 1e-9) {
        let c = dot(&u, &emb.origin);
        let neg: Vec<f64> = u.iter().map(|x| -x).collect();
        raw.push(HRow::new(u, c));
        raw.push(HRow::new(neg, -c));
    }

    let mut rows: Vec<HRow> = Vec::new();
    for row in raw {
        if let Some(row) = canonical(row) {
            let dup = rows.iter().any(|q| {
                (q.bound - row.bound).abs() <= 1e-9
                    && q.coeffs.iter().zip(&row.coeffs).all(|(a, b)| (a - b).abs() <= 1e-9)
            });
            if !dup {
                rows.push(row);
            }
        }
    }
    Ok(HPolytope {
        dimension: d,
        rows,
        embedding: Some((emb.origin, emb.basis)),
    })
}

/// Uses `Σx = 1` to zero the last coefficient, then scales to unit max-norm.
/// Rows that become vacuous are dropped.
fn canonical(mut row: HRow) -> Option<HRow> {
    let last = *row.coeffs.last()?;
    row.coeffs.iter_mut().for_each(|c| *c -= last);
    row.bound -= last;
    let scale = row.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if scale <= 1e-12 {
        return None;
    }
    row.coeffs.iter_mut().for_each(|c| {
        *c /= scale;
        if c.abs() < 1e-15 {
            *c = 0.0;
        }
    });
    row.bound /= scale;
    Some(row)
}

/// Facets of a full-dimensional point set in `R^r` (r >= 2), found by
/// testing every hyperplane through r affinely independent points.
fn embedded_facets(coords: &[Vec<f64>], r: usize, tol: f64) -> Vec<(Vec<f64>, f64)> {
    let n = coords.len();
    let mut facets: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut subset: Vec<usize> = (0..r).collect();
    loop {
        let base = &coords[subset[0]];
        let diffs: Vec<Vec<f64>> = subset[1..]
            .iter()
            .map(|&i| coords[i].iter().zip(base).map(|(a, b)| a - b).collect())
            .collect();
        let complement = orthonormal_complement(&diffs, r, 1e-10);
        if complement.len() == 1 {
            let mut normal = complement.into_iter().next().unwrap();
            let mut b = dot(&normal, base);
            let vals: Vec<f64> = coords.iter().map(|p| dot(&normal, p) - b).collect();
            let above = vals.iter().any(|&v| v > tol);
            let below = vals.iter().any(|&v| v < -tol);
            if above != below {
                if above {
                    normal.iter_mut().for_each(|x| *x = -*x);
                    b = -b;
                }
                let known = facets.iter().any(|(m, c)| {
                    (c - b).abs() <= 1e-9 && m.iter().zip(&normal).all(|(x, y)| (x - y).abs() <= 1e-9)
                });
                if !known {
                    facets.push((normal, b));
                }
            }
        }
        // next r-combination of 0..n
        let mut k = r;
        loop {
            if k == 0 {
                return facets;
            }
            k -= 1;
            if subset[k] < n - r + k {
                subset[k] += 1;
                for m in k + 1..r {
                    subset[m] = subset[m - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Vertex enumeration of `{x : rows hold, Σx = 1, x >= 0}`.
///
/// Every choice of `d - 1` tight inequalities (rows or non-negativity) is
/// solved together with `Σx = 1`; feasible solutions are vertices. When
/// nothing is feasible the search is repeated at `10·tol` to tell an empty
/// set apart from a numerically borderline one.
pub fn h_to_v(hp: &HPolytope, tol: f64) -> Result<PointSet, GeometryError> {
    let d = hp.dimension;
    if d == 0 {
        return Err(GeometryError::Empty);
    }
    for row in &hp.rows {
        if row.coeffs.len() != d {
            return Err(GeometryError::DimensionMismatch {
                expected: d,
                got: row.coeffs.len(),
            });
        }
    }
    let found = enumerate_vertices(hp, tol);
    if found.is_empty() {
        let relaxed = 10.0 * tol;
        return if enumerate_vertices(hp, relaxed).is_empty() {
            Err(GeometryError::Infeasible)
        } else {
            Err(GeometryError::NumericalFailure { tol, relaxed })
        };
    }
    let set = PointSet::from_parts(d, found);
    let mut out = Vec::with_capacity(set.len());
    for p in set.points() {
        if certify_vertex(p, &set)? {
            out.push(p.clone());
        }
    }
    Ok(PointSet::from_parts(d, out))
}

fn enumerate_vertices(hp: &HPolytope, tol: f64) -> Vec<Vec<f64>> {
    let d = hp.dimension;
    let mut ineqs: Vec<HRow> = hp.rows.clone();
    for j in 0..d {
        let mut c = vec![0.0; d];
        c[j] = -1.0;
        ineqs.push(HRow::new(c, 0.0));
    }
    let m = ineqs.len();
    let pick = d - 1;
    let mut found: Vec<Vec<f64>> = Vec::new();
    if pick == 0 || pick > m {
        if pick == 0 {
            let x = vec![1.0];
            if ineqs.iter().all(|r| r.slack(&x) >= -tol) {
                found.push(x);
            }
        }
        return found;
    }
    let mut subset: Vec<usize> = (0..pick).collect();
    loop {
        let mut a = DMatrix::<f64>::zeros(d, d);
        let mut b = DVector::<f64>::zeros(d);
        for (row, &i) in subset.iter().enumerate() {
            for j in 0..d {
                a[(row, j)] = ineqs[i].coeffs[j];
            }
            b[row] = ineqs[i].bound;
        }
        for j in 0..d {
            a[(d - 1, j)] = 1.0;
        }
        b[d - 1] = 1.0;
        let lu = a.clone().full_piv_lu();
        let well_posed = lu.is_invertible() && {
            let diag = lu.u().diagonal();
            let max = diag.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let min = diag.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
            min > 1e-10 * max.max(1.0)
        };
        if well_posed {
            if let Some(x) = lu.solve(&b) {
                let x: Vec<f64> = x.iter().copied().collect();
                if x.iter().all(|v| v.is_finite()) && ineqs.iter().all(|r| r.slack(&x) >= -tol) {
                    let x: Vec<f64> = x.into_iter().map(|v| if v.abs() < 1e-15 { 0.0 } else { v.max(0.0) }).collect();
                    found.push(x);
                }
            }
        }
        let mut k = pick;
        loop {
            if k == 0 {
                return dedup_points(found, EPS_DUP.max(tol));
            }
            k -= 1;
            if subset[k] < m - pick + k {
                subset[k] += 1;
                for t in k + 1..pick {
                    subset[t] = subset[t - 1] + 1;
                }
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::EPS_FEAS;

    fn interval() -> PointSet {
        PointSet::new(2, vec![vec![0.2, 0.8], vec![0.5, 0.5]]).unwrap()
    }

    #[test]
    fn interval_rows() {
        let hp = v_to_h(&interval(), EPS_FEAS).unwrap();
        assert_eq!(hp.rows.len(), 2);
        let mut rows: Vec<(f64, f64)> = hp.rows.iter().map(|r| (r.coeffs[0], r.bound)).collect();
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert!((rows[0].0 + 1.0).abs() < 1e-12 && (rows[0].1 + 0.2).abs() < 1e-12);
        assert!((rows[1].0 - 1.0).abs() < 1e-12 && (rows[1].1 - 0.5).abs() < 1e-12);
        for r in &hp.rows {
            assert_eq!(r.coeffs[1], 0.0);
        }
    }

    #[test]
    fn interval_vertices_from_rows() {
        let hp = HPolytope::new(
            2,
            vec![HRow::new(vec![1.0, 0.0], 0.5), HRow::new(vec![-1.0, 0.0], -0.2)],
        );
        let v = h_to_v(&hp, EPS_FEAS).unwrap();
        assert!(v.same_set(&interval(), 1e-12));
    }

    #[test]
    fn no_rows_gives_the_simplex() {
        let v = h_to_v(&HPolytope::new(3, vec![]), EPS_FEAS).unwrap();
        let corners = PointSet::new(
            3,
            vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
        )
        .unwrap();
        assert!(v.same_set(&corners, 1e-12));
    }

    #[test]
    fn single_vertex_is_pinned() {
        let p = PointSet::new(3, vec![vec![0.2, 0.3, 0.5]]).unwrap();
        let hp = v_to_h(&p, EPS_FEAS).unwrap();
        assert!(hp.contains(&[0.2, 0.3, 0.5], 1e-9));
        assert!(!hp.contains(&[0.25, 0.25, 0.5], 1e-9));
        let back = h_to_v(&hp, EPS_FEAS).unwrap();
        assert!(back.same_set(&p, 1e-9));
    }

    #[test]
    fn collinear_triple_round_trips() {
        let ps = PointSet::new(
            3,
            vec![vec![0.2, 0.3, 0.5], vec![0.3, 0.3, 0.4], vec![0.5, 0.3, 0.2]],
        )
        .unwrap();
        let hp = v_to_h(&ps, EPS_FEAS).unwrap();
        for p in ps.points() {
            assert!(hp.contains(p, 1e-9));
        }
        let back = h_to_v(&hp, EPS_FEAS).unwrap();
        let ends = PointSet::new(3, vec![vec![0.2, 0.3, 0.5], vec![0.5, 0.3, 0.2]]).unwrap();
        assert!(back.same_set(&ends, 1e-9), "{back:?}");
    }

    #[test]
    fn infeasible_rows_are_reported() {
        let hp = HPolytope::new(
            2,
            vec![HRow::new(vec![1.0, 0.0], 0.2), HRow::new(vec![-1.0, 0.0], -0.5)],
        );
        assert_eq!(h_to_v(&hp, EPS_FEAS), Err(GeometryError::Infeasible));
        // borderline: x0 <= 0.5 and x0 >= 0.5 + 5e-9
        let hp = HPolytope::new(
            2,
            vec![HRow::new(vec![1.0, 0.0], 0.5), HRow::new(vec![-1.0, 0.0], -0.5 - 5e-9)],
        );
        assert!(matches!(h_to_v(&hp, EPS_FEAS), Err(GeometryError::NumericalFailure { .. })));
    }

    #[test]
    fn triangle_interior_round_trip() {
        let ps = PointSet::new(
            3,
            vec![
                vec![0.6, 0.2, 0.2],
                vec![0.2, 0.6, 0.2],
                vec![0.2, 0.2, 0.6],
                vec![0.3, 0.3, 0.4],
            ],
        )
        .unwrap();
        let hp = v_to_h(&ps, EPS_FEAS).unwrap();
        assert_eq!(hp.rows.len(), 3);
        let back = h_to_v(&hp, EPS_FEAS).unwrap();
        let hull = PointSet::new(3, ps.points()[..3].to_vec()).unwrap();
        assert!(back.same_set(&hull, 1e-9));
    }
}

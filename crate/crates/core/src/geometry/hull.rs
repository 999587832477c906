use super::embed::embed_points;
use super::lp::{convex_membership, max_weight_on, Membership};
use super::{dot, lex_cmp, GeometryError, PointSet, EPS_RANK};
use crate::model::{dedup_indices, max_norm, EPS_DUP};

/// Indices of the extreme points of `CH(points)`, in input order.
///
/// Near-duplicates (max-norm `EPS_DUP`) are collapsed onto their first
/// occurrence. The remaining points are re-expressed in an orthonormal basis
/// of their affine hull and pruned with an output-sensitive scheme: each point
/// is tested against the extreme points found so far, and a failed test yields
/// a separating direction whose maximiser is a new extreme point.
pub fn extreme_indices(points: &[Vec<f64>], tol: f64) -> Vec<usize> {
    if points.len() <= 1 {
        return (0..points.len()).collect();
    }
    let kept = dedup_indices(points, EPS_DUP);
    if kept.len() <= 1 {
        return kept;
    }
    let owned: Vec<Vec<f64>> = kept.iter().map(|&i| points[i].clone()).collect();
    let embedding = embed_points(&owned, owned[0].len(), EPS_RANK);
    let coords = &embedding.coords;
    let local = match embedding.rank() {
        0 => vec![0],
        1 => {
            let (mut lo, mut hi) = (0, 0);
            for (i, y) in coords.iter().enumerate() {
                if y[0] < coords[lo][0] {
                    lo = i;
                }
                if y[0] > coords[hi][0] {
                    hi = i;
                }
            }
            let mut v = vec![lo, hi];
            v.sort_unstable();
            v.dedup();
            v
        }
        _ => clarkson(coords, tol),
    };
    let mut out: Vec<usize> = local.into_iter().map(|i| kept[i]).collect();
    out.sort_unstable();
    out
}

fn clarkson(coords: &[Vec<f64>], tol: f64) -> Vec<usize> {
    let n = coords.len();
    let mut is_extreme = vec![false; n];
    let mut extreme: Vec<usize> = Vec::new();
    let add = |i: usize, is_extreme: &mut Vec<bool>, extreme: &mut Vec<usize>| {
        if !is_extreme[i] {
            is_extreme[i] = true;
            extreme.push(i);
        }
    };
    // lexicographic extremes are always vertices
    let lexmin = (0..n).min_by(|&a, &b| lex_cmp(&coords[a], &coords[b])).unwrap();
    let lexmax = (0..n).max_by(|&a, &b| lex_cmp(&coords[a], &coords[b])).unwrap();
    add(lexmin, &mut is_extreme, &mut extreme);
    add(lexmax, &mut is_extreme, &mut extreme);

    for p in 0..n {
        while !is_extreme[p] {
            let gens: Vec<&[f64]> = extreme.iter().map(|&i| coords[i].as_slice()).collect();
            match convex_membership(&gens, &coords[p], tol) {
                Membership::Inside => break,
                Membership::Outside { direction, .. } => {
                    match maximiser(coords, &direction) {
                        Some(q) if !is_extreme[q] => add(q, &mut is_extreme, &mut extreme),
                        _ => {
                            if !inside_others(coords, p, tol) {
                                add(p, &mut is_extreme, &mut extreme);
                            }
                            break;
                        }
                    }
                }
                Membership::Undecided => {
                    if !inside_others(coords, p, tol) {
                        add(p, &mut is_extreme, &mut extreme);
                    }
                    break;
                }
            }
        }
    }
    extreme.sort_unstable();
    extreme
}

/// Lexicographically largest point among the maximisers of `direction`.
fn maximiser(coords: &[Vec<f64>], direction: &[f64]) -> Option<usize> {
    let norm = dot(direction, direction).sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return None;
    }
    let values: Vec<f64> = coords.iter().map(|y| dot(direction, y) / norm).collect();
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let window = 1e-12 * (1.0 + best.abs());
    (0..coords.len())
        .filter(|&i| values[i] >= best - window)
        .max_by(|&a, &b| lex_cmp(&coords[a], &coords[b]))
}

fn inside_others(coords: &[Vec<f64>], p: usize, tol: f64) -> bool {
    let gens: Vec<&[f64]> = coords
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != p)
        .map(|(_, y)| y.as_slice())
        .collect();
    // an undecided solve keeps the point; dropping a vertex would be worse
    matches!(convex_membership(&gens, &coords[p], tol), Membership::Inside)
}

/// Keeps only the extreme points of `CH(ps)`, in input order.
pub fn remove_redundant_vertices(ps: &PointSet, tol: f64) -> Result<PointSet, GeometryError> {
    if ps.is_empty() {
        return Err(GeometryError::Empty);
    }
    let idx = extreme_indices(ps.points(), tol);
    Ok(PointSet::from_parts(
        ps.dimension(),
        idx.into_iter().map(|i| ps.points()[i].clone()).collect(),
    ))
}

/// True iff `x` is not a convex combination of the points of `ps` other
/// than `x` itself.
pub fn certify_vertex(x: &[f64], ps: &PointSet) -> Result<bool, GeometryError> {
    if ps.is_empty() {
        return Err(GeometryError::Empty);
    }
    if x.len() != ps.dimension() {
        return Err(GeometryError::DimensionMismatch {
            expected: ps.dimension(),
            got: x.len(),
        });
    }
    let others: Vec<&[f64]> = ps
        .points()
        .iter()
        .filter(|p| max_norm(p, x) > EPS_DUP)
        .map(|p| p.as_slice())
        .collect();
    if others.is_empty() {
        return Ok(true);
    }
    match convex_membership(&others, x, super::EPS_FEAS) {
        Membership::Inside => Ok(false),
        Membership::Outside { .. } => Ok(true),
        Membership::Undecided => Err(GeometryError::Stalled),
    }
}

/// Membership of `x` in `CH(ps)` within `tol` (L1 residual of the LP).
pub fn in_convex_hull(x: &[f64], ps: &PointSet, tol: f64) -> Result<bool, GeometryError> {
    if ps.is_empty() {
        return Err(GeometryError::Empty);
    }
    if x.len() != ps.dimension() {
        return Err(GeometryError::DimensionMismatch {
            expected: ps.dimension(),
            got: x.len(),
        });
    }
    let gens: Vec<&[f64]> = ps.points().iter().map(|p| p.as_slice()).collect();
    match convex_membership(&gens, x, tol) {
        Membership::Inside => Ok(true),
        Membership::Outside { .. } => Ok(false),
        Membership::Undecided => Err(GeometryError::Stalled),
    }
}

/// Whether points `i` and `j` of `ps` span an edge of `CH(ps)`: their
/// midpoint admits no convex representation that puts weight on any other
/// point.
pub fn are_adjacent(ps: &PointSet, i: usize, j: usize, tol: f64) -> Result<bool, GeometryError> {
    let n = ps.len();
    if i >= n || j >= n || i == j {
        return Err(GeometryError::TooFewPoints { needed: 2, got: n });
    }
    let embedding = embed_points(ps.points(), ps.dimension(), EPS_RANK);
    let coords = &embedding.coords;
    let mid: Vec<f64> = coords[i].iter().zip(&coords[j]).map(|(a, b)| 0.5 * (a + b)).collect();
    let gens: Vec<&[f64]> = coords.iter().map(|y| y.as_slice()).collect();
    let weighted: Vec<bool> = (0..n)
        .map(|k| k != i && k != j && max_norm(&ps.points()[k], &ps.points()[i]) > EPS_DUP
            && max_norm(&ps.points()[k], &ps.points()[j]) > EPS_DUP)
        .collect();
    let w = max_weight_on(&gens, &mid, &weighted, tol).ok_or(GeometryError::Stalled)?;
    Ok(w <= tol.max(1e-9))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::EPS_FEAS;

    /// Fifteen planar points with six extreme points; the worked 4-reduction
    /// example.
    pub(crate) fn fifteen_points() -> Vec<Vec<f64>> {
        [
            [0.864536004924652, 0.344633071964266],
            [0.0439424390127909, 0.834267041275926],
            [0.146369596460016, 0.562023118426994],
            [0.0932028139412838, 0.674301617404711],
            [0.700839289168985, 0.689625239048539],
            [0.396247535425765, 0.871731181837455],
            [0.944907220389489, 0.614592244388893],
            [0.393392135810945, 0.201281918117575],
            [0.10095490640833, 0.186136091795689],
            [0.483082749204841, 0.0609128873819137],
            [0.224675572590779, 0.369785296748755],
            [0.482996590168576, 0.455149312785737],
            [0.557659459252472, 0.644372823660673],
            [0.920207113094907, 0.581633179323039],
            [0.44032674656005, 0.402856926444781],
        ]
        .iter()
        .map(|p| p.to_vec())
        .collect()
    }

    #[test]
    fn segment_keeps_endpoints() {
        let ps = PointSet::new(2, vec![vec![0.2, 0.8], vec![0.5, 0.5], vec![0.3, 0.7]]).unwrap();
        let h = remove_redundant_vertices(&ps, EPS_FEAS).unwrap();
        assert_eq!(h.points(), &[vec![0.2, 0.8], vec![0.5, 0.5]]);
    }

    #[test]
    fn single_point_is_kept() {
        let ps = PointSet::new(3, vec![vec![0.1, 0.2, 0.7]]).unwrap();
        assert_eq!(remove_redundant_vertices(&ps, EPS_FEAS).unwrap(), ps);
        assert!(remove_redundant_vertices(&PointSet::from_parts(2, vec![]), EPS_FEAS).is_err());
    }

    #[test]
    fn fifteen_point_hull_has_six_vertices() {
        let ps = PointSet::new(2, fifteen_points()).unwrap();
        let h = remove_redundant_vertices(&ps, EPS_FEAS).unwrap();
        let extreme = PointSet::new(
            2,
            vec![
                vec![0.0439424390127909, 0.834267041275926],
                vec![0.10095490640833, 0.186136091795689],
                vec![0.483082749204841, 0.0609128873819137],
                vec![0.864536004924652, 0.344633071964266],
                vec![0.944907220389489, 0.614592244388893],
                vec![0.396247535425765, 0.871731181837455],
            ],
        )
        .unwrap();
        assert!(h.same_set(&extreme, 0.0), "{h:?}");
    }

    #[test]
    fn duplicates_collapse() {
        let ps = PointSet::new(
            2,
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0]],
        )
        .unwrap();
        let h = remove_redundant_vertices(&ps, EPS_FEAS).unwrap();
        assert_eq!(h.len(), 3);
    }

    #[test]
    fn certify_triangle() {
        let tri = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        let c = vec![1.0 / 3.0, 1.0 / 3.0];
        let mut with_c = tri.clone();
        with_c.push(c.clone());
        let ps = PointSet::new(2, with_c).unwrap();
        assert!(!certify_vertex(&c, &ps).unwrap());
        assert!(certify_vertex(&[1.0, 0.0], &ps).unwrap());
        assert!(certify_vertex(&[0.0, 0.0], &PointSet::new(2, vec![vec![0.0, 0.0]]).unwrap()).unwrap());
        assert!(certify_vertex(&[0.0], &ps).is_err());
    }

    #[test]
    fn adjacency_on_a_square() {
        let ps = PointSet::new(
            2,
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]],
        )
        .unwrap();
        assert!(are_adjacent(&ps, 0, 1, EPS_FEAS).unwrap());
        assert!(are_adjacent(&ps, 1, 2, EPS_FEAS).unwrap());
        assert!(!are_adjacent(&ps, 0, 2, EPS_FEAS).unwrap());
        assert!(!are_adjacent(&ps, 1, 3, EPS_FEAS).unwrap());
    }

    #[test]
    fn adjacency_in_a_kite() {
        // the diagonal 0-2 is not an edge even though its midpoint is not
        // a combination of the two remaining vertices alone
        let ps = PointSet::new(
            2,
            vec![vec![0.0, 0.0], vec![1.5, -0.2], vec![2.0, 0.0], vec![0.5, 3.0]],
        )
        .unwrap();
        assert!(!are_adjacent(&ps, 0, 2, EPS_FEAS).unwrap());
        assert!(are_adjacent(&ps, 0, 1, EPS_FEAS).unwrap());
    }

    #[test]
    fn higher_dimensional_simplex_with_interior() {
        // 4-simplex corners plus interior and face points
        let mut pts = Vec::new();
        for k in 0..5 {
            let mut e = vec![0.0; 5];
            e[k] = 1.0;
            pts.push(e);
        }
        pts.push(vec![0.2; 5]);
        pts.push(vec![0.5, 0.5, 0.0, 0.0, 0.0]);
        pts.push(vec![0.1, 0.3, 0.6, 0.0, 0.0]);
        let ps = PointSet::new(5, pts).unwrap();
        let h = remove_redundant_vertices(&ps, EPS_FEAS).unwrap();
        assert_eq!(h.len(), 5);
    }
}

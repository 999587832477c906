//! Affine rank detection and orthonormal re-parametrisation of point sets.

use super::{dot, PointSet};

/// Coordinates of a point set in an orthonormal basis of its affine hull.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub origin: Vec<f64>,
    /// `rank` orthonormal vectors of the ambient dimension.
    pub basis: Vec<Vec<f64>>,
    /// One `rank`-length coordinate vector per input point.
    pub coords: Vec<Vec<f64>>,
}

impl Embedding {
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// `origin + Σ_k y_k basis_k`.
    pub fn lift(&self, y: &[f64]) -> Vec<f64> {
        let mut x = self.origin.clone();
        for (b, &yk) in self.basis.iter().zip(y) {
            for (xi, bi) in x.iter_mut().zip(b) {
                *xi += yk * bi;
            }
        }
        x
    }

    /// Orthogonal projection of an ambient point onto the embedded coordinates.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let diff: Vec<f64> = x.iter().zip(&self.origin).map(|(a, o)| a - o).collect();
        self.basis.iter().map(|b| dot(b, &diff)).collect()
    }

    pub fn embedded(&self) -> PointSet {
        PointSet::from_parts(self.rank(), self.coords.clone())
    }
}

/// Pivoted modified Gram-Schmidt on the differences `p_i - p_0`.
///
/// At every step the difference with the largest residual norm is
/// normalised and added to the basis; the process stops once every residual
/// is at most `tol`, which fixes the affine rank.
pub fn full_rank_embedding(ps: &PointSet, tol: f64) -> Embedding {
    embed_points(ps.points(), ps.dimension(), tol)
}

pub(crate) fn embed_points(points: &[Vec<f64>], dimension: usize, tol: f64) -> Embedding {
    let Some(origin) = points.first().cloned() else {
        return Embedding {
            origin: vec![0.0; dimension],
            basis: Vec::new(),
            coords: Vec::new(),
        };
    };
    let mut residuals: Vec<Vec<f64>> = points
        .iter()
        .map(|p| p.iter().zip(&origin).map(|(a, o)| a - o).collect())
        .collect();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    while basis.len() < dimension {
        let (best, norm) = residuals
            .iter()
            .enumerate()
            .map(|(i, r)| (i, dot(r, r).sqrt()))
            .fold((0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if norm <= tol {
            break;
        }
        let mut q: Vec<f64> = residuals[best].iter().map(|x| x / norm).collect();
        // second pass against the accumulated basis
        for b in &basis {
            let c = dot(&q, b);
            q.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
        let qn = dot(&q, &q).sqrt();
        if qn <= f64::EPSILON {
            break;
        }
        q.iter_mut().for_each(|x| *x /= qn);
        for r in residuals.iter_mut() {
            let c = dot(r, &q);
            r.iter_mut().zip(&q).for_each(|(x, y)| *x -= c * y);
        }
        basis.push(q);
    }
    let coords = points
        .iter()
        .map(|p| {
            let diff: Vec<f64> = p.iter().zip(&origin).map(|(a, o)| a - o).collect();
            basis.iter().map(|b| dot(b, &diff)).collect()
        })
        .collect();
    Embedding {
        origin,
        basis,
        coords,
    }
}

/// Orthonormal basis of the complement of `span(vectors)` in `R^dimension`.
pub(crate) fn orthonormal_complement(vectors: &[Vec<f64>], dimension: usize, tol: f64) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let push = |v: &[f64], basis: &mut Vec<Vec<f64>>| -> bool {
        let mut q = v.to_vec();
        for _ in 0..2 {
            for b in basis.iter() {
                let c = dot(&q, b);
                q.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let n = dot(&q, &q).sqrt();
        if n > tol {
            q.iter_mut().for_each(|x| *x /= n);
            basis.push(q);
            true
        } else {
            false
        }
    };
    for v in vectors {
        push(v, &mut basis);
    }
    let spanned = basis.len();
    for k in 0..dimension {
        let mut e = vec![0.0; dimension];
        e[k] = 1.0;
        push(&e, &mut basis);
    }
    basis.split_off(spanned)
}

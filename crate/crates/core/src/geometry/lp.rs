//! Dense two-phase simplex for small standard-form programs
//! `min c·x  s.t.  A x = b, x >= 0`.
//!
//! Sized for the problems geometry needs (tens of rows, at most a few
//! thousand columns). Dantzig pricing with a switch to Bland's rule after a
//! run of degenerate pivots.

const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-12;
const DEGENERATE_RUN: usize = 50;

// certificates and primal points are only inspected by tests
#[allow(dead_code)]
#[derive(Debug, Clone)]
pub(crate) enum LpOutcome {
    /// Phase one could not reach zero. `dual` certifies it: `dual·A_j <= 0`
    /// for every column and `dual·b = infeasibility > 0`.
    Infeasible { dual: Vec<f64>, infeasibility: f64 },
    Optimal { x: Vec<f64>, value: f64 },
    Unbounded,
    /// Iteration cap hit; treat the answer as unknown.
    Stalled,
}

struct Tableau {
    rows: usize,
    cols: usize, // structural columns
    width: usize,
    data: Vec<f64>,
    basis: Vec<usize>,
    dead_rows: Vec<bool>,
}

impl Tableau {
    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.width + c]
    }

    #[inline]
    fn rhs(&self, r: usize) -> f64 {
        self.data[r * self.width + self.width - 1]
    }

    fn obj_row(&self) -> usize {
        self.rows
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let p = self.data[r * w + c];
        for k in 0..w {
            self.data[r * w + k] /= p;
        }
        let (before, rest) = self.data.split_at_mut(r * w);
        let (pivot_row, after) = rest.split_at_mut(w);
        let eliminate = |row: &mut [f64]| {
            let f = row[c];
            if f != 0.0 {
                for (x, &y) in row.iter_mut().zip(pivot_row.iter()) {
                    *x -= f * y;
                }
                row[c] = 0.0;
            }
        };
        before.chunks_mut(w).for_each(eliminate);
        after.chunks_mut(w).for_each(eliminate);
        self.basis[r] = c;
    }

    /// Runs simplex iterations on the current objective row. Only columns
    /// `< enter_limit` may enter the basis.
    fn iterate(&mut self, enter_limit: usize, max_iter: usize) -> Result<(), LpOutcome> {
        let obj = self.obj_row();
        let mut degenerate = 0usize;
        for _ in 0..max_iter {
            let bland = degenerate >= DEGENERATE_RUN;
            let mut enter = None;
            let mut best = -COST_TOL;
            for j in 0..enter_limit {
                let d = self.at(obj, j);
                if d < best {
                    enter = Some(j);
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some(s) = enter else { return Ok(()) };

            let mut leave: Option<(usize, f64, f64)> = None;
            for r in 0..self.rows {
                if self.dead_rows[r] {
                    continue;
                }
                let a = self.at(r, s);
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs(r).max(0.0) / a;
                leave = match leave {
                    None => Some((r, ratio, a)),
                    Some((lr, lratio, la)) => {
                        if ratio < lratio - 1e-14 {
                            Some((r, ratio, a))
                        } else if ratio <= lratio + 1e-14 {
                            let better = if bland {
                                self.basis[r] < self.basis[lr]
                            } else {
                                a > la
                            };
                            if better {
                                Some((r, ratio, a))
                            } else {
                                Some((lr, lratio, la))
                            }
                        } else {
                            Some((lr, lratio, la))
                        }
                    }
                };
            }
            let Some((r, ratio, _)) = leave else {
                return Err(LpOutcome::Unbounded);
            };
            if ratio <= 1e-14 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(r, s);
        }
        Err(LpOutcome::Stalled)
    }
}

/// Solves `min c·x, A x = b, x >= 0` where `a` is row-major `rows × cols`.
/// With `cost = None` only feasibility is decided (the returned value is 0).
/// `feas_tol` bounds the phase-one residual `Σ |A x - b|` accepted as feasible.
pub(crate) fn solve(
    a: &[f64],
    b: &[f64],
    rows: usize,
    cols: usize,
    cost: Option<&[f64]>,
    feas_tol: f64,
) -> LpOutcome {
    debug_assert_eq!(a.len(), rows * cols);
    debug_assert_eq!(b.len(), rows);
    let width = cols + rows + 1;
    let mut data = vec![0.0; (rows + 1) * width];
    let mut sign = vec![1.0; rows];
    for r in 0..rows {
        if b[r] < 0.0 {
            sign[r] = -1.0;
        }
        let row = &mut data[r * width..(r + 1) * width];
        for c in 0..cols {
            row[c] = sign[r] * a[r * cols + c];
        }
        row[cols + r] = 1.0;
        row[width - 1] = sign[r] * b[r];
    }
    // phase-one reduced costs: -Σ rows over structural columns, -w in rhs
    for r in 0..rows {
        for c in 0..cols {
            data[rows * width + c] -= data[r * width + c];
        }
        data[rows * width + width - 1] -= data[r * width + width - 1];
    }
    let mut t = Tableau {
        rows,
        cols,
        width,
        data,
        basis: (cols..cols + rows).collect(),
        dead_rows: vec![false; rows],
    };
    let max_iter = 50 * (rows + cols) + 1000;
    if let Err(outcome) = t.iterate(cols, max_iter) {
        // phase one is bounded below by zero, so only a stall can land here
        return outcome;
    }
    let infeasibility = -t.at(rows, width - 1);
    if infeasibility > feas_tol {
        let dual = (0..rows)
            .map(|r| sign[r] * (1.0 - t.at(rows, cols + r)))
            .collect();
        return LpOutcome::Infeasible {
            dual,
            infeasibility,
        };
    }
    let Some(cost) = cost else {
        return LpOutcome::Optimal {
            x: t.primal(),
            value: 0.0,
        };
    };

    // Drive leftover artificials out of the basis; rows that cannot pivot
    // are linearly dependent and are retired.
    for r in 0..rows {
        if t.basis[r] < cols {
            continue;
        }
        let pick = (0..cols)
            .filter(|&j| !t.basis.contains(&j))
            .max_by(|&x, &y| t.at(r, x).abs().total_cmp(&t.at(r, y).abs()));
        match pick {
            Some(j) if t.at(r, j).abs() > 1e-9 => t.pivot(r, j),
            _ => t.dead_rows[r] = true,
        }
    }
    for k in 0..width {
        t.data[rows * width + k] = 0.0;
    }
    t.data[rows * width..rows * width + cols].copy_from_slice(&cost[..cols]);
    for r in 0..rows {
        let bc = t.basis[r];
        let cb = if bc < cols { cost[bc] } else { 0.0 };
        if cb != 0.0 {
            for k in 0..width {
                let v = t.data[r * width + k];
                t.data[rows * width + k] -= cb * v;
            }
        }
    }
    if let Err(outcome) = t.iterate(cols, max_iter) {
        return outcome;
    }
    let x = t.primal();
    let value = x.iter().zip(cost).map(|(x, c)| x * c).sum();
    LpOutcome::Optimal { x, value }
}

impl Tableau {
    fn primal(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.cols];
        for r in 0..self.rows {
            let bc = self.basis[r];
            if bc < self.cols {
                x[bc] = self.rhs(r).max(0.0);
            }
        }
        x
    }
}

/// Result of asking whether `x` lies in the convex hull of some generators.
#[allow(dead_code)]
#[derive(Debug, Clone)]
pub(crate) enum Membership {
    Inside,
    /// `direction·g + offset <= 0` for every generator while
    /// `direction·x + offset > 0`.
    Outside { direction: Vec<f64>, offset: f64 },
    Undecided,
}

/// Builds the `[g_1 .. g_m; 1 .. 1]` system shared by hull LPs.
fn hull_system(generators: &[&[f64]], target: &[f64]) -> (Vec<f64>, Vec<f64>, usize, usize) {
    let dim = target.len();
    let rows = dim + 1;
    let cols = generators.len();
    let mut a = vec![0.0; rows * cols];
    for (j, g) in generators.iter().enumerate() {
        for (r, &v) in g.iter().enumerate() {
            a[r * cols + j] = v;
        }
        a[dim * cols + j] = 1.0;
    }
    let mut b = target.to_vec();
    b.push(1.0);
    (a, b, rows, cols)
}

pub(crate) fn convex_membership(generators: &[&[f64]], x: &[f64], tol: f64) -> Membership {
    if generators.is_empty() {
        return Membership::Outside {
            direction: vec![0.0; x.len()],
            offset: 1.0,
        };
    }
    let (a, b, rows, cols) = hull_system(generators, x);
    match solve(&a, &b, rows, cols, None, tol) {
        LpOutcome::Optimal { .. } => Membership::Inside,
        LpOutcome::Infeasible { mut dual, .. } => {
            let offset = dual.pop().unwrap_or(0.0);
            Membership::Outside {
                direction: dual,
                offset,
            }
        }
        LpOutcome::Unbounded | LpOutcome::Stalled => Membership::Undecided,
    }
}

/// Largest total weight a convex combination of `points` equal to `x` can
/// put on the columns flagged in `weighted`; `None` if `x` is outside the
/// hull or the solve stalled.
pub(crate) fn max_weight_on(
    points: &[&[f64]],
    x: &[f64],
    weighted: &[bool],
    tol: f64,
) -> Option<f64> {
    let (a, b, rows, cols) = hull_system(points, x);
    let cost: Vec<f64> = weighted.iter().map(|&w| if w { -1.0 } else { 0.0 }).collect();
    match solve(&a, &b, rows, cols, Some(&cost), tol) {
        LpOutcome::Optimal { value, .. } => Some(-value),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_membership() {
        let tri: Vec<&[f64]> = vec![&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]];
        assert!(matches!(convex_membership(&tri, &[0.2, 0.2], 1e-9), Membership::Inside));
        assert!(matches!(convex_membership(&tri, &[0.5, 0.5], 1e-9), Membership::Inside));
        match convex_membership(&tri, &[0.8, 0.8], 1e-9) {
            Membership::Outside { direction, offset } => {
                for g in &tri {
                    let v: f64 = direction.iter().zip(g.iter()).map(|(a, b)| a * b).sum::<f64>() + offset;
                    assert!(v <= 1e-9, "generator not separated: {v}");
                }
                let v: f64 = direction[0] * 0.8 + direction[1] * 0.8 + offset;
                assert!(v > 0.0);
            }
            other => panic!("expected outside, got {other:?}"),
        }
    }

    #[test]
    fn negative_coordinates_are_handled() {
        let seg: Vec<&[f64]> = vec![&[-1.0, -2.0], &[-3.0, -2.0]];
        assert!(matches!(convex_membership(&seg, &[-2.0, -2.0], 1e-9), Membership::Inside));
        assert!(matches!(
            convex_membership(&seg, &[-2.0, -2.5], 1e-9),
            Membership::Outside { .. }
        ));
    }

    #[test]
    fn phase_two_minimizes() {
        // min -x0 - x1 s.t. x0 + x1 + x2 = 1  => value -1
        let out = solve(&[1.0, 1.0, 1.0], &[1.0], 1, 3, Some(&[-1.0, -1.0, 0.0]), 1e-12);
        match out {
            LpOutcome::Optimal { value, .. } => assert!((value + 1.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        // unbounded: min -x0 s.t. x0 - x1 = 0
        let out = solve(&[1.0, -1.0], &[0.0], 1, 2, Some(&[-1.0, 0.0]), 1e-12);
        assert!(matches!(out, LpOutcome::Unbounded));
    }

    #[test]
    fn certificates() {
        // x0 + x1 = 1 and x0 + x1 = 2 cannot both hold
        let a = [1.0, 1.0, 1.0, 1.0];
        let b = [1.0, 2.0];
        match solve(&a, &b, 2, 2, None, 1e-12) {
            LpOutcome::Infeasible { dual, infeasibility } => {
                assert!(infeasibility > 0.0);
                for j in 0..2 {
                    assert!(dual[0] * a[j] + dual[1] * a[2 + j] <= 1e-12);
                }
                assert!((dual[0] * b[0] + dual[1] * b[1] - infeasibility).abs() < 1e-9);
            }
            other => panic!("{other:?}"),
        }
        // 2 x0 + x1 = 3, x1 = 1 has the single solution (1, 1)
        match solve(&[2.0, 1.0, 0.0, 1.0], &[3.0, 1.0], 2, 2, None, 1e-12) {
            LpOutcome::Optimal { x, .. } => {
                assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn square_diagonal_weight() {
        // unit square, midpoint of the diagonal (0,0)-(1,1) can be written
        // entirely with the other diagonal
        let sq: Vec<&[f64]> = vec![&[0.0, 0.0], &[1.0, 1.0], &[1.0, 0.0], &[0.0, 1.0]];
        let w = max_weight_on(&sq, &[0.5, 0.5], &[false, false, true, true], 1e-9).unwrap();
        assert!((w - 1.0).abs() < 1e-9);
        // midpoint of an edge cannot use the other vertices
        let w = max_weight_on(&sq, &[0.5, 0.0], &[false, true, false, true], 1e-9).unwrap();
        assert!(w.abs() < 1e-9);
    }
}

//! Weight repair: the nonnegative weights closest (in l2) to a target that
//! make a set of directions a POVM, i.e. `sum a_i = 1`, `sum a_i n_i = 0`.

use nalgebra::{DMatrix, DVector};

use crate::bloch::{UnitVec3, Vec3};
use crate::lp;

const ACTIVE_EPS: f64 = 1e-13;

/// Constraint rows `[1 ...]`, `[n_x ...]`, (`[n_y ...]` unless planar), `[n_z ...]`.
fn constraint_rows(directions: &[Vec3], planar: bool) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut a = vec![vec![1.0; directions.len()]];
    a.push(directions.iter().map(|d| d.x).collect());
    if !planar {
        a.push(directions.iter().map(|d| d.y).collect());
    }
    a.push(directions.iter().map(|d| d.z).collect());
    let mut b = vec![0.0; a.len()];
    b[0] = 1.0;
    (a, b)
}

/// Minimizes `||alpha - target||^2` over POVM weights for `directions`.
/// Returns `None` when the origin is not in the convex hull of the directions.
pub fn closest_weights(directions: &[UnitVec3], target: &[f64], planar: bool) -> Option<Vec<f64>> {
    assert_eq!(directions.len(), target.len());
    let dirs: Vec<Vec3> = directions.iter().map(|d| d.get()).collect();
    let (a_rows, b) = constraint_rows(&dirs, planar);
    let n = dirs.len();
    let a = DMatrix::from_fn(a_rows.len(), n, |i, j| a_rows[i][j]);
    let b = DVector::from_vec(b);
    let w = DVector::from_column_slice(target);

    // Unconstrained-sign projection first; usually already nonnegative.
    let free: Vec<bool> = vec![true; n];
    if let Some((x, _)) = equality_projection(&a, &b, &w, &free) {
        if x.iter().all(|&v| v >= 0.0) && residual(&a, &b, &x) < 1e-12 {
            return Some(x.iter().copied().collect());
        }
    }

    let start = lp::find_feasible(&a_rows, b.as_slice(), None, lp::FEASIBILITY_TOL)?;
    active_set(&a, &b, &w, DVector::from_vec(start))
}

fn residual(a: &DMatrix<f64>, b: &DVector<f64>, x: &DVector<f64>) -> f64 {
    (a * x - b).amax()
}

/// Projects `w` onto `{x : A x = b, x_i = 0 for !free[i]}`; also returns the multipliers.
fn equality_projection(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    w: &DVector<f64>,
    free: &[bool],
) -> Option<(DVector<f64>, DVector<f64>)> {
    let mut af = a.clone();
    for (j, &f) in free.iter().enumerate() {
        if !f {
            af.column_mut(j).fill(0.0);
        }
    }
    let mut wf = w.clone();
    for (j, &f) in free.iter().enumerate() {
        if !f {
            wf[j] = 0.0;
        }
    }
    let gram = &af * af.transpose();
    let rhs = &af * &wf - b;
    let lambda = gram.pseudo_inverse(1e-12).ok()? * rhs;
    let x = wf - af.transpose() * &lambda;
    Some((x, lambda))
}

/// Primal active-set method from a feasible starting point.
fn active_set(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    w: &DVector<f64>,
    mut x: DVector<f64>,
) -> Option<Vec<f64>> {
    let n = x.len();
    let mut free: Vec<bool> = x.iter().map(|&v| v > ACTIVE_EPS).collect();
    for (j, f) in free.iter().enumerate() {
        if !f {
            x[j] = 0.0;
        }
    }
    for _ in 0..(20 * n + 100) {
        let (target, lambda) = equality_projection(a, b, w, &free)?;
        let step = &target - &x;
        if step.amax() < 1e-14 {
            // Multipliers of the active bounds: mu_i = (A^T lambda)_i - w_i.
            let atl = a.transpose() * &lambda;
            let worst = (0..n)
                .filter(|&i| !free[i])
                .map(|i| (i, atl[i] - w[i]))
                .min_by(|p, q| p.1.total_cmp(&q.1));
            match worst {
                Some((i, mu)) if mu < -1e-12 => free[i] = true,
                _ => return finish(a, b, x),
            }
            continue;
        }
        let mut t = 1.0;
        let mut blocking = None;
        for i in 0..n {
            if free[i] && step[i] < 0.0 {
                let ti = -x[i] / step[i];
                if ti < t {
                    t = ti;
                    blocking = Some(i);
                }
            }
        }
        x += step * t;
        if let Some(i) = blocking {
            x[i] = 0.0;
            free[i] = false;
        }
    }
    finish(a, b, x)
}

fn finish(a: &DMatrix<f64>, b: &DVector<f64>, x: DVector<f64>) -> Option<Vec<f64>> {
    let x = x.map(|v| v.max(0.0));
    if residual(a, b, &x) > 1e-11 {
        return None;
    }
    Some(x.iter().copied().collect())
}

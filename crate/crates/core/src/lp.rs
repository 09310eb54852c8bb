//! Dense phase-one simplex for tiny feasibility problems.
//!
//! Solves `A x = b`, `0 <= x <= u` by minimizing the sum of artificial
//! variables. Bland's rule keeps degenerate problems from cycling.

const PIVOT_EPS: f64 = 1e-12;

/// Residual tolerance below which the phase-one optimum counts as feasible.
pub const FEASIBILITY_TOL: f64 = 1e-10;

/// Finds a vertex of `{x : A x = b, 0 <= x <= upper}`, or `None` when the
/// phase-one optimum exceeds `tol`. `upper = None` leaves `x` unbounded above.
pub fn find_feasible(a: &[Vec<f64>], b: &[f64], upper: Option<&[f64]>, tol: f64) -> Option<Vec<f64>> {
    let m = a.len();
    assert_eq!(m, b.len());
    let n = a.first().map_or(0, |row| row.len());
    let bounded: Vec<usize> = match upper {
        Some(u) => (0..n).filter(|&j| u[j].is_finite()).collect(),
        None => Vec::new(),
    };

    // Columns: originals | upper-bound slacks | artificials | rhs.
    let n_slack = bounded.len();
    let n_cols = n + n_slack + m;
    let rhs = n_cols;
    let rows = m + n_slack;
    let mut t = vec![vec![0.0; n_cols + 1]; rows];
    let mut basis = vec![0usize; rows];

    for i in 0..m {
        let flip = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i][j] = flip * a[i][j];
        }
        t[i][n + n_slack + i] = 1.0;
        t[i][rhs] = flip * b[i];
        basis[i] = n + n_slack + i;
    }
    for (k, &j) in bounded.iter().enumerate() {
        let row = m + k;
        let u = upper.unwrap()[j];
        if u < 0.0 {
            return None;
        }
        t[row][j] = 1.0;
        t[row][n + k] = 1.0;
        t[row][rhs] = u;
        basis[row] = n + k;
    }

    let is_artificial = |j: usize| j >= n + n_slack;
    let max_iter = 50 * (rows + n_cols) + 1000;
    for _ in 0..max_iter {
        // Reduced cost of column j for the objective sum(artificials).
        let entering = (0..n + n_slack).find(|&j| {
            if basis.contains(&j) {
                return false;
            }
            let d: f64 = (0..rows)
                .filter(|&i| is_artificial(basis[i]))
                .map(|i| -t[i][j])
                .sum();
            d < -PIVOT_EPS
        });
        let Some(col) = entering else { break };

        let mut leave: Option<(usize, f64)> = None;
        for i in 0..rows {
            if t[i][col] > PIVOT_EPS {
                let ratio = t[i][rhs] / t[i][col];
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr - 1e-15 || (ratio <= lr + 1e-15 && basis[i] < basis[li]) {
                            Some((i, ratio))
                        } else {
                            Some((li, lr))
                        }
                    }
                };
            }
        }
        // A negative reduced cost with no blocking row cannot occur for a
        // bounded-below phase-one objective.
        let (row, _) = leave?;
        pivot(&mut t, row, col);
        basis[row] = col;
    }

    let infeasibility: f64 = (0..rows)
        .filter(|&i| is_artificial(basis[i]))
        .map(|i| t[i][rhs].abs())
        .sum();
    if infeasibility > tol {
        return None;
    }

    let mut x = vec![0.0; n];
    for i in 0..rows {
        if basis[i] < n {
            x[basis[i]] = t[i][rhs].max(0.0);
        }
    }
    if let Some(u) = upper {
        for (xj, &uj) in x.iter_mut().zip(u) {
            *xj = xj.min(uj);
        }
    }
    Some(x)
}

fn pivot(t: &mut [Vec<f64>], row: usize, col: usize) {
    let p = t[row][col];
    for v in t[row].iter_mut() {
        *v /= p;
    }
    let pivot_row = t[row].clone();
    for (i, r) in t.iter_mut().enumerate() {
        if i == row {
            continue;
        }
        let f = r[col];
        if f != 0.0 {
            for (v, pv) in r.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
        }
    }
}

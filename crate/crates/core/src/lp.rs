//! Dense simplex solver for the equilibrium linear program of a matrix game.

use crate::error::{Error, Result};
use crate::matrix::Square;

const PIVOT_EPS: f64 = 1e-12;

/// Solves `max 1'w  s.t.  A w <= 1, w >= 0` for an entrywise positive `A`,
/// returning `w`. The feasible set is bounded because `A > 0`.
///
/// Uses a full tableau with Bland's rule, which cannot cycle.
pub fn solve_packing_lp(a: &Square<f64>) -> Result<Vec<f64>> {
    let m = a.dim();
    let cols = 2 * m + 1;
    let rhs = 2 * m;
    // Row-major tableau: m constraint rows then the objective row.
    let mut t = vec![0.0; (m + 1) * cols];
    for i in 0..m {
        for j in 0..m {
            t[i * cols + j] = a[(i, j)];
        }
        t[i * cols + m + i] = 1.0;
        t[i * cols + rhs] = 1.0;
    }
    for j in 0..m {
        t[m * cols + j] = -1.0;
    }
    let mut basis: Vec<usize> = (m..2 * m).collect();
    let cap = 200 * (m + 10);

    for _ in 0..cap {
        let obj = &t[m * cols..];
        let Some(enter) = (0..2 * m).find(|&j| obj[j] < -PIVOT_EPS) else {
            let mut w = vec![0.0; m];
            for (i, &b) in basis.iter().enumerate() {
                if b < m {
                    w[b] = t[i * cols + rhs].max(0.0);
                }
            }
            return Ok(w);
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let coef = t[i * cols + enter];
            if coef > PIVOT_EPS {
                let ratio = t[i * cols + rhs] / coef;
                let better = match leave {
                    None => true,
                    Some((l, best)) => ratio < best - 1e-15 || (ratio <= best + 1e-15 && basis[i] < basis[l]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((row, _)) = leave else {
            return Err(Error::NonConvergence { solver: "simplex", iterations: 0, residual: f64::INFINITY, best: None });
        };
        let piv = t[row * cols + enter];
        for v in &mut t[row * cols..(row + 1) * cols] {
            *v /= piv;
        }
        let pivot_row: Vec<f64> = t[row * cols..(row + 1) * cols].to_vec();
        for i in 0..=m {
            if i == row {
                continue;
            }
            let f = t[i * cols + enter];
            if f != 0.0 {
                for (v, p) in t[i * cols..(i + 1) * cols].iter_mut().zip(&pivot_row) {
                    *v -= f * p;
                }
                t[i * cols + enter] = 0.0;
            }
        }
        basis[row] = enter;
    }
    Err(Error::NonConvergence { solver: "simplex", iterations: cap, residual: f64::NAN, best: None })
}

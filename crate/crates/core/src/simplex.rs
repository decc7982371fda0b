//! Phase-1 dense simplex for equality-constrained nonnegative feasibility.
//!
//! Finds `x >= 0` with `A x = b` by minimizing the sum of artificial
//! variables over the standard phase-1 tableau. Entering and leaving
//! variables follow Bland's rule (smallest eligible index), which rules
//! out cycling and keeps the result deterministic. Problem sizes here are
//! tiny — a handful of moment constraints over at most a few dozen
//! columns — so a dense tableau is the simplest correct choice.

use crate::error::{Error, Result};

const ENTER_EPS: f64 = 1e-12;
const PIVOT_EPS: f64 = 1e-11;
const FEAS_TOL: f64 = 1e-10;
const MAX_PIVOTS: usize = 100_000;

/// Solves `columns * x = rhs`, `x >= 0`, where `columns[j]` is the `j`-th
/// column of the constraint matrix. Returns the feasible point found, or
/// [`Error::LpInfeasible`] when the phase-1 optimum stays positive.
pub fn nonnegative_solve(columns: &[Vec<f64>], rhs: &[f64]) -> Result<Vec<f64>> {
    let m = rhs.len();
    let n = columns.len();
    if columns.iter().any(|col| col.len() != m) {
        return Err(Error::DimensionMismatch(
            "constraint columns and right-hand side disagree".into(),
        ));
    }

    // Tableau rows: [original columns | artificial columns | rhs], with the
    // right-hand side made nonnegative row by row.
    let width = n + m + 1;
    let mut t = vec![vec![0.0f64; width]; m];
    for (i, row) in t.iter_mut().enumerate() {
        let flip = if rhs[i] < 0.0 { -1.0 } else { 1.0 };
        for (j, col) in columns.iter().enumerate() {
            row[j] = flip * col[i];
        }
        row[n + i] = 1.0;
        row[width - 1] = flip * rhs[i];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    // Phase-1 reduced costs: cost 1 on artificials, 0 elsewhere, priced out
    // against the all-artificial starting basis.
    let mut obj = vec![0.0f64; width];
    for row in &t {
        for (o, v) in obj.iter_mut().zip(row) {
            *o -= v;
        }
    }
    obj[n..n + m].fill(0.0);

    for _ in 0..MAX_PIVOTS {
        // Bland: smallest-index column with a negative reduced cost.
        let Some(enter) = (0..n + m).find(|&j| obj[j] < -ENTER_EPS) else {
            break;
        };
        // Ratio test; ties broken by the smallest basis variable index.
        let mut leave: Option<usize> = None;
        let mut best_ratio = f64::INFINITY;
        for (i, row) in t.iter().enumerate() {
            if row[enter] > PIVOT_EPS {
                let ratio = row[width - 1] / row[enter];
                let better = match leave {
                    None => true,
                    Some(l) => {
                        ratio < best_ratio - 1e-15
                            || (ratio <= best_ratio + 1e-15 && basis[i] < basis[l])
                    }
                };
                if better {
                    best_ratio = ratio;
                    leave = Some(i);
                }
            }
        }
        let Some(leave) = leave else {
            // Unbounded phase-1 objective cannot occur (it is bounded below
            // by zero); reaching this means the tableau degenerated.
            return Err(Error::Internal("simplex ratio test found no pivot".into()));
        };

        let pivot = t[leave][enter];
        for v in t[leave].iter_mut() {
            *v /= pivot;
        }
        for i in 0..m {
            if i != leave && t[i][enter].abs() > 0.0 {
                let factor = t[i][enter];
                let (pivot_row, row) = if i < leave {
                    let (a, b) = t.split_at_mut(leave);
                    (&b[0], &mut a[i])
                } else {
                    let (a, b) = t.split_at_mut(i);
                    (&a[leave], &mut b[0])
                };
                for (v, p) in row.iter_mut().zip(pivot_row) {
                    *v -= factor * p;
                }
            }
        }
        let factor = obj[enter];
        if factor.abs() > 0.0 {
            for (o, p) in obj.iter_mut().zip(&t[leave]) {
                *o -= factor * p;
            }
        }
        basis[leave] = enter;
    }

    // Phase-1 optimum: sum of artificial values still in the solution.
    let objective: f64 = (0..m)
        .filter(|&i| basis[i] >= n)
        .map(|i| t[i][width - 1])
        .sum();
    if objective > FEAS_TOL {
        return Err(Error::LpInfeasible { objective });
    }

    let mut x = vec![0.0f64; n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            // Degenerate pivots can leave a basic value at -1e-16; clamp.
            x[b] = t[i][width - 1].max(0.0);
        }
    }
    Ok(x)
}

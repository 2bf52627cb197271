//! Brute-force solver for `min ⟨c, x⟩ s.t. Ax = b, x ≥ 0`: enumerate every
//! column subset, keep those with full column rank whose least-squares
//! solution is an exact nonnegative solution, and take the best vertex.

use nalgebra::{DMatrix, DVector};

const EPS: f64 = 1e-9;

/// Best objective value over all basic feasible solutions, `None` when there
/// is none (the program is infeasible).
pub fn best_vertex(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Option<f64> {
    let n = c.len();
    let m = b.len();
    let bnorm = b.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << n) {
        let cols: Vec<usize> = (0..n).filter(|j| mask >> j & 1 == 1).collect();
        if cols.len() > m {
            continue;
        }
        let x = if cols.is_empty() {
            if bnorm > EPS {
                continue;
            }
            Vec::new()
        } else {
            let sub = DMatrix::from_fn(m, cols.len(), |i, k| a[i][cols[k]]);
            let svd = sub.clone().svd(true, true);
            let smax = svd.singular_values.max();
            if svd.singular_values.min() <= 1e-10 * smax.max(1.0) {
                continue;
            }
            let rhs = DVector::from_column_slice(b);
            let Ok(sol) = svd.solve(&rhs, 1e-14) else {
                continue;
            };
            let resid = (&sub * &sol - &rhs).amax();
            if resid > EPS * (1.0 + bnorm) || sol.iter().any(|v| *v < -EPS) {
                continue;
            }
            sol.iter().copied().collect()
        };
        let value: f64 = cols.iter().zip(&x).map(|(j, v)| c[*j] * v.max(0.0)).sum();
        best = Some(best.map_or(value, |b: f64| b.min(value)));
    }
    best
}

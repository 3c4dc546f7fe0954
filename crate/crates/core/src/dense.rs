//! Small dense solves for fixed-size systems.

use crate::error::{Error, Result};

/// Solves `m x = rhs` by Gaussian elimination with partial pivoting.
pub(crate) fn solve<const K: usize>(mut m: [[f64; K]; K], mut rhs: [f64; K]) -> Result<[f64; K]> {
    for col in 0..K {
        let pivot = (col..K)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .expect("non-empty range");
        if m[pivot][col].abs() < 1e-300 {
            return Err(Error::no_convergence("dense solve", "singular matrix"));
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        let pivot_row = m[col];
        for r in col + 1..K {
            let f = m[r][col] / pivot_row[col];
            for (x, p) in m[r][col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= f * p;
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut x = [0.0; K];
    for i in (0..K).rev() {
        let tail: f64 = (i + 1..K).map(|j| m[i][j] * x[j]).sum();
        x[i] = (rhs[i] - tail) / m[i][i];
    }
    Ok(x)
}

/// Normal-equation least squares for a handful of well-scaled columns.
pub(crate) fn least_squares<const K: usize>(rows: &[[f64; K]], y: &[f64]) -> Result<[f64; K]> {
    let mut m = [[0.0; K]; K];
    let mut rhs = [0.0; K];
    for (row, &yi) in rows.iter().zip(y) {
        for i in 0..K {
            rhs[i] += row[i] * yi;
            for j in 0..K {
                m[i][j] += row[i] * row[j];
            }
        }
    }
    solve(m, rhs)
}

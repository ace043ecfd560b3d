//! Dense Gauss-Jordan elimination, kept separate from the solver crate's
//! sparse routines so oracle answers do not share code with the system under
//! test.

use lexmdp_core::Number;

/// Solves `a·x = b` for square `a`. Returns `None` if `a` is singular.
pub fn solve<N: Number>(mut a: Vec<Vec<N>>, mut b: Vec<N>) -> Option<Vec<N>> {
    let n = b.len();
    debug_assert!(a.len() == n && a.iter().all(|row| row.len() == n));
    for col in 0..n {
        let pivot = (col..n)
            .filter(|&r| !a[r][col].is_zero())
            .max_by(|&x, &y| a[x][col].magnitude().total_cmp(&a[y][col].magnitude()))?;
        if N::MODE == lexmdp_core::NumericMode::Float && a[pivot][col].magnitude() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = N::one() / a[col][col].clone();
        for j in col..n {
            a[col][j] = a[col][j].clone() * inv.clone();
        }
        b[col] = b[col].clone() * inv;
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for j in col..n {
                let delta = factor.clone() * a[col][j].clone();
                a[r][j] = a[r][j].clone() - delta;
            }
            b[r] = b[r].clone() - factor * b[col].clone();
        }
    }
    Some(b)
}

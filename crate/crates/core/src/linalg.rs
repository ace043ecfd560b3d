//! Sparse Gaussian elimination over any [`Number`].
//!
//! Exact mode pivots on the sparsest eligible row to limit fill-in (any
//! nonzero pivot is exact); float mode uses partial pivoting by magnitude.

use crate::error::SolveError;
use crate::number::{Number, NumericMode};

type SparseRow<N> = Vec<(usize, N)>;

/// `A·x = b` with `A` stored row-wise and sparse.
#[derive(Clone, Debug)]
pub struct LinearSystem<N> {
    rows: Vec<SparseRow<N>>,
    rhs: Vec<N>,
}

impl<N: Number> LinearSystem<N> {
    pub fn new(n: usize) -> Self {
        LinearSystem {
            rows: vec![Vec::new(); n],
            rhs: vec![N::zero(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// `A[i][j] += v`.
    pub fn add(&mut self, i: usize, j: usize, v: N) {
        if v.is_zero() {
            return;
        }
        let row = &mut self.rows[i];
        match row.binary_search_by_key(&j, |(c, _)| *c) {
            Ok(k) => {
                let sum = row[k].1.clone() + v;
                if sum.is_zero() {
                    row.remove(k);
                } else {
                    row[k].1 = sum;
                }
            }
            Err(k) => row.insert(k, (j, v)),
        }
    }

    /// `b[i] += v`.
    pub fn add_rhs(&mut self, i: usize, v: N) {
        self.rhs[i] = self.rhs[i].clone() + v;
    }

    pub fn solve(mut self) -> Result<Vec<N>, SolveError> {
        let n = self.rows.len();
        // pivot_of[k] = row index used to eliminate column k
        let mut pivot_of = vec![usize::MAX; n];
        let mut used = vec![false; n];
        for k in 0..n {
            let mut best: Option<usize> = None;
            for i in 0..n {
                if used[i] || self.rows[i].first().map(|(c, _)| *c) != Some(k) {
                    continue;
                }
                best = match best {
                    None => Some(i),
                    Some(b) => Some(if better_pivot(&self.rows[i], &self.rows[b]) { i } else { b }),
                };
            }
            let p = best.ok_or(SolveError::Singular)?;
            used[p] = true;
            pivot_of[k] = p;
            let pivot_row = std::mem::take(&mut self.rows[p]);
            let pivot_rhs = self.rhs[p].clone();
            let pivot_val = pivot_row[0].1.clone();
            for i in 0..n {
                if used[i] {
                    continue;
                }
                let lead = match self.rows[i].first() {
                    Some((c, v)) if *c == k => v.clone(),
                    _ => continue,
                };
                let factor = lead / pivot_val.clone();
                let row = std::mem::take(&mut self.rows[i]);
                self.rows[i] = sub_scaled(&row, &factor, &pivot_row);
                self.rhs[i] = self.rhs[i].clone() - factor * pivot_rhs.clone();
            }
            self.rows[p] = pivot_row;
        }
        let mut x = vec![N::zero(); n];
        for k in (0..n).rev() {
            let p = pivot_of[k];
            let row = &self.rows[p];
            let mut acc = self.rhs[p].clone();
            for (c, v) in &row[1..] {
                acc = acc - v.clone() * x[*c].clone();
            }
            x[k] = acc / row[0].1.clone();
        }
        Ok(x)
    }
}

fn better_pivot<N: Number>(candidate: &SparseRow<N>, incumbent: &SparseRow<N>) -> bool {
    match N::MODE {
        NumericMode::Exact => candidate.len() < incumbent.len(),
        NumericMode::Float => candidate[0].1.magnitude() > incumbent[0].1.magnitude(),
    }
}

/// `row - factor·pivot`, dropping the eliminated leading column.
fn sub_scaled<N: Number>(row: &SparseRow<N>, factor: &N, pivot: &SparseRow<N>) -> SparseRow<N> {
    let mut out = Vec::with_capacity(row.len() + pivot.len());
    let (mut i, mut j) = (1, 1);
    while i < row.len() || j < pivot.len() {
        let ci = row.get(i).map(|(c, _)| *c).unwrap_or(usize::MAX);
        let cj = pivot.get(j).map(|(c, _)| *c).unwrap_or(usize::MAX);
        if ci < cj {
            out.push(row[i].clone());
            i += 1;
        } else if cj < ci {
            out.push((cj, -(factor.clone() * pivot[j].1.clone())));
            j += 1;
        } else {
            let v = row[i].1.clone() - factor.clone() * pivot[j].1.clone();
            if !v.is_zero() {
                out.push((ci, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Convenience wrapper for dense input.
pub fn solve_dense<N: Number>(a: &[Vec<N>], b: &[N]) -> Result<Vec<N>, SolveError> {
    let mut sys = LinearSystem::new(b.len());
    for (i, row) in a.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            sys.add(i, j, v.clone());
        }
        sys.add_rhs(i, b[i].clone());
    }
    sys.solve()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number::Rational;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn solves_small_exact_system() {
        // x = 0.9x + 0.1  =>  0.1x = 0.1
        let x = solve_dense(&[vec![q(1, 10)]], &[q(1, 10)]).unwrap();
        assert_eq!(x, vec![q(1, 1)]);
        // 2x + y = 3, x + 3y = 5  => x = 4/5, y = 7/5
        let x = solve_dense(&[vec![q(2, 1), q(1, 1)], vec![q(1, 1), q(3, 1)]], &[q(3, 1), q(5, 1)]).unwrap();
        assert_eq!(x, vec![q(4, 5), q(7, 5)]);
    }

    #[test]
    fn needs_row_exchange() {
        let x = solve_dense(&[vec![q(0, 1), q(1, 1)], vec![q(1, 1), q(0, 1)]], &[q(2, 1), q(3, 1)]).unwrap();
        assert_eq!(x, vec![q(3, 1), q(2, 1)]);
    }

    #[test]
    fn singular_is_reported() {
        let r = solve_dense(&[vec![q(1, 1), q(1, 1)], vec![q(2, 1), q(2, 1)]], &[q(1, 1), q(2, 1)]);
        assert_eq!(r, Err(SolveError::Singular));
    }

    #[test]
    fn float_mode_partial_pivoting() {
        let x = solve_dense(&[vec![1e-20, 1.0], vec![1.0, 1.0]], &[1.0, 2.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn exact_solution_satisfies_system(
            entries in proptest::collection::vec(-5i64..=5, 16),
            rhs in proptest::collection::vec(-5i64..=5, 4),
        ) {
            let a: Vec<Vec<Rational>> = (0..4)
                .map(|i| (0..4).map(|j| q(entries[i * 4 + j] + if i == j { 20 } else { 0 }, 1)).collect())
                .collect();
            let b: Vec<Rational> = rhs.iter().map(|v| q(*v, 1)).collect();
            let x = solve_dense(&a, &b).unwrap();
            for i in 0..4 {
                let lhs = (0..4).fold(q(0, 1), |acc, j| acc + a[i][j].clone() * x[j].clone());
                prop_assert_eq!(lhs, b[i].clone());
            }
        }
    }
}

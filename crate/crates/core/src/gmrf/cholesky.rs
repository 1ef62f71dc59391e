//! Envelope (profile) Cholesky factorization for symmetric positive-definite
//! sparse matrices.
//!
//! Each row of the factor is stored densely from its first structurally
//! non-zero column to the diagonal. Fill-in never leaves that envelope, so a
//! good ordering (banded blocks first, dense coupling rows last) keeps the
//! factor linear in the number of variables for the precision matrices built
//! in this crate.

use super::SparsePrecision;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    n: usize,
    first: Vec<usize>,
    offset: Vec<usize>,
    values: Vec<f64>,
    /// position -> original index
    perm: Vec<usize>,
    /// original index -> position
    inv: Vec<usize>,
}

impl CholeskyFactor {
    /// Factor in the natural variable order.
    pub fn new(q: &SparsePrecision) -> Result<Self> {
        let perm: Vec<usize> = (0..q.dim()).collect();
        Self::with_ordering(q, &perm)
    }

    /// Factor `P Q Pᵀ`, where `ordering[k]` is the original index placed at
    /// position `k`.
    pub fn with_ordering(q: &SparsePrecision, ordering: &[usize]) -> Result<Self> {
        let n = q.dim();
        if ordering.len() != n {
            return Err(Error::Dimension(format!(
                "ordering has {} entries for a {n}x{n} matrix",
                ordering.len()
            )));
        }
        let mut inv = vec![usize::MAX; n];
        for (pos, &orig) in ordering.iter().enumerate() {
            if orig >= n || inv[orig] != usize::MAX {
                return Err(Error::Dimension("ordering is not a permutation".into()));
            }
            inv[orig] = pos;
        }

        let mut first: Vec<usize> = (0..n).collect();
        for &(r, c, _) in q.entries() {
            let (i, j) = order_pair(inv[r], inv[c]);
            first[i] = first[i].min(j);
        }
        let mut offset = Vec::with_capacity(n + 1);
        let mut total = 0usize;
        for i in 0..n {
            offset.push(total);
            total += i - first[i] + 1;
        }
        offset.push(total);
        let mut values = vec![0.0; total];
        for &(r, c, v) in q.entries() {
            let (i, j) = order_pair(inv[r], inv[c]);
            values[offset[i] + j - first[i]] += v;
        }

        for i in 0..n {
            let fi = first[i];
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let mut s = values[offset[i] + j - fi];
                if k0 < j {
                    let ri = &values[offset[i] + k0 - fi..offset[i] + j - fi];
                    let rj = &values[offset[j] + k0 - fj..offset[j] + j - fj];
                    s -= dot(ri, rj);
                }
                let djj = values[offset[j] + j - fj];
                values[offset[i] + j - fi] = s / djj;
            }
            let row = &values[offset[i]..offset[i] + i - fi];
            let d = values[offset[i] + i - fi] - dot(row, row);
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::NotPositiveDefinite {
                    index: ordering[i],
                    pivot: d,
                });
            }
            values[offset[i] + i - fi] = d.sqrt();
        }

        Ok(Self {
            n,
            first,
            offset,
            values,
            perm: ordering.to_vec(),
            inv,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of stored factor entries (envelope size).
    pub fn stored(&self) -> usize {
        self.values.len()
    }

    #[inline]
    fn diag(&self, i: usize) -> f64 {
        self.values[self.offset[i] + i - self.first[i]]
    }

    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.n).map(|i| self.diag(i).ln()).sum::<f64>()
    }

    /// Solve `Q x = b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::Dimension(format!(
                "right-hand side has length {} for dimension {}",
                b.len(),
                self.n
            )));
        }
        let mut y: Vec<f64> = self.perm.iter().map(|&orig| b[orig]).collect();
        self.solve_permuted_in_place(&mut y);
        let mut x = vec![0.0; self.n];
        for (pos, v) in y.into_iter().enumerate() {
            x[self.perm[pos]] = v;
        }
        Ok(x)
    }

    fn solve_permuted_in_place(&self, y: &mut [f64]) {
        for i in 0..self.n {
            let fi = self.first[i];
            let row = &self.values[self.offset[i]..self.offset[i] + i - fi];
            let s = y[i] - dot(row, &y[fi..i]);
            y[i] = s / self.diag(i);
        }
        for i in (0..self.n).rev() {
            let fi = self.first[i];
            y[i] /= self.diag(i);
            let xi = y[i];
            if xi != 0.0 {
                let row = &self.values[self.offset[i]..self.offset[i] + i - fi];
                for (yk, lik) in y[fi..i].iter_mut().zip(row) {
                    *yk -= lik * xi;
                }
            }
        }
    }

    /// Column `index` of `Q⁻¹`, in original variable order.
    pub fn inverse_column(&self, index: usize) -> Result<Vec<f64>> {
        if index >= self.n {
            return Err(Error::Dimension(format!(
                "column {index} out of range for dimension {}",
                self.n
            )));
        }
        let mut e = vec![0.0; self.n];
        e[index] = 1.0;
        self.solve(&e)
    }

    /// Position of an original index in the factor ordering.
    pub fn position(&self, index: usize) -> usize {
        self.inv[index]
    }
}

#[inline]
fn order_pair(a: usize, b: usize) -> (usize, usize) {
    if a >= b {
        (a, b)
    } else {
        (b, a)
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gmrf::VarId;

    fn dense_to_sparse(a: &[Vec<f64>]) -> SparsePrecision {
        let n = a.len();
        let mut entries = Vec::new();
        for i in 0..n {
            for j in 0..=i {
                if a[i][j] != 0.0 {
                    entries.push((i, j, a[i][j]));
                }
            }
        }
        SparsePrecision::from_entries(n, entries, (0..n).map(VarId::Other).collect()).unwrap()
    }

    #[test]
    fn two_by_two_inverse() {
        let q = dense_to_sparse(&[vec![2.0, -1.0], vec![-1.0, 2.0]]);
        let f = CholeskyFactor::new(&q).unwrap();
        let col = f.inverse_column(0).unwrap();
        assert!((col[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((col[1] - 1.0 / 3.0).abs() < 1e-15);
        assert!((f.log_det() - 3.0f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn ordering_does_not_change_solution() {
        // arrow matrix: dense last row
        let n = 6;
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            a[i][i] = 4.0 + i as f64;
            if i + 1 < n {
                a[i][n - 1] = 0.5;
                a[n - 1][i] = 0.5;
            }
        }
        a[0][1] = -1.0;
        a[1][0] = -1.0;
        let q = dense_to_sparse(&a);
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let natural = CholeskyFactor::new(&q).unwrap();
        let reversed: Vec<usize> = (0..n).rev().collect();
        let other = CholeskyFactor::with_ordering(&q, &reversed).unwrap();
        let x1 = natural.solve(&b).unwrap();
        let x2 = other.solve(&b).unwrap();
        for i in 0..n {
            assert!((x1[i] - x2[i]).abs() < 1e-13);
            let r: f64 = (0..n).map(|j| a[i][j] * x1[j]).sum::<f64>() - b[i];
            assert!(r.abs() < 1e-13);
        }
        assert!((natural.log_det() - other.log_det()).abs() < 1e-12);
        // arrow at the end keeps the envelope linear; at the front it fills in
        assert!(natural.stored() < other.stored());
    }

    #[test]
    fn indefinite_matrix_is_reported() {
        let q = dense_to_sparse(&[vec![1.0, 2.0], vec![2.0, 1.0]]);
        match CholeskyFactor::new(&q) {
            Err(Error::NotPositiveDefinite { index, pivot }) => {
                assert_eq!(index, 1);
                assert!(pivot < 0.0);
            }
            other => panic!("expected failure, got {other:?}"),
        }
    }
}

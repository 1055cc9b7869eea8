//! Compressed sparse row matrices used for discrete operators and quadratic forms.

use crate::error::{Error, Result};
use crate::num::Real;
use nalgebra::DMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix<T> {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Real> SparseMatrix<T> {
    /// Builds a matrix from `(row, col, value)` triplets; duplicates are summed and
    /// exact zeros are dropped.
    pub fn from_triplets(nrows: usize, ncols: usize, mut triplets: Vec<(usize, usize, T)>) -> Self {
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<T> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) outside {nrows}x{ncols}");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        let mut m = SparseMatrix { nrows, ncols, row_ptr, col_idx, values };
        m.prune();
        m
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        SparseMatrix { nrows, ncols, row_ptr: vec![0; nrows + 1], col_idx: vec![], values: vec![] }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![T::one(); n])
    }

    pub fn diagonal(d: &[T]) -> Self {
        let n = d.len();
        SparseMatrix { nrows: n, ncols: n, row_ptr: (0..=n).collect(), col_idx: (0..n).collect(), values: d.to_vec() }
    }

    fn prune(&mut self) {
        let mut row_ptr = vec![0usize; self.nrows + 1];
        let mut col_idx = Vec::with_capacity(self.col_idx.len());
        let mut values = Vec::with_capacity(self.values.len());
        for r in 0..self.nrows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.values[k] != T::zero() {
                    col_idx.push(self.col_idx[k]);
                    values.push(self.values[k]);
                }
            }
            row_ptr[r + 1] = col_idx.len();
        }
        self.row_ptr = row_ptr;
        self.col_idx = col_idx;
        self.values = values;
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Iterates over `(col, value)` pairs of one row.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (self.col_idx[k], self.values[k]))
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.nrows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        self.row(r).find(|&(cc, _)| cc == c).map_or(T::zero(), |(_, v)| v)
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.ncols, "vector length");
        (0..self.nrows).map(|r| self.row(r).fold(T::zero(), |acc, (c, v)| acc + v * x[c])).collect()
    }

    /// `y += self^T x`
    pub fn mul_transpose_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.nrows, "vector length");
        let mut y = vec![T::zero(); self.ncols];
        for (r, &xr) in x.iter().enumerate() {
            if xr != T::zero() {
                for (c, v) in self.row(r) {
                    y[c] += v * xr;
                }
            }
        }
        y
    }

    pub fn transpose(&self) -> Self {
        let t = self.triplets().map(|(r, c, v)| (c, r, v)).collect();
        Self::from_triplets(self.ncols, self.nrows, t)
    }

    pub fn scale(&self, s: T) -> Self {
        let mut m = self.clone();
        m.values.iter_mut().for_each(|v| *v *= s);
        m.prune();
        m
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(Error::DimensionMismatch { expected: self.nrows, found: other.nrows });
        }
        let t = self.triplets().chain(other.triplets()).collect();
        Ok(Self::from_triplets(self.nrows, self.ncols, t))
    }

    /// Sparse product `self * rhs`.
    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.ncols != rhs.nrows {
            return Err(Error::DimensionMismatch { expected: self.ncols, found: rhs.nrows });
        }
        let mut t = Vec::new();
        for r in 0..self.nrows {
            for (k, a) in self.row(r) {
                for (c, b) in rhs.row(k) {
                    t.push((r, c, a * b));
                }
            }
        }
        Ok(Self::from_triplets(self.nrows, rhs.ncols, t))
    }

    /// Weighted Gram matrix `self^T diag(w) self`.
    pub fn gram(&self, weights: &[T]) -> Self {
        assert_eq!(weights.len(), self.nrows, "one weight per row");
        let mut t = Vec::new();
        for (r, &w) in weights.iter().enumerate() {
            if w == T::zero() {
                continue;
            }
            let row: Vec<(usize, T)> = self.row(r).collect();
            for &(i, a) in &row {
                for &(j, b) in &row {
                    t.push((i, j, w * a * b));
                }
            }
        }
        Self::from_triplets(self.ncols, self.ncols, t)
    }

    /// Keeps the listed rows and columns, in the given order.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut col_map = vec![usize::MAX; self.ncols];
        for (new, &old) in cols.iter().enumerate() {
            col_map[old] = new;
        }
        let mut t = Vec::new();
        for (new_r, &r) in rows.iter().enumerate() {
            for (c, v) in self.row(r) {
                if col_map[c] != usize::MAX {
                    t.push((new_r, col_map[c], v));
                }
            }
        }
        Self::from_triplets(rows.len(), cols.len(), t)
    }

    /// Keeps only the listed rows.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let t = rows.iter().enumerate().flat_map(|(new_r, &r)| self.row(r).map(move |(c, v)| (new_r, c, v))).collect();
        Self::from_triplets(rows.len(), self.ncols, t)
    }

    /// Block-diagonal replication: `blocks` copies of `self` along the diagonal.
    pub fn block_diagonal(&self, blocks: usize) -> Self {
        let mut t = Vec::with_capacity(self.nnz() * blocks);
        for b in 0..blocks {
            for (r, c, v) in self.triplets() {
                t.push((b * self.nrows + r, b * self.ncols + c, v));
            }
        }
        Self::from_triplets(self.nrows * blocks, self.ncols * blocks, t)
    }

    pub fn diagonal_entries(&self) -> Vec<T> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn is_diagonal(&self) -> bool {
        self.triplets().all(|(r, c, _)| r == c)
    }

    /// Largest `|a_ij - a_ji|` relative to the largest entry.
    pub fn asymmetry(&self) -> T {
        let scale = self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        if scale == T::zero() {
            return T::zero();
        }
        let mut worst = T::zero();
        for (r, c, v) in self.triplets() {
            worst = worst.max((v - self.get(c, r)).abs());
        }
        worst / scale
    }

    pub fn to_dense(&self) -> DMatrix<T> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for (r, c, v) in self.triplets() {
            m[(r, c)] += v;
        }
        m
    }

    /// Max absolute row sum.
    pub fn norm_inf(&self) -> T {
        (0..self.nrows)
            .map(|r| self.row(r).fold(T::zero(), |acc, (_, v)| acc + v.abs()))
            .fold(T::zero(), |a, b| a.max(b))
    }

    /// Column adjacency pattern (for bandwidth reduction).
    pub(crate) fn pattern(&self) -> Vec<Vec<usize>> {
        (0..self.nrows).map(|r| self.row(r).map(|(c, _)| c).collect()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_duplicates() {
        let m = SparseMatrix::from_triplets(2, 2, vec![(0, 0, 1.0), (0, 0, 2.0), (1, 0, -1.0), (1, 1, 0.0)]);
        assert_eq!(m.get(0, 0), 3.0);
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.mul_vec(&[1.0, 5.0]), vec![3.0, -1.0]);
    }

    #[test]
    fn gram_matches_dense() {
        let l = SparseMatrix::from_triplets(3, 2, vec![(0, 0, 1.0), (0, 1, -1.0), (1, 1, 2.0), (2, 0, 3.0)]);
        let w = [0.5, 2.0, 1.0];
        let g = l.gram(&w).to_dense();
        let ld = l.to_dense();
        let wd = DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&w));
        let expect = ld.transpose() * wd * ld;
        assert!((g - expect).abs().max() < 1e-14);
    }

    #[test]
    fn matmul_and_transpose() {
        let a = SparseMatrix::from_triplets(2, 3, vec![(0, 0, 1.0), (0, 2, 2.0), (1, 1, 3.0)]);
        let b = a.transpose();
        let p = a.matmul(&b).unwrap().to_dense();
        let expect = a.to_dense() * a.to_dense().transpose();
        assert!((p - expect).abs().max() < 1e-14);
        assert_eq!(a.mul_transpose_vec(&[1.0, 1.0]), vec![1.0, 3.0, 2.0]);
    }

    #[test]
    fn submatrix_keeps_order() {
        let a = SparseMatrix::from_triplets(3, 3, vec![(0, 0, 1.0), (1, 1, 2.0), (2, 2, 3.0), (0, 2, 4.0)]);
        let s = a.submatrix(&[2, 0], &[2, 0]);
        assert_eq!(s.get(0, 0), 3.0);
        assert_eq!(s.get(1, 0), 4.0);
        assert_eq!(s.get(1, 1), 1.0);
    }
}

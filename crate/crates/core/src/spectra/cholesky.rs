//! Envelope (profile) Cholesky factorization under a reverse Cuthill-McKee ordering.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::num::Real;
use crate::sparse::SparseMatrix;

/// Reverse Cuthill-McKee ordering of a symmetric sparsity pattern:
/// `order[new] = old`. Each component starts from a pseudo-peripheral node.
pub fn rcm_ordering<T: Real>(a: &SparseMatrix<T>) -> Vec<usize> {
    let n = a.nrows();
    let adj: Vec<Vec<usize>> =
        a.pattern().into_iter().enumerate().map(|(i, row)| row.into_iter().filter(|&j| j != i).collect()).collect();
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);

    let bfs_levels = |start: usize, mask: &[bool]| -> Vec<usize> {
        let mut level = vec![usize::MAX; n];
        let mut queue = VecDeque::from([start]);
        level[start] = 0;
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if !mask[w] && level[w] == usize::MAX {
                    level[w] = level[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        level
    };

    while order.len() < n {
        let seed = (0..n).filter(|&i| !visited[i]).min_by_key(|&i| degree[i]).unwrap();
        let mut start = seed;
        let mut depth = 0;
        for _ in 0..4 {
            let level = bfs_levels(start, &visited);
            let far =
                (0..n).filter(|&i| level[i] != usize::MAX).max_by_key(|&i| (level[i], usize::MAX - degree[i])).unwrap();
            if level[far] <= depth {
                break;
            }
            depth = level[far];
            start = far;
        }
        let first = order.len();
        visited[start] = true;
        order.push(start);
        let mut head = first;
        while head < order.len() {
            let v = order[head];
            head += 1;
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                visited[w] = true;
                order.push(w);
            }
        }
        order[first..].reverse();
    }
    order
}

/// `P A P^T = L L^T` with `L` stored row-wise over its envelope.
#[derive(Debug, Clone)]
pub struct EnvelopeCholesky<T> {
    perm: Vec<usize>,
    first: Vec<usize>,
    offset: Vec<usize>,
    data: Vec<T>,
}

impl<T: Real> EnvelopeCholesky<T> {
    pub fn factor(a: &SparseMatrix<T>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: a.ncols() });
        }
        let perm = rcm_ordering(a);
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for (r, c, _) in a.triplets() {
            let (i, j) = (inv[r], inv[c]);
            if j < i {
                first[i] = first[i].min(j);
            }
        }
        let mut offset = Vec::with_capacity(n + 1);
        offset.push(0);
        for i in 0..n {
            offset.push(offset[i] + i - first[i] + 1);
        }
        let mut data = vec![T::zero(); offset[n]];
        for (r, c, v) in a.triplets() {
            let (i, j) = (inv[r], inv[c]);
            if j <= i {
                data[offset[i] + j - first[i]] += v;
            }
        }
        for i in 0..n {
            let (fi, oi) = (first[i], offset[i]);
            for j in fi..i {
                let (fj, oj) = (first[j], offset[j]);
                let lo = fi.max(fj);
                let mut s = data[oi + j - fi];
                for k in lo..j {
                    s -= data[oi + k - fi] * data[oj + k - fj];
                }
                data[oi + j - fi] = s / data[oj + j - fj];
            }
            let mut d = data[oi + i - fi];
            for k in fi..i {
                let l = data[oi + k - fi];
                d -= l * l;
            }
            if !(d > T::zero()) {
                return Err(Error::NotPositiveDefinite);
            }
            data[oi + i - fi] = d.sqrt();
        }
        Ok(EnvelopeCholesky { perm, first, offset, data })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Stored entries of the factor.
    pub fn envelope_size(&self) -> usize {
        self.data.len()
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.dim();
        let mut y: Vec<T> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let (fi, oi) = (self.first[i], self.offset[i]);
            let mut s = y[i];
            for k in fi..i {
                s -= self.data[oi + k - fi] * y[k];
            }
            y[i] = s / self.data[oi + i - fi];
        }
        for i in (0..n).rev() {
            let (fi, oi) = (self.first[i], self.offset[i]);
            y[i] /= self.data[oi + i - fi];
            let yi = y[i];
            for k in fi..i {
                y[k] -= self.data[oi + k - fi] * yi;
            }
        }
        let mut x = vec![T::zero(); n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

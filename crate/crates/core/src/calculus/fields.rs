//! Nodal fields: scalars, vectors and packed symmetric tensors.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;

/// One value per node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarField<T> {
    pub values: Vec<T>,
}

/// `dim` components per node, node-major (`values[node * dim + k]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorField<T> {
    pub dim: usize,
    pub values: Vec<T>,
    pub tangential: bool,
}

/// Symmetric `dim x dim` tensor per node, upper triangle packed row by row:
/// `(0,0), (0,1), .., (0,n-1), (1,1), ..`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetricTensorField<T> {
    pub dim: usize,
    pub values: Vec<T>,
}

/// Multi-index `alpha` with order `|alpha| = sum alpha_j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn order(&self) -> usize {
        self.0.iter().sum()
    }

    /// Axes of the first-order factors in ascending order, e.g. `(2,1)` -> `[0,0,1]`.
    pub fn axes(&self) -> Vec<usize> {
        self.0.iter().enumerate().flat_map(|(ax, &k)| std::iter::repeat_n(ax, k)).collect()
    }

    /// All multi-indices in `n` variables with order exactly `m`, lexicographically descending.
    pub fn all_of_order(n: usize, m: usize) -> Vec<MultiIndex> {
        fn rec(n: usize, m: usize, prefix: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
            if prefix.len() + 1 == n {
                prefix.push(m);
                out.push(MultiIndex(prefix.clone()));
                prefix.pop();
                return;
            }
            for k in (0..=m).rev() {
                prefix.push(k);
                rec(n, m - k, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        if n > 0 {
            rec(n, m, &mut Vec::new(), &mut out);
        }
        out
    }
}

pub(crate) fn check_finite<T: Real>(values: &[T]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::Parse(format!("non-finite field value at index {i}"))),
        None => Ok(()),
    }
}

impl<T: Real> ScalarField<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        check_finite(&values)?;
        Ok(ScalarField { values })
    }

    pub fn from_fn(positions: impl Iterator<Item = Vec<T>>, f: impl Fn(&[T]) -> T) -> Self {
        ScalarField { values: positions.map(|x| f(&x)).collect() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("node,value\n");
        for (i, v) in self.values.iter().enumerate() {
            let _ = writeln!(s, "{i},{v:e}");
        }
        s
    }
}

impl<T: Real> VectorField<T> {
    pub fn new(dim: usize, values: Vec<T>, tangential: bool) -> Result<Self> {
        if dim == 0 || values.len() % dim != 0 {
            return Err(Error::DimensionMismatch { expected: dim, found: values.len() });
        }
        check_finite(&values)?;
        Ok(VectorField { dim, values, tangential })
    }

    pub fn zeros(dim: usize, nodes: usize) -> Self {
        VectorField { dim, values: vec![T::zero(); dim * nodes], tangential: false }
    }

    pub fn from_fn(dim: usize, positions: impl Iterator<Item = Vec<T>>, f: impl Fn(&[T]) -> Vec<T>) -> Self {
        let values = positions.flat_map(|x| f(&x)).collect();
        VectorField { dim, values, tangential: false }
    }

    pub fn nodes(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn at(&self, node: usize) -> &[T] {
        &self.values[node * self.dim..(node + 1) * self.dim]
    }

    /// Component `k` as a scalar field.
    pub fn component(&self, k: usize) -> ScalarField<T> {
        ScalarField { values: self.values.iter().skip(k).step_by(self.dim).copied().collect() }
    }

    pub fn from_components(components: &[ScalarField<T>], tangential: bool) -> Self {
        let dim = components.len();
        let nodes = components.first().map_or(0, |c| c.len());
        let values = (0..nodes).flat_map(|i| components.iter().map(move |c| c.values[i])).collect();
        VectorField { dim, values, tangential }
    }

    /// Largest `|<U(x), nu(x)>|` over nodes; `normals` is flat, node-major.
    pub fn normal_defect(&self, normals: &[T]) -> T {
        (0..self.nodes()).fold(T::zero(), |m, i| {
            let nu = &normals[i * self.dim..(i + 1) * self.dim];
            m.max(crate::num::dot(self.at(i), nu).abs())
        })
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("node");
        (1..=self.dim).for_each(|k| {
            let _ = write!(s, ",u{k}");
        });
        s.push('\n');
        for i in 0..self.nodes() {
            let _ = write!(s, "{i}");
            self.at(i).iter().for_each(|v| {
                let _ = write!(s, ",{v:e}");
            });
            s.push('\n');
        }
        s
    }
}

/// Packed position of entry `(j, k)` in an `n x n` symmetric tensor.
pub fn packed_index(n: usize, j: usize, k: usize) -> usize {
    let (a, b) = if j <= k { (j, k) } else { (k, j) };
    a * n - a * (a + 1) / 2 + b
}

/// Entries `(j, k)` with `j <= k` in packed order.
pub fn packed_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|j| (j..n).map(move |k| (j, k))).collect()
}

impl<T: Real> SymmetricTensorField<T> {
    pub fn entries_per_node(dim: usize) -> usize {
        dim * (dim + 1) / 2
    }

    pub fn zeros(dim: usize, nodes: usize) -> Self {
        SymmetricTensorField { dim, values: vec![T::zero(); nodes * Self::entries_per_node(dim)] }
    }

    pub fn nodes(&self) -> usize {
        self.values.len() / Self::entries_per_node(self.dim)
    }

    pub fn get(&self, node: usize, j: usize, k: usize) -> T {
        self.values[node * Self::entries_per_node(self.dim) + packed_index(self.dim, j, k)]
    }

    pub fn set(&mut self, node: usize, j: usize, k: usize, v: T) {
        let e = Self::entries_per_node(self.dim);
        self.values[node * e + packed_index(self.dim, j, k)] = v;
    }

    /// Row-major full matrix at a node.
    pub fn full(&self, node: usize) -> Vec<T> {
        let n = self.dim;
        (0..n * n).map(|i| self.get(node, i / n, i % n)).collect()
    }

    /// Packs full matrices, symmetrising `(M + M^T) / 2`.
    pub fn from_full(dim: usize, matrices: &[Vec<T>]) -> Self {
        let mut t = Self::zeros(dim, matrices.len());
        let half = T::lit(0.5);
        for (i, m) in matrices.iter().enumerate() {
            for (j, k) in packed_pairs(dim) {
                t.set(i, j, k, half * (m[j * dim + k] + m[k * dim + j]));
            }
        }
        t
    }

    /// Root mean square of all `n^2` entries over nodes.
    pub fn rms(&self) -> T {
        let n = self.dim;
        let mut s = T::zero();
        for i in 0..self.nodes() {
            for (j, k) in packed_pairs(n) {
                let v = self.get(i, j, k);
                s += if j == k { v * v } else { T::lit(2.0) * v * v };
            }
        }
        (s / T::from_usize_lossy(self.nodes() * n * n)).sqrt()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("node");
        for (j, k) in packed_pairs(self.dim) {
            let _ = write!(s, ",d{}{}", j + 1, k + 1);
        }
        s.push('\n');
        let e = Self::entries_per_node(self.dim);
        for i in 0..self.nodes() {
            let _ = write!(s, "{i}");
            for v in &self.values[i * e..(i + 1) * e] {
                let _ = write!(s, ",{v:e}");
            }
            s.push('\n');
        }
        s
    }
}

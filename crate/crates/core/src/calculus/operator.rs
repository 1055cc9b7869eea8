//! Discrete derivative operators paired with quadrature weights.

use crate::error::{Error, Result};
use crate::num::Real;
use crate::sparse::SparseMatrix;

/// A stacked linear map `L` with one quadrature weight per output row.
///
/// Every seminorm of the toolkit is `(sum_r w_r |(L x)_r|^p)^(1/p)`; for `p = 2`
/// its square is the quadratic form `x^T L^T W L x`, so forms and norms agree by
/// construction. Rows hold individual components (vector and tensor norms stack
/// component p-th powers); an off-diagonal tensor entry appears once with its
/// weight doubled.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedOperator<T> {
    pub matrix: SparseMatrix<T>,
    pub weights: Vec<T>,
}

impl<T: Real> WeightedOperator<T> {
    pub fn new(matrix: SparseMatrix<T>, weights: Vec<T>) -> Result<Self> {
        if weights.len() != matrix.nrows() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), found: weights.len() });
        }
        Ok(WeightedOperator { matrix, weights })
    }

    /// Identity with nodal weights: the `L_p` norm itself.
    pub fn mass(weights: &[T]) -> Self {
        WeightedOperator { matrix: SparseMatrix::identity(weights.len()), weights: weights.to_vec() }
    }

    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        self.matrix.mul_vec(x)
    }

    /// `sum_r w_r |(L x)_r|^p`.
    pub fn power_sum(&self, x: &[T], p: T) -> T {
        let y = self.apply(x);
        let two = T::lit(2.0);
        y.iter().zip(&self.weights).fold(T::zero(), |acc, (&v, &w)| {
            if w == T::zero() || v == T::zero() {
                acc
            } else if p == two {
                acc + w * v * v
            } else {
                acc + w * v.abs().powf(p)
            }
        })
    }

    pub fn norm(&self, x: &[T], p: T) -> T {
        self.power_sum(x, p).powf(T::one() / p)
    }

    /// Largest `|(L x)_r|` over rows with positive weight.
    pub fn sup(&self, x: &[T]) -> T {
        let y = self.apply(x);
        y.iter().zip(&self.weights).filter(|(_, &w)| w > T::zero()).fold(T::zero(), |m, (&v, _)| m.max(v.abs()))
    }

    /// `L^T W L`.
    pub fn form(&self) -> SparseMatrix<T> {
        self.matrix.gram(&self.weights)
    }

    /// Vertical concatenation of operators on the same space.
    pub fn stack(ops: &[WeightedOperator<T>]) -> Result<Self> {
        let cols = ops.first().map_or(0, |o| o.cols());
        let mut triplets = Vec::new();
        let mut weights = Vec::new();
        let mut offset = 0;
        for op in ops {
            if op.cols() != cols {
                return Err(Error::DimensionMismatch { expected: cols, found: op.cols() });
            }
            triplets.extend(op.matrix.triplets().map(|(r, c, v)| (r + offset, c, v)));
            weights.extend_from_slice(&op.weights);
            offset += op.rows();
        }
        Ok(WeightedOperator { matrix: SparseMatrix::from_triplets(offset, cols, triplets), weights })
    }

    /// `L E`: the same seminorm pulled back through a change of unknowns.
    pub fn compose(&self, right: &SparseMatrix<T>) -> Result<Self> {
        Ok(WeightedOperator { matrix: self.matrix.matmul(right)?, weights: self.weights.clone() })
    }

    pub fn scaled(&self, s: T) -> Self {
        WeightedOperator { matrix: self.matrix.clone(), weights: self.weights.iter().map(|&w| w * s).collect() }
    }

    /// Applies a scalar operator to each of `dim` node-major components:
    /// output row `r * dim + k` acts on input column `c * dim + k`.
    pub fn componentwise(&self, dim: usize) -> Self {
        let triplets =
            self.matrix.triplets().flat_map(|(r, c, v)| (0..dim).map(move |k| (r * dim + k, c * dim + k, v))).collect();
        let weights = self.weights.iter().flat_map(|&w| std::iter::repeat_n(w, dim)).collect();
        WeightedOperator {
            matrix: SparseMatrix::from_triplets(self.rows() * dim, self.cols() * dim, triplets),
            weights,
        }
    }

    /// Repeats the operator on each of `layers` stacked copies of its input space
    /// (layer-major unknowns), scaling the weights by the layer weights.
    pub fn lift_layers(&self, layer_weights: &[T]) -> Self {
        let (nr, nc) = (self.rows(), self.cols());
        let mut triplets = Vec::with_capacity(self.matrix.nnz() * layer_weights.len());
        let mut weights = Vec::with_capacity(nr * layer_weights.len());
        for (l, &lw) in layer_weights.iter().enumerate() {
            triplets.extend(self.matrix.triplets().map(|(r, c, v)| (l * nr + r, l * nc + c, v)));
            weights.extend(self.weights.iter().map(|&w| w * lw));
        }
        WeightedOperator {
            matrix: SparseMatrix::from_triplets(nr * layer_weights.len(), nc * layer_weights.len(), triplets),
            weights,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn form_matches_power_sum() {
        let m = SparseMatrix::from_triplets(2, 3, vec![(0, 0, 1.0), (0, 1, -1.0), (1, 2, 2.0)]);
        let op = WeightedOperator::new(m, vec![0.5, 2.0]).unwrap();
        let x = [1.0, 3.0, -0.5];
        let a = op.form();
        let quad: f64 = x.iter().zip(a.mul_vec(&x)).map(|(u, v)| u * v).sum();
        assert!((quad - op.power_sum(&x, 2.0)).abs() < 1e-14);
        assert!((op.power_sum(&x, 3.0) - (0.5 * 8.0 + 2.0 * 1.0)).abs() < 1e-14);
        assert_eq!(op.sup(&x), 2.0);
    }

    #[test]
    fn lifting_and_components() {
        let op = WeightedOperator::mass(&[1.0f64, 2.0]);
        let lifted = op.lift_layers(&[0.5, 0.5]);
        assert_eq!(lifted.rows(), 4);
        assert!((lifted.power_sum(&[1.0; 4], 2.0) - 3.0).abs() < 1e-14);
        let comp = op.componentwise(3);
        assert_eq!((comp.rows(), comp.cols()), (6, 6));
        assert_eq!(comp.weights, vec![1.0, 1.0, 1.0, 2.0, 2.0, 2.0]);
    }
}

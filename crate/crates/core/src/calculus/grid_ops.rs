//! Finite differences on tensor grids.
//!
//! First derivatives use second-order central differences in the interior and
//! second-order one-sided differences on the boundary, so they are exact on
//! quadratics. Higher derivatives compose first-order stencils in ascending
//! axis order.

use crate::error::{Error, Result};
use crate::geometry::{Carrier, DomainGrid};
use crate::num::Real;
use crate::sparse::SparseMatrix;

use super::fields::{packed_pairs, MultiIndex, ScalarField, SymmetricTensorField, VectorField};
use super::operator::WeightedOperator;

/// Highest derivative order supported on grids.
pub const MAX_GRID_ORDER: usize = 2;

fn check_nodes<T: Real>(grid: &DomainGrid<T>) -> Result<()> {
    match grid.shape().iter().position(|&n| n < 3) {
        Some(axis) => Err(Error::GridTooCoarse { axis, nodes: grid.shape()[axis] }),
        None => Ok(()),
    }
}

fn check_len<T: Real>(grid: &DomainGrid<T>, len: usize) -> Result<()> {
    if len != grid.num_nodes() {
        return Err(Error::DimensionMismatch { expected: grid.num_nodes(), found: len });
    }
    Ok(())
}

/// Sparse matrix of `d/dx_axis` on nodal values.
pub fn partial_matrix<T: Real>(grid: &DomainGrid<T>, axis: usize) -> Result<SparseMatrix<T>> {
    check_nodes(grid)?;
    if axis >= grid.dim() {
        return Err(Error::DimensionMismatch { expected: grid.dim(), found: axis });
    }
    let n = grid.shape()[axis];
    let s = grid.stride(axis);
    let inv2h = T::one() / (T::lit(2.0) * grid.spacing()[axis]);
    let (three, four) = (T::lit(3.0), T::lit(4.0));
    let mut triplets = Vec::with_capacity(grid.num_nodes() * 3);
    for node in 0..grid.num_nodes() {
        let i = grid.multi_index(node)[axis];
        if i == 0 {
            triplets.extend([
                (node, node, -three * inv2h),
                (node, node + s, four * inv2h),
                (node, node + 2 * s, -inv2h),
            ]);
        } else if i + 1 == n {
            triplets.extend([
                (node, node, three * inv2h),
                (node, node - s, -four * inv2h),
                (node, node - 2 * s, inv2h),
            ]);
        } else {
            triplets.extend([(node, node + s, inv2h), (node, node - s, -inv2h)]);
        }
    }
    Ok(SparseMatrix::from_triplets(grid.num_nodes(), grid.num_nodes(), triplets))
}

/// Matrix of `partial^alpha`, composed in ascending axis order.
pub fn derivative_matrix<T: Real>(grid: &DomainGrid<T>, alpha: &MultiIndex) -> Result<SparseMatrix<T>> {
    if alpha.0.len() != grid.dim() {
        return Err(Error::DimensionMismatch { expected: grid.dim(), found: alpha.0.len() });
    }
    if alpha.order() > MAX_GRID_ORDER {
        return Err(Error::OrderOutOfScope { order: alpha.order(), max: MAX_GRID_ORDER });
    }
    let mut m = SparseMatrix::identity(grid.num_nodes());
    for axis in alpha.axes() {
        m = partial_matrix(grid, axis)?.matmul(&m)?;
    }
    Ok(m)
}

pub fn partial<T: Real>(grid: &DomainGrid<T>, axis: usize, f: &ScalarField<T>) -> Result<ScalarField<T>> {
    check_len(grid, f.len())?;
    Ok(ScalarField { values: partial_matrix(grid, axis)?.mul_vec(&f.values) })
}

pub fn domain_gradient<T: Real>(grid: &DomainGrid<T>, f: &ScalarField<T>) -> Result<VectorField<T>> {
    check_len(grid, f.len())?;
    let comps = (0..grid.dim()).map(|k| partial(grid, k, f)).collect::<Result<Vec<_>>>()?;
    Ok(VectorField::from_components(&comps, false))
}

pub fn higher_derivative<T: Real>(
    grid: &DomainGrid<T>,
    alpha: &MultiIndex,
    f: &ScalarField<T>,
) -> Result<ScalarField<T>> {
    check_len(grid, f.len())?;
    Ok(ScalarField { values: derivative_matrix(grid, alpha)?.mul_vec(&f.values) })
}

/// `D_jk = (d_j U_k + d_k U_j) / 2`.
pub fn deformation_domain<T: Real>(grid: &DomainGrid<T>, u: &VectorField<T>) -> Result<SymmetricTensorField<T>> {
    let n = grid.dim();
    if u.dim != n {
        return Err(Error::DimensionMismatch { expected: n, found: u.dim });
    }
    check_len(grid, u.nodes())?;
    let op = deformation_operator(grid)?;
    let y = op.apply(&u.values);
    Ok(SymmetricTensorField { dim: n, values: y })
}

/// `<nu, grad f>` pointwise; both fields node-major with equal dimension.
pub fn normal_derivative<T: Real>(gradient: &VectorField<T>, normals: &VectorField<T>) -> Result<ScalarField<T>> {
    if gradient.dim != normals.dim || gradient.values.len() != normals.values.len() {
        return Err(Error::DimensionMismatch { expected: gradient.values.len(), found: normals.values.len() });
    }
    let values = (0..gradient.nodes()).map(|i| crate::num::dot(gradient.at(i), normals.at(i))).collect();
    Ok(ScalarField { values })
}

/// Stacked first partials with nodal weights: the `|grad f|` seminorm.
pub fn gradient_operator<T: Real>(grid: &DomainGrid<T>) -> Result<WeightedOperator<T>> {
    let parts = (0..grid.dim())
        .map(|k| Ok(WeightedOperator { matrix: partial_matrix(grid, k)?, weights: grid.node_weights().to_vec() }))
        .collect::<Result<Vec<_>>>()?;
    WeightedOperator::stack(&parts)
}

/// All `partial^alpha` with `|alpha| = m`, nodal weights.
pub fn order_operator<T: Real>(grid: &DomainGrid<T>, m: usize) -> Result<WeightedOperator<T>> {
    let parts = MultiIndex::all_of_order(grid.dim(), m)
        .iter()
        .map(|a| Ok(WeightedOperator { matrix: derivative_matrix(grid, a)?, weights: grid.node_weights().to_vec() }))
        .collect::<Result<Vec<_>>>()?;
    WeightedOperator::stack(&parts)
}

/// Deformation tensor on node-major vector unknowns; rows are packed entries
/// per node, off-diagonal weights doubled so the seminorm sums all `n^2` entries.
pub fn deformation_operator<T: Real>(grid: &DomainGrid<T>) -> Result<WeightedOperator<T>> {
    let n = grid.dim();
    let nodes = grid.num_nodes();
    let partials = (0..n).map(|k| partial_matrix(grid, k)).collect::<Result<Vec<_>>>()?;
    let pairs = packed_pairs(n);
    let e = pairs.len();
    let half = T::lit(0.5);
    let mut triplets = Vec::new();
    let mut weights = vec![T::zero(); nodes * e];
    for (p, &(j, k)) in pairs.iter().enumerate() {
        for node in 0..nodes {
            let row = node * e + p;
            weights[row] = grid.node_weights()[node] * if j == k { T::one() } else { T::lit(2.0) };
            for (c, v) in partials[j].row(node) {
                triplets.push((row, c * n + k, half * v));
            }
            for (c, v) in partials[k].row(node) {
                triplets.push((row, c * n + j, half * v));
            }
        }
    }
    WeightedOperator::new(SparseMatrix::from_triplets(nodes * e, nodes * n, triplets), weights)
}

/// Full Jacobian `d_j U_k` of node-major vector unknowns (rows node-major over
/// `(j, k)`), nodal weights.
pub fn jacobian_operator<T: Real>(grid: &DomainGrid<T>, components: usize) -> Result<WeightedOperator<T>> {
    Ok(gradient_operator(grid)?.componentwise(components))
}

//! Discrete differential operators on grids and surface meshes.

mod fields;
mod grid_ops;
mod operator;
mod surface_ops;

pub use fields::{packed_index, packed_pairs, MultiIndex, ScalarField, SymmetricTensorField, VectorField};
pub use grid_ops::{
    deformation_domain, deformation_operator, derivative_matrix, domain_gradient, gradient_operator, higher_derivative,
    jacobian_operator, normal_derivative, order_operator, partial, partial_matrix, MAX_GRID_ORDER,
};
pub use operator::WeightedOperator;
pub use surface_ops::{
    cell_deformation_operator, cell_gradient_operator, deformation_surface, guenter_derivative, guenter_matrices,
    surface_gradient, tangential_embedding, vector_mass, CurvatureProvenance,
};

/// Highest derivative order supported on surfaces.
pub const MAX_SURFACE_ORDER: usize = 1;

use crate::error::{Error, Result};
use crate::geometry::{Carrier, DomainGrid, Mesh, SurfaceMesh};
use crate::num::Real;
use crate::sparse::SparseMatrix;

/// Derivative operators of a carrier, with the quadrature that turns them into
/// seminorms. Vector unknowns are node-major ambient components.
pub trait Discretization<T: Real>: Carrier<T> {
    /// `|grad f|` (`|grad_C f|` on surfaces).
    fn gradient_operator(&self) -> Result<WeightedOperator<T>>;

    /// All derivatives of order exactly `m`; `m = 0` is the `L_p` norm.
    fn order_operator(&self, m: usize) -> Result<WeightedOperator<T>>;

    /// `Def U` (`Def_C U` on surfaces) of ambient vector unknowns.
    fn deformation_operator(&self) -> Result<WeightedOperator<T>>;

    /// Nodal derivative `partial^alpha` (`D^alpha` on surfaces).
    fn derivative_matrix(&self, alpha: &MultiIndex) -> Result<SparseMatrix<T>>;

    /// Pointwise gradient at the nodes.
    fn nodal_gradient(&self, f: &ScalarField<T>) -> Result<VectorField<T>>;

    fn max_order(&self) -> usize;

    /// Unit normals for surfaces (flat, node-major); `None` on flat domains.
    fn normals(&self) -> Option<&[T]> {
        None
    }
}

impl<T: Real> Discretization<T> for DomainGrid<T> {
    fn gradient_operator(&self) -> Result<WeightedOperator<T>> {
        gradient_operator(self)
    }

    fn order_operator(&self, m: usize) -> Result<WeightedOperator<T>> {
        match m {
            0 => Ok(WeightedOperator::mass(self.node_weights())),
            1 => gradient_operator(self),
            _ => order_operator(self, m),
        }
    }

    fn deformation_operator(&self) -> Result<WeightedOperator<T>> {
        deformation_operator(self)
    }

    fn derivative_matrix(&self, alpha: &MultiIndex) -> Result<SparseMatrix<T>> {
        derivative_matrix(self, alpha)
    }

    fn nodal_gradient(&self, f: &ScalarField<T>) -> Result<VectorField<T>> {
        domain_gradient(self, f)
    }

    fn max_order(&self) -> usize {
        MAX_GRID_ORDER
    }
}

impl<T: Real> Discretization<T> for SurfaceMesh<T> {
    fn gradient_operator(&self) -> Result<WeightedOperator<T>> {
        cell_gradient_operator(self)
    }

    fn order_operator(&self, m: usize) -> Result<WeightedOperator<T>> {
        match m {
            0 => Ok(WeightedOperator::mass(self.vertex_weights())),
            1 => cell_gradient_operator(self),
            _ => Err(Error::OrderOutOfScope { order: m, max: MAX_SURFACE_ORDER }),
        }
    }

    fn deformation_operator(&self) -> Result<WeightedOperator<T>> {
        cell_deformation_operator(self)
    }

    fn derivative_matrix(&self, alpha: &MultiIndex) -> Result<SparseMatrix<T>> {
        match alpha.order() {
            0 => Ok(SparseMatrix::identity(self.num_vertices())),
            1 => {
                let axis = alpha.axes()[0];
                Ok(guenter_matrices(self)?.swap_remove(axis))
            }
            m => Err(Error::OrderOutOfScope { order: m, max: MAX_SURFACE_ORDER }),
        }
    }

    fn nodal_gradient(&self, f: &ScalarField<T>) -> Result<VectorField<T>> {
        surface_gradient(self, f)
    }

    fn max_order(&self) -> usize {
        MAX_SURFACE_ORDER
    }

    fn normals(&self) -> Option<&[T]> {
        Some(self.normals_flat())
    }
}

impl<T: Real> Carrier<T> for Mesh<T> {
    fn num_nodes(&self) -> usize {
        self.carrier().num_nodes()
    }

    fn ambient_dim(&self) -> usize {
        self.carrier().ambient_dim()
    }

    fn position(&self, node: usize) -> Vec<T> {
        self.carrier().position(node)
    }

    fn node_weights(&self) -> &[T] {
        match self {
            Mesh::Grid(g) => g.node_weights(),
            Mesh::Surface(s) => s.node_weights(),
        }
    }

    fn region_weights(&self, selected: &[bool], kind: crate::geometry::RegionKind) -> Vec<T> {
        self.carrier().region_weights(selected, kind)
    }
}

impl<T: Real> Discretization<T> for Mesh<T> {
    fn gradient_operator(&self) -> Result<WeightedOperator<T>> {
        match self {
            Mesh::Grid(g) => g.gradient_operator(),
            Mesh::Surface(s) => s.gradient_operator(),
        }
    }

    fn order_operator(&self, m: usize) -> Result<WeightedOperator<T>> {
        match self {
            Mesh::Grid(g) => g.order_operator(m),
            Mesh::Surface(s) => s.order_operator(m),
        }
    }

    fn deformation_operator(&self) -> Result<WeightedOperator<T>> {
        match self {
            Mesh::Grid(g) => Discretization::deformation_operator(g),
            Mesh::Surface(s) => Discretization::deformation_operator(s),
        }
    }

    fn derivative_matrix(&self, alpha: &MultiIndex) -> Result<SparseMatrix<T>> {
        match self {
            Mesh::Grid(g) => Discretization::derivative_matrix(g, alpha),
            Mesh::Surface(s) => Discretization::derivative_matrix(s, alpha),
        }
    }

    fn nodal_gradient(&self, f: &ScalarField<T>) -> Result<VectorField<T>> {
        match self {
            Mesh::Grid(g) => g.nodal_gradient(f),
            Mesh::Surface(s) => s.nodal_gradient(f),
        }
    }

    fn max_order(&self) -> usize {
        match self {
            Mesh::Grid(_) => MAX_GRID_ORDER,
            Mesh::Surface(_) => MAX_SURFACE_ORDER,
        }
    }

    fn normals(&self) -> Option<&[T]> {
        match self {
            Mesh::Grid(_) => None,
            Mesh::Surface(s) => Some(s.normals_flat()),
        }
    }
}

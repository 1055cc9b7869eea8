//! Domains, hypersurfaces, marked subregions and extruded cylinders.
//!
//! Every carrier exposes nodal positions and lumped quadrature weights through
//! [`Carrier`]; fields in [`crate::calculus`] are nodal arrays on a carrier.

mod cylinder;
mod grid;
pub mod io;
mod level_set;
mod region;
mod shapes;
mod surface;

use serde::{Deserialize, Serialize};

use crate::num::Real;

pub use cylinder::{extrude_cylinder, extrude_region, CylinderBase, CylinderMesh};
pub use grid::{trapezoid_weights, DomainGrid};
pub use level_set::{projector, tangent_basis, tangent_frame, unit_normal, LevelSetKind, LevelSetSurface};
pub use region::{mark_region, MarkedRegion};
pub use shapes::{build_mesh, ShapeSpec};
pub use surface::SurfaceMesh;

#[allow(unused_imports)]
pub(crate) use surface::{gram, inv_small};

/// Kind of a marked region; decides which measure its nodes carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    /// Co-dimension one set (boundary piece, curve on a surface).
    BoundaryPart,
    /// Full-dimensional subset of the carrier.
    Subdomain,
    /// Counting measure on isolated nodes.
    Point,
}

/// A discretized carrier: nodes with positions and lumped measure.
pub trait Carrier<T: Real> {
    fn num_nodes(&self) -> usize;

    fn ambient_dim(&self) -> usize;

    fn position(&self, node: usize) -> Vec<T>;

    /// Lumped quadrature weight per node.
    fn node_weights(&self) -> &[T];

    /// Total measure, the sum of the node weights.
    fn measure(&self) -> T {
        self.node_weights().iter().fold(T::zero(), |a, &w| a + w)
    }

    /// Per-node weights of the region spanned by `selected` nodes. Only faces,
    /// edges or cells whose vertices are all selected contribute.
    fn region_weights(&self, selected: &[bool], kind: RegionKind) -> Vec<T>;
}

/// Output of [`build_mesh`]: a flat grid or a hypersurface mesh.
#[derive(Debug, Clone, PartialEq)]
pub enum Mesh<T> {
    Grid(DomainGrid<T>),
    Surface(SurfaceMesh<T>),
}

impl<T: Real> Mesh<T> {
    pub fn as_grid(&self) -> Option<&DomainGrid<T>> {
        match self {
            Mesh::Grid(g) => Some(g),
            Mesh::Surface(_) => None,
        }
    }

    pub fn as_surface(&self) -> Option<&SurfaceMesh<T>> {
        match self {
            Mesh::Surface(s) => Some(s),
            Mesh::Grid(_) => None,
        }
    }

    pub fn carrier(&self) -> &dyn Carrier<T> {
        match self {
            Mesh::Grid(g) => g,
            Mesh::Surface(s) => s,
        }
    }
}

//! Tangential (Günter) calculus on discretized domains and hypersurfaces, with
//! numerical estimates of Poincaré, Friedrichs and Korn constants.
//!
//! Every numeric type is generic over [`Real`]; the [`f64`] and [`f32`] modules
//! fix the scalar for the common cases.

pub mod calculus;
pub mod error;
pub mod geometry;
pub mod kernels;
pub mod norms;
pub mod num;
pub mod sparse;
pub mod spectra;
pub mod verify;

pub use error::{Error, Result};
pub use num::Real;

macro_rules! scalar_aliases {
    ($name:ident, $t:ty) => {
        #[doc = concat!("Aliases with the scalar fixed to `", stringify!($t), "`.")]
        pub mod $name {
            pub type DomainGrid = crate::geometry::DomainGrid<$t>;
            pub type SurfaceMesh = crate::geometry::SurfaceMesh<$t>;
            pub type CylinderMesh = crate::geometry::CylinderMesh<$t>;
            pub type LevelSetSurface = crate::geometry::LevelSetSurface<$t>;
            pub type MarkedRegion = crate::geometry::MarkedRegion<$t>;
            pub type Mesh = crate::geometry::Mesh<$t>;
            pub type ScalarField = crate::calculus::ScalarField<$t>;
            pub type VectorField = crate::calculus::VectorField<$t>;
            pub type SymmetricTensorField = crate::calculus::SymmetricTensorField<$t>;
            pub type WeightedOperator = crate::calculus::WeightedOperator<$t>;
            pub type SparseMatrix = crate::sparse::SparseMatrix<$t>;
            pub type OperatorMatrix = crate::spectra::OperatorMatrix<$t>;
            pub type Domain = crate::spectra::Domain<$t>;
            pub type Problem = crate::spectra::Problem<$t>;
            pub type KernelBasis = crate::kernels::KernelBasis<$t>;
            pub type Suite = crate::verify::Suite<$t>;
        }
    };
}

scalar_aliases!(f64, f64);
scalar_aliases!(f32, f32);

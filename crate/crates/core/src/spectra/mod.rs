//! Quadratic forms, generalized eigenproblems and best-constant estimates.

mod cholesky;
mod eigen;
mod estimate;
mod form;
mod problem;
mod registry;

pub use cholesky::{rcm_ordering, EnvelopeCholesky};
pub use eigen::{
    largest_eigenvalue, orthonormalize_rows, smallest_eigenpairs, smallest_eigenpairs_constrained, EigenOptions,
    EigenResult, SolverPath,
};
pub use estimate::{estimate_constant, estimate_problem, quotient_lower_bound, ConstantEstimate};
pub use form::{assemble_quadratic_form, Domain, FormKind, OperatorMatrix};
pub use problem::{side_value, MeshDescriptor, Problem, Ratio, RegionSummary, Term};
pub use registry::{
    build_domain, build_problem, default_regions, setup, CarrierClass, InequalityId, NamedRegion, Setup, DEFAULT_LAYERS,
};

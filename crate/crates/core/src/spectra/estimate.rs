//! Best constants from Rayleigh quotients, and sampled lower bounds.

use serde::{Deserialize, Serialize};

use super::eigen::{smallest_eigenpairs_constrained, EigenOptions, SolverPath};
use super::form::Domain;
use super::problem::{MeshDescriptor, Problem, Ratio, RegionSummary};
use super::registry::{build_problem, InequalityId, NamedRegion};
use crate::calculus::CurvatureProvenance;
use crate::error::{Error, Result};
use crate::norms::Exponent;
use crate::num::Real;

/// `C = lambda_min^(-1/2)` of `A x = lambda B x` (A from the right-hand side).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantEstimate {
    pub id: String,
    #[serde(rename = "C")]
    pub c: f64,
    pub lambda_min: f64,
    pub residual: f64,
    pub mesh: MeshDescriptor,
    pub p: f64,
    pub regions: Vec<RegionSummary>,
    pub curvature_term_provenance: Option<CurvatureProvenance>,
    pub solver: SolverPath,
    pub iterations: usize,
    /// Reduced unknowns of the extremal field.
    #[serde(skip)]
    pub eigenvector: Vec<f64>,
}

impl ConstantEstimate {
    pub fn eigenvector_as<T: Real>(&self) -> Vec<T> {
        self.eigenvector.iter().map(|&v| T::lit(v)).collect()
    }
}

/// Builds the registered problem and estimates its `p = 2` constant.
pub fn estimate_constant<T: Real>(
    id: InequalityId,
    domain: &Domain<T>,
    regions: &[NamedRegion<T>],
    p: f64,
) -> Result<ConstantEstimate> {
    if p != 2.0 {
        Exponent::new(p)?;
        return Err(Error::UnsupportedKind { kind: format!("eigen estimate for p = {p}"), carrier: id.name() });
    }
    estimate_problem(&build_problem(id, domain, regions)?, &EigenOptions::default())
}

/// Smallest eigenpair of the problem's forms on its admissible space.
pub fn estimate_problem<T: Real>(problem: &Problem<T>, opts: &EigenOptions) -> Result<ConstantEstimate> {
    if problem.is_sup() {
        return Err(Error::UnsupportedKind {
            kind: "eigen estimate".into(),
            carrier: format!("sup-norm {}", problem.id),
        });
    }
    let (a, b) = problem.forms()?;
    let eig = smallest_eigenpairs_constrained(&a, &b, &problem.constraints, 1, opts)?;
    let lambda = eig.values[0];
    if !(lambda > T::lit(1e-10) * eig.lambda_max.max(T::eps())) {
        return Err(Error::DisconnectedMesh { lambda_min: lambda.to_f64_lossy() });
    }
    Ok(ConstantEstimate {
        id: problem.id.clone(),
        c: lambda.sqrt().recip().to_f64_lossy(),
        lambda_min: lambda.to_f64_lossy(),
        residual: eig.residuals[0].to_f64_lossy(),
        mesh: problem.mesh.clone(),
        p: 2.0,
        regions: problem.regions.clone(),
        curvature_term_provenance: problem.provenance,
        solver: eig.path,
        iterations: eig.iterations,
        eigenvector: eig.vectors[0].iter().map(|v| v.to_f64_lossy()).collect(),
    })
}

/// Largest `LHS / RHS` over admissible samples (reduced unknowns, projected
/// first). A lower bound for the best constant, never an estimate of it.
/// Returns infinity when some sample has `RHS = 0 < LHS`.
pub fn quotient_lower_bound<T: Real>(problem: &Problem<T>, p: Exponent, samples: &[Vec<T>]) -> Result<T> {
    let mut best: Option<T> = None;
    for s in samples {
        if s.len() != problem.reduced_dim() {
            return Err(Error::DimensionMismatch { expected: problem.reduced_dim(), found: s.len() });
        }
        let x = problem.project(s);
        match problem.ratio(&x, p) {
            Ratio::Value(r) => best = Some(best.map_or(r, |b: T| b.max(r))),
            Ratio::Unbounded => return Ok(T::lit(f64::INFINITY)),
            Ratio::ZeroOverZero => {}
        }
    }
    best.ok_or(Error::NoAdmissibleSamples { tried: samples.len() })
}

//! Null spaces of deformation forms and the unique continuation test.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::calculus::VectorField;
use crate::error::{Error, Result};
use crate::geometry::{Carrier, DomainGrid, MarkedRegion, SurfaceMesh};
use crate::num::{dot, norm2, Real};
use crate::sparse::SparseMatrix;
use crate::spectra::{
    build_problem, default_regions, smallest_eigenpairs, Domain, EigenOptions, InequalityId, NamedRegion,
    OperatorMatrix,
};

/// Singular values below this fraction of the largest are kernel.
pub const KERNEL_TOLERANCE: f64 = 1e-6;
/// Required ratio between the first discarded and the last kernel singular value.
pub const REQUIRED_GAP: f64 = 1e3;

/// Kernel fields (`components` values per node, node-major) with the singular
/// values `sqrt(lambda)` used for the cut.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelBasis<T> {
    pub vectors: Vec<Vec<T>>,
    pub components: usize,
    pub singular_values: Vec<T>,
    pub gap: T,
}

impl<T: Real> KernelBasis<T> {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn fields(&self) -> Vec<VectorField<T>> {
        self.vectors
            .iter()
            .map(|v| VectorField { dim: self.components, values: v.clone(), tangential: false })
            .collect()
    }

    /// Maps every member through `E` (e.g. tangential coefficients to ambient vectors).
    pub fn embedded(&self, e: &SparseMatrix<T>, components: usize) -> Self {
        KernelBasis { vectors: self.vectors.iter().map(|v| e.mul_vec(v)).collect(), components, ..self.clone() }
    }

    /// Multi-column CSV: `node,k1_u1,k1_u2,...`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("node");
        for b in 0..self.dim() {
            for c in 0..self.components {
                out.push_str(&format!(",k{}_u{}", b + 1, c + 1));
            }
        }
        out.push('\n');
        let nodes = self.vectors.first().map_or(0, |v| v.len() / self.components);
        for i in 0..nodes {
            out.push_str(&i.to_string());
            for v in &self.vectors {
                for c in 0..self.components {
                    out.push_str(&format!(",{:e}", v[i * self.components + c]));
                }
            }
            out.push('\n');
        }
        out
    }
}

fn mass_orthonormalize<T: Real>(vectors: &mut [Vec<T>], weights: &[T], components: usize) {
    let ip = |a: &[T], b: &[T]| {
        a.iter().zip(b).enumerate().fold(T::zero(), |s, (i, (&x, &y))| s + weights[i / components] * x * y)
    };
    for i in 0..vectors.len() {
        for _ in 0..2 {
            for j in 0..i {
                let s = ip(&vectors[i], &vectors[j]);
                let (head, tail) = vectors.split_at_mut(i);
                tail[0].iter_mut().zip(&head[j]).for_each(|(x, &y)| *x -= s * y);
            }
        }
        let nv = ip(&vectors[i], &vectors[i]).sqrt();
        vectors[i].iter_mut().for_each(|x| *x /= nv);
    }
}

/// Translations and infinitesimal rotations at the grid nodes, mass-orthonormal.
pub fn rigid_motion_basis<T: Real>(grid: &DomainGrid<T>) -> Result<KernelBasis<T>> {
    let n = grid.dim();
    if !(2..=3).contains(&n) {
        return Err(Error::UnsupportedDimension(n));
    }
    let nodes = grid.num_nodes();
    let mut vectors = Vec::new();
    for k in 0..n {
        let mut v = vec![T::zero(); nodes * n];
        (0..nodes).for_each(|i| v[i * n + k] = T::one());
        vectors.push(v);
    }
    let centre: Vec<T> = (0..n).map(|a| (grid.lower()[a] + grid.upper()[a]) * T::lit(0.5)).collect();
    for a in 0..n {
        for b in a + 1..n {
            let mut v = vec![T::zero(); nodes * n];
            for i in 0..nodes {
                let x = grid.position(i);
                v[i * n + a] = -(x[b] - centre[b]);
                v[i * n + b] = x[a] - centre[a];
            }
            vectors.push(v);
        }
    }
    mass_orthonormalize(&mut vectors, grid.node_weights(), n);
    let d = vectors.len();
    Ok(KernelBasis { vectors, components: n, singular_values: vec![T::zero(); d], gap: T::lit(f64::INFINITY) })
}

/// Rotation fields `e_a x x` on a surface in R^3, mass-orthonormal; these are
/// the Killing fields of the round sphere.
pub fn rotation_basis<T: Real>(mesh: &SurfaceMesh<T>) -> Result<KernelBasis<T>> {
    if mesh.ambient_dim() != 3 {
        return Err(Error::UnsupportedDimension(mesh.ambient_dim()));
    }
    let nodes = mesh.num_vertices();
    let mut vectors = Vec::new();
    for a in 0..3 {
        let mut v = vec![T::zero(); nodes * 3];
        for i in 0..nodes {
            let x = mesh.vertex(i);
            let (b, c) = ((a + 1) % 3, (a + 2) % 3);
            v[i * 3 + b] = -x[c];
            v[i * 3 + c] = x[b];
        }
        vectors.push(v);
    }
    mass_orthonormalize(&mut vectors, mesh.vertex_weights(), 3);
    Ok(KernelBasis { vectors, components: 3, singular_values: vec![T::zero(); 3], gap: T::lit(f64::INFINITY) })
}

/// Eigenvectors of `A x = lambda B x` with `sqrt(lambda) <= tol sqrt(lambda_max)`.
pub fn nullspace<T: Real>(a: &OperatorMatrix<T>, b: &OperatorMatrix<T>, tol: f64) -> Result<KernelBasis<T>> {
    nullspace_with(a, b, tol, &EigenOptions::default())
}

pub fn nullspace_with<T: Real>(
    a: &OperatorMatrix<T>,
    b: &OperatorMatrix<T>,
    tol: f64,
    opts: &EigenOptions,
) -> Result<KernelBasis<T>> {
    let n = a.dim();
    let mut k = 8.min(n);
    loop {
        let eig = smallest_eigenpairs(a, b, k, opts)?;
        let smax = eig.lambda_max.max(T::zero()).sqrt();
        let sv: Vec<T> = eig.values.iter().map(|&l| l.max(T::zero()).sqrt()).collect();
        let cut = T::lit(tol) * smax;
        let d = sv.iter().take_while(|&&s| s <= cut).count();
        if d == k && k < n {
            k = (2 * k).min(n);
            continue;
        }
        let gap = if d == k {
            T::lit(f64::INFINITY)
        } else {
            let below = if d == 0 { T::zero() } else { sv[d - 1] };
            sv[d] / below.max(T::eps() * smax)
        };
        if gap < T::lit(REQUIRED_GAP) {
            return Err(Error::AmbiguousKernel { gap: gap.to_f64_lossy(), required: REQUIRED_GAP });
        }
        return Ok(KernelBasis { vectors: eig.vectors[..d].to_vec(), components: 1, singular_values: sv, gap });
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniqueContinuation {
    pub rank: usize,
    pub expected: usize,
    pub pass: bool,
    /// Ratio of extreme singular values of the weighted restriction.
    #[serde(with = "crate::num::extended")]
    pub condition: f64,
    pub singular_values: Vec<f64>,
}

/// Rank of the basis restricted to the region nodes (rows scaled by the square
/// root of the region weights). Full column rank means no nonzero kernel member
/// vanishes on the region.
pub fn unique_continuation_check<T: Real>(
    basis: &KernelBasis<T>,
    region: &MarkedRegion<T>,
) -> Result<UniqueContinuation> {
    if !(region.measure() > T::zero()) {
        return Err(Error::ZeroMeasure);
    }
    let k = basis.components;
    let rows: Vec<(usize, usize)> = region.nodes.iter().flat_map(|&i| (0..k).map(move |c| (i, c))).collect();
    let m = DMatrix::from_fn(rows.len(), basis.dim(), |r, j| {
        let (i, c) = rows[r];
        region.weights[i].max(T::zero()).sqrt() * basis.vectors[j][i * k + c]
    });
    let mut sv: Vec<T> =
        if basis.dim() == 0 { Vec::new() } else { m.svd(false, false).singular_values.iter().copied().collect() };
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let smax = sv.first().copied().unwrap_or(T::zero());
    let rank = sv.iter().filter(|&&s| s > T::lit(1e-8) * smax && s > T::zero()).count();
    let smin = sv.get(rank.max(1) - 1).copied().unwrap_or(T::zero());
    Ok(UniqueContinuation {
        rank,
        expected: basis.dim(),
        pass: rank == basis.dim(),
        condition: if smin > T::zero() { (smax / smin).to_f64_lossy() } else { f64::INFINITY },
        singular_values: sv.iter().map(|s| s.to_f64_lossy()).collect(),
    })
}

/// Kernel of a Def id's deformation term and, when the id marks a region,
/// whether that region detects every kernel member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefKernelCheck {
    pub id: String,
    pub dim: usize,
    #[serde(with = "crate::num::extended")]
    pub gap: f64,
    pub region: Option<String>,
    pub continuation: Option<UniqueContinuation>,
    pub pass: bool,
}

pub fn def_kernel_check<T: Real>(
    id: InequalityId,
    domain: &Domain<T>,
    regions: &[NamedRegion<T>],
) -> Result<(KernelBasis<T>, DefKernelCheck)> {
    let free =
        id.free_variant().ok_or_else(|| Error::UnsupportedKind { kind: "kernel check".into(), carrier: id.name() })?;
    let own = if id.needs_region() { regions.first() } else { None };
    let scaffold = match regions.first() {
        Some(_) => regions.to_vec(),
        None => default_regions(free, domain)?,
    };
    // drop the region term: what is left is Def against the plain mass
    let p = build_problem(free, domain, &scaffold)?.without_rhs_term(1);
    let (a, b) = p.forms()?;
    let basis = nullspace(&a, &b, KERNEL_TOLERANCE)?.embedded(&p.embedding, p.components);
    let continuation = own.map(|r| unique_continuation_check(&basis, &r.region)).transpose()?;
    let check = DefKernelCheck {
        id: id.name(),
        dim: basis.dim(),
        gap: basis.gap.to_f64_lossy(),
        region: own.map(|r| r.name.clone()),
        pass: continuation.as_ref().is_none_or(|c| c.pass),
        continuation,
    };
    Ok((basis, check))
}

fn orthonormal<T: Real>(vs: &[Vec<T>]) -> Vec<Vec<T>> {
    crate::spectra::orthonormalize_rows(vs)
}

/// Sine of the largest principal angle between two spans (Euclidean);
/// one when the dimensions differ.
pub fn subspace_distance<T: Real>(a: &[Vec<T>], b: &[Vec<T>]) -> T {
    let (qa, qb) = (orthonormal(a), orthonormal(b));
    if qa.len() != qb.len() || qa.is_empty() {
        return if qa.len() == qb.len() { T::zero() } else { T::one() };
    }
    let m = DMatrix::from_fn(qa.len(), qb.len(), |i, j| dot(&qa[i], &qb[j]));
    let smin = m.svd(false, false).singular_values.iter().fold(T::lit(f64::INFINITY), |s, &v| s.min(v));
    (T::one() - (smin * smin).min(T::one())).sqrt()
}

/// RMS over nodes of a field's Euclidean length (helper for residual reporting).
pub fn field_rms<T: Real>(values: &[T], components: usize) -> T {
    let nodes = values.len() / components.max(1);
    if nodes == 0 {
        return T::zero();
    }
    (norm2(values).powi(2) / T::from_usize_lossy(nodes)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::deformation_domain;
    use crate::geometry::{mark_region, RegionKind};
    use crate::spectra::{assemble_quadratic_form, Domain, FormKind};

    #[test]
    fn rigid_motions_have_zero_strain() {
        let g = DomainGrid::<f64>::unit(2, 9).unwrap();
        let basis = rigid_motion_basis(&g).unwrap();
        assert_eq!(basis.dim(), 3);
        for f in basis.fields() {
            let d = deformation_domain(&g, &f).unwrap();
            assert!(d.values.iter().all(|v| v.abs() < 1e-10));
        }
        assert_eq!(rigid_motion_basis(&DomainGrid::<f64>::unit(3, 4).unwrap()).unwrap().dim(), 6);
        assert_eq!(
            rigid_motion_basis(&DomainGrid::<f64>::unit(1, 4).unwrap()).unwrap_err(),
            Error::UnsupportedDimension(1)
        );
    }

    #[test]
    fn def_kernel_matches_rigid_motions() {
        let g = DomainGrid::<f64>::unit(2, 9).unwrap();
        let d = Domain::Grid(g.clone());
        let a = assemble_quadratic_form(FormKind::StiffnessDef, &d, None).unwrap();
        let b = assemble_quadratic_form(FormKind::VectorMass, &d, None).unwrap();
        let k = nullspace(&a, &b, KERNEL_TOLERANCE).unwrap();
        assert_eq!(k.dim(), 3);
        assert!(k.gap >= REQUIRED_GAP);
        let rigid = rigid_motion_basis(&g).unwrap();
        assert!(subspace_distance(&k.vectors, &rigid.vectors) < 1e-6);
    }

    #[test]
    fn continuation_on_edge_and_point() {
        let g = DomainGrid::<f64>::unit(2, 9).unwrap();
        let basis = rigid_motion_basis(&g).unwrap();
        let edge = mark_region(&g, |x| x[0] == 0.0, RegionKind::BoundaryPart).unwrap();
        let uc = unique_continuation_check(&basis, &edge).unwrap();
        assert!(uc.pass && uc.rank == 3);
        let point = MarkedRegion::from_nodes(&g, &[40], RegionKind::Point).unwrap();
        let uc = unique_continuation_check(&basis, &point).unwrap();
        assert!(!uc.pass && uc.rank <= 2);
    }
}

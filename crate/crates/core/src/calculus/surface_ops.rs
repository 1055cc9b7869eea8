//! Tangential (Guenter) calculus on surface meshes.
//!
//! Two reconstructions are provided. Pointwise operators fit a linear function
//! to the 1-ring of each vertex in its tangent plane (weighted least squares).
//! Seminorms and quadratic forms use the exact gradient of the piecewise linear
//! interpolant on each flat cell, which has constants as its only kernel on a
//! connected mesh (vertex stencils on even polygons also annihilate the
//! alternating mode).

use crate::error::{Error, Result};
use crate::geometry::{inv_small, projector, Carrier, SurfaceMesh};
use crate::num::{dot, Real};
use crate::sparse::SparseMatrix;

use super::fields::{packed_pairs, ScalarField, SymmetricTensorField, VectorField};
use super::operator::WeightedOperator;

/// Source of the `D_m(nu_j nu_k)` term in the surface deformation tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurvatureProvenance {
    /// Shape operator of the analytic level set.
    Analytic,
    /// Guenter derivatives of the nodal products `nu_j nu_k`.
    Discrete,
}

fn check_len<T: Real>(mesh: &SurfaceMesh<T>, len: usize) -> Result<()> {
    if len != mesh.num_vertices() {
        return Err(Error::DimensionMismatch { expected: mesh.num_vertices(), found: len });
    }
    Ok(())
}

/// Least-squares Guenter derivative matrices `[G_1, .., G_n]`, one per ambient axis.
pub fn guenter_matrices<T: Real>(mesh: &SurfaceMesh<T>) -> Result<Vec<SparseMatrix<T>>> {
    let n = mesh.ambient_dim();
    let k = n - 1;
    let nv = mesh.num_vertices();
    let bases = mesh.tangent_bases()?;
    let mut triplets = vec![Vec::new(); n];
    for v in 0..nv {
        let x = mesh.vertex(v);
        let nb = mesh.neighbors(v);
        let t = &bases[v];
        let mut rows = Vec::with_capacity(nb.len());
        let mut m = vec![T::zero(); k * k];
        for &w in nb {
            let d: Vec<T> = mesh.vertex(w).iter().zip(x).map(|(&a, &b)| a - b).collect();
            let omega = T::one() / dot(&d, &d);
            let a: Vec<T> = t.iter().map(|ta| dot(ta, &d)).collect();
            for i in 0..k {
                for j in 0..k {
                    m[i * k + j] += omega * a[i] * a[j];
                }
            }
            rows.push((w, a, omega));
        }
        let trace = (0..k).fold(T::zero(), |s, i| s + m[i * k + i]);
        let lam_min = if k == 1 {
            m[0]
        } else {
            let det = m[0] * m[3] - m[1] * m[2];
            let disc = (trace * trace - T::lit(4.0) * det).max(T::zero()).sqrt();
            (trace - disc) / T::lit(2.0)
        };
        if !(lam_min > T::lit(1e-10) * trace) {
            return Err(Error::RankDeficientNeighborhood { vertex: v });
        }
        let minv = inv_small(&m, k).ok_or(Error::RankDeficientNeighborhood { vertex: v })?;
        for (w, a, omega) in rows {
            // coefficient vector in the tangent basis, then ambient components
            let c: Vec<T> = (0..k).map(|i| (0..k).fold(T::zero(), |s, j| s + minv[i * k + j] * a[j]) * omega).collect();
            for j in 0..n {
                let g = (0..k).fold(T::zero(), |s, i| s + t[i][j] * c[i]);
                triplets[j].push((v, w, g));
                triplets[j].push((v, v, -g));
            }
        }
    }
    Ok(triplets.into_iter().map(|t| SparseMatrix::from_triplets(nv, nv, t)).collect())
}

/// `D_j f` at every vertex.
pub fn guenter_derivative<T: Real>(mesh: &SurfaceMesh<T>, j: usize, f: &ScalarField<T>) -> Result<ScalarField<T>> {
    check_len(mesh, f.len())?;
    if j >= mesh.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: mesh.ambient_dim(), found: j });
    }
    let g = guenter_matrices(mesh)?;
    Ok(ScalarField { values: g[j].mul_vec(&f.values) })
}

/// `grad_C f = (D_1 f, .., D_n f)`, tangential.
pub fn surface_gradient<T: Real>(mesh: &SurfaceMesh<T>, f: &ScalarField<T>) -> Result<VectorField<T>> {
    check_len(mesh, f.len())?;
    let g = guenter_matrices(mesh)?;
    let comps: Vec<ScalarField<T>> = g.iter().map(|m| ScalarField { values: m.mul_vec(&f.values) }).collect();
    Ok(VectorField::from_components(&comps, true))
}

/// Surface deformation tensor
/// `(D_k U_j + D_j U_k + sum_m U_m D_m(nu_j nu_k)) / 2` from vertex derivatives.
pub fn deformation_surface<T: Real>(
    mesh: &SurfaceMesh<T>,
    u: &VectorField<T>,
    provenance: CurvatureProvenance,
) -> Result<SymmetricTensorField<T>> {
    let n = mesh.ambient_dim();
    if u.dim != n {
        return Err(Error::DimensionMismatch { expected: n, found: u.dim });
    }
    check_len(mesh, u.nodes())?;
    let scale = u.values.iter().fold(T::one(), |m, v| m.max(v.abs()));
    let tol = T::lit(1e-10) * scale;
    for v in 0..mesh.num_vertices() {
        let defect = dot(u.at(v), mesh.normal(v)).abs();
        if !u.tangential || defect > tol {
            return Err(Error::NotTangential { node: v, defect: defect.to_f64_lossy() });
        }
    }
    let g = guenter_matrices(mesh)?;
    let du: Vec<Vec<Vec<T>>> =
        (0..n).map(|k| g.iter().map(|gj| gj.mul_vec(&u.component(k).values)).collect()).collect();
    // curvature[v][(m, j, k)] = D_m(nu_j nu_k)
    let nv = mesh.num_vertices();
    let curvature: Vec<Vec<T>> = match (provenance, mesh.source()) {
        (CurvatureProvenance::Analytic, Some(src)) => (0..nv)
            .map(|v| {
                let s = src.shape_operator(mesh.vertex(v))?;
                let nu = mesh.normal(v);
                let mut c = vec![T::zero(); n * n * n];
                for m in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            c[(m * n + j) * n + k] = s[m * n + j] * nu[k] + nu[j] * s[m * n + k];
                        }
                    }
                }
                Ok(c)
            })
            .collect::<Result<_>>()?,
        _ => {
            let mut c = vec![vec![T::zero(); n * n * n]; nv];
            for j in 0..n {
                for k in 0..n {
                    let prod: Vec<T> = (0..nv).map(|v| mesh.normal(v)[j] * mesh.normal(v)[k]).collect();
                    for m in 0..n {
                        let d = g[m].mul_vec(&prod);
                        for v in 0..nv {
                            c[v][(m * n + j) * n + k] = d[v];
                        }
                    }
                }
            }
            c
        }
    };
    let half = T::lit(0.5);
    let mut out = SymmetricTensorField::zeros(n, nv);
    for v in 0..nv {
        let uv = u.at(v);
        for (j, k) in packed_pairs(n) {
            let curv = (0..n).fold(T::zero(), |s, m| s + uv[m] * curvature[v][(m * n + j) * n + k]);
            out.set(v, j, k, half * (du[j][k][v] + du[k][j][v] + curv));
        }
    }
    Ok(out)
}

/// Per-cell gradient coefficients: `coef[a][j]` multiplies the value at cell
/// vertex `a` in ambient component `j` of the interpolant's gradient.
pub(crate) fn cell_gradient_coefficients<T: Real>(mesh: &SurfaceMesh<T>, c: usize) -> Result<Vec<Vec<T>>> {
    let n = mesh.ambient_dim();
    let e = mesh.cell_edges(c);
    let k = e.len();
    let g = crate::geometry::gram(&e);
    let ginv = inv_small(&g, k).ok_or(Error::ZeroMeasure)?;
    let mut coef = vec![vec![T::zero(); n]; k + 1];
    for a in 1..=k {
        for j in 0..n {
            let v = (0..k).fold(T::zero(), |s, b| s + e[b][j] * ginv[b * k + (a - 1)]);
            coef[a][j] = v;
            coef[0][j] -= v;
        }
    }
    Ok(coef)
}

/// Cell-wise surface gradient of scalar unknowns: rows `cell * n + j`, cell weights.
pub fn cell_gradient_operator<T: Real>(mesh: &SurfaceMesh<T>) -> Result<WeightedOperator<T>> {
    let n = mesh.ambient_dim();
    let nc = mesh.num_cells();
    let mut triplets = Vec::with_capacity(nc * n * n);
    let mut weights = Vec::with_capacity(nc * n);
    for c in 0..nc {
        let coef = cell_gradient_coefficients(mesh, c)?;
        for j in 0..n {
            for (a, &v) in mesh.cell(c).iter().enumerate() {
                triplets.push((c * n + j, v, coef[a][j]));
            }
            weights.push(mesh.cell_weights()[c]);
        }
    }
    WeightedOperator::new(SparseMatrix::from_triplets(nc * n, mesh.num_vertices(), triplets), weights)
}

/// Embedding of tangential unknowns (`n - 1` coefficients per vertex in the
/// vertex tangent basis) into node-major ambient vectors.
pub fn tangential_embedding<T: Real>(mesh: &SurfaceMesh<T>) -> Result<SparseMatrix<T>> {
    let n = mesh.ambient_dim();
    let k = n - 1;
    let bases = mesh.tangent_bases()?;
    let mut triplets = Vec::with_capacity(mesh.num_vertices() * n * k);
    for (v, t) in bases.iter().enumerate() {
        for (a, ta) in t.iter().enumerate() {
            for j in 0..n {
                triplets.push((v * n + j, v * k + a, ta[j]));
            }
        }
    }
    Ok(SparseMatrix::from_triplets(mesh.num_vertices() * n, mesh.num_vertices() * k, triplets))
}

/// Cell-wise surface strain `P sym(grad U) P` of node-major ambient vector
/// unknowns (`P` projects onto the cell plane). Rows are packed entries per cell,
/// off-diagonal weights doubled.
pub fn cell_deformation_operator<T: Real>(mesh: &SurfaceMesh<T>) -> Result<WeightedOperator<T>> {
    let n = mesh.ambient_dim();
    let pairs = packed_pairs(n);
    let e = pairs.len();
    let nc = mesh.num_cells();
    let half = T::lit(0.5);
    let mut triplets = Vec::new();
    let mut weights = Vec::with_capacity(nc * e);
    for c in 0..nc {
        let coef = cell_gradient_coefficients(mesh, c)?;
        let p = projector(&mesh.cell_normal(c));
        for (pi, &(j, k)) in pairs.iter().enumerate() {
            let row = c * e + pi;
            weights.push(mesh.cell_weights()[c] * if j == k { T::one() } else { T::lit(2.0) });
            for (a, &v) in mesh.cell(c).iter().enumerate() {
                for m in 0..n {
                    let val = half * (coef[a][j] * p[k * n + m] + coef[a][k] * p[j * n + m]);
                    if val != T::zero() {
                        triplets.push((row, v * n + m, val));
                    }
                }
            }
        }
    }
    WeightedOperator::new(SparseMatrix::from_triplets(nc * e, mesh.num_vertices() * n, triplets), weights)
}

/// Vertex-lumped `L_p` norm of node-major vectors with `dim` components.
pub fn vector_mass<T: Real>(weights: &[T], dim: usize) -> WeightedOperator<T> {
    WeightedOperator::mass(weights).componentwise(dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_mesh, LevelSetSurface, Mesh, ShapeSpec};

    fn sphere(sub: usize) -> SurfaceMesh<f64> {
        match build_mesh(&ShapeSpec::Sphere { radius: 1.0, subdivisions: sub }).unwrap() {
            Mesh::Surface(s) => s,
            _ => unreachable!(),
        }
    }

    fn plane() -> SurfaceMesh<f64> {
        let mut v = Vec::new();
        for j in 0..5 {
            for i in 0..5 {
                v.extend([i as f64 * 0.25, j as f64 * 0.25, 0.0]);
            }
        }
        let mut c = Vec::new();
        for j in 0..4 {
            for i in 0..4 {
                let a = j * 5 + i;
                c.extend([a, a + 1, a + 6, a, a + 6, a + 5]);
            }
        }
        SurfaceMesh::new(3, v, c, Some(LevelSetSurface::hyperplane(vec![0.0, 0.0, 1.0], 0.0))).unwrap()
    }

    #[test]
    fn flat_plane_reduces_to_partials() {
        let m = plane();
        let f = ScalarField::from_fn((0..m.num_vertices()).map(|i| m.position(i)), |x| x[0]);
        assert!(guenter_derivative(&m, 0, &f).unwrap().values.iter().all(|v| (v - 1.0).abs() < 1e-12));
        assert!(guenter_derivative(&m, 2, &f).unwrap().values.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn constants_have_zero_gradient() {
        let m = sphere(1);
        let f = ScalarField { values: vec![2.5; m.num_vertices()] };
        assert!(surface_gradient(&m, &f).unwrap().values.iter().all(|v| v.abs() < 1e-12));
        let op = cell_gradient_operator(&m).unwrap();
        assert!(op.power_sum(&f.values, 2.0) < 1e-24);
    }

    #[test]
    fn north_pole_d3_vanishes() {
        let m = sphere(2);
        let pole = (0..m.num_vertices()).find(|&v| (m.vertex(v)[2] - 1.0).abs() < 1e-12);
        let f = ScalarField::from_fn((0..m.num_vertices()).map(|i| m.position(i)), |x| x[2]);
        let d3 = guenter_derivative(&m, 2, &f).unwrap();
        if let Some(p) = pole {
            assert!(d3.values[p].abs() < 1e-12);
        }
        let g = surface_gradient(&m, &f).unwrap();
        assert!(g.normal_defect(m.normals_flat()) < 1e-10);
    }

    #[test]
    fn rotation_in_cell_strain_kernel() {
        let m = sphere(2);
        let u = VectorField::from_fn(3, (0..m.num_vertices()).map(|i| m.position(i)), |x| vec![-x[1], x[0], 0.0]);
        let op = cell_deformation_operator(&m).unwrap();
        assert!(op.power_sum(&u.values, 2.0) < 1e-24);
        let t = VectorField::from_fn(3, (0..m.num_vertices()).map(|i| m.position(i)), |x| {
            vec![x[0] * x[2], x[1] * x[2], -x[0] * x[0] - x[1] * x[1]]
        });
        assert!(op.power_sum(&t.values, 2.0) > 1e-3);
    }

    #[test]
    fn non_tangential_rejected() {
        let m = sphere(1);
        let u = VectorField { dim: 3, values: m.vertices_flat().to_vec(), tangential: true };
        let e = deformation_surface(&m, &u, CurvatureProvenance::Analytic).unwrap_err();
        assert!(matches!(e, Error::NotTangential { .. }));
    }
}

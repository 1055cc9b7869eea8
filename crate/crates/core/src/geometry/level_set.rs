//! Analytic level-set hypersurfaces `{psi = 0}` with their normals and frames.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{dot, norm2, Real};

/// Registered analytic level-set families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LevelSetKind<T> {
    /// `psi(x) = <normal, x> - offset`
    Hyperplane { normal: Vec<T>, offset: T },
    /// `psi(x) = sum_i ((x_i - c_i) / a_i)^2 - 1`; circles and spheres are the
    /// equal-axis case.
    Ellipsoid { center: Vec<T>, semi_axes: Vec<T> },
    /// Ring torus around the `x3` axis in R^3:
    /// `psi(x) = (sqrt(x1^2 + x2^2) - major)^2 + x3^2 - minor^2`.
    Torus { major: T, minor: T },
    /// Round cylinder around the `x3` axis in R^3: `psi(x) = x1^2 + x2^2 - radius^2`.
    Cylinder { radius: T },
}

/// Hypersurface `C = {x in R^n : psi(x) = 0}` with analytic gradient and Hessian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSetSurface<T> {
    pub kind: LevelSetKind<T>,
    pub ambient_dim: usize,
}

impl<T: Real> LevelSetSurface<T> {
    pub fn hyperplane(normal: Vec<T>, offset: T) -> Self {
        let ambient_dim = normal.len();
        LevelSetSurface { kind: LevelSetKind::Hyperplane { normal, offset }, ambient_dim }
    }

    pub fn ellipsoid(center: Vec<T>, semi_axes: Vec<T>) -> Self {
        assert_eq!(center.len(), semi_axes.len());
        let ambient_dim = center.len();
        LevelSetSurface { kind: LevelSetKind::Ellipsoid { center, semi_axes }, ambient_dim }
    }

    /// Origin-centred sphere of radius `r` in R^n (a circle for `n = 2`).
    pub fn sphere(n: usize, r: T) -> Self {
        Self::ellipsoid(vec![T::zero(); n], vec![r; n])
    }

    pub fn torus(major: T, minor: T) -> Self {
        LevelSetSurface { kind: LevelSetKind::Torus { major, minor }, ambient_dim: 3 }
    }

    pub fn cylinder(radius: T) -> Self {
        LevelSetSurface { kind: LevelSetKind::Cylinder { radius }, ambient_dim: 3 }
    }

    fn check_dim(&self, x: &[T]) -> Result<()> {
        if x.len() != self.ambient_dim {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim, found: x.len() });
        }
        Ok(())
    }

    pub fn psi(&self, x: &[T]) -> T {
        let two = T::lit(2.0);
        match &self.kind {
            LevelSetKind::Hyperplane { normal, offset } => dot(normal, x) - *offset,
            LevelSetKind::Ellipsoid { center, semi_axes } => {
                x.iter()
                    .zip(center)
                    .zip(semi_axes)
                    .fold(T::zero(), |acc, ((&xi, &ci), &ai)| acc + ((xi - ci) / ai).powi(2))
                    - T::one()
            }
            LevelSetKind::Torus { major, minor } => {
                let rho = (x[0] * x[0] + x[1] * x[1]).sqrt();
                (rho - *major).powi(2) + x[2] * x[2] - minor.powi(2)
            }
            LevelSetKind::Cylinder { radius } => x[0] * x[0] + x[1] * x[1] - radius.powf(two),
        }
    }

    pub fn grad_psi(&self, x: &[T]) -> Vec<T> {
        let two = T::lit(2.0);
        match &self.kind {
            LevelSetKind::Hyperplane { normal, .. } => normal.clone(),
            LevelSetKind::Ellipsoid { center, semi_axes } => {
                x.iter().zip(center).zip(semi_axes).map(|((&xi, &ci), &ai)| two * (xi - ci) / (ai * ai)).collect()
            }
            LevelSetKind::Torus { major, .. } => {
                let rho = (x[0] * x[0] + x[1] * x[1]).sqrt();
                let f = two * (rho - *major) / rho;
                vec![f * x[0], f * x[1], two * x[2]]
            }
            LevelSetKind::Cylinder { .. } => vec![two * x[0], two * x[1], T::zero()],
        }
    }

    /// Hessian of `psi`, row-major `n x n`.
    pub fn hess_psi(&self, x: &[T]) -> Vec<T> {
        let n = self.ambient_dim;
        let two = T::lit(2.0);
        let mut h = vec![T::zero(); n * n];
        match &self.kind {
            LevelSetKind::Hyperplane { .. } => {}
            LevelSetKind::Ellipsoid { semi_axes, .. } => {
                for (i, &a) in semi_axes.iter().enumerate() {
                    h[i * n + i] = two / (a * a);
                }
            }
            LevelSetKind::Torus { major, .. } => {
                let rho2 = x[0] * x[0] + x[1] * x[1];
                let rho = rho2.sqrt();
                let rho3 = rho2 * rho;
                // d/dx_j [2 (1 - R/rho) x_i] = 2 (1 - R/rho) delta_ij + 2 R x_i x_j / rho^3
                let a = two * (T::one() - *major / rho);
                let b = two * *major / rho3;
                for i in 0..2 {
                    for j in 0..2 {
                        h[i * n + j] = b * x[i] * x[j];
                    }
                    h[i * n + i] += a;
                }
                h[8] = two;
            }
            LevelSetKind::Cylinder { .. } => {
                h[0] = two;
                h[4] = two;
            }
        }
        h
    }

    /// Unit normal `grad psi / |grad psi|`.
    pub fn unit_normal(&self, x: &[T]) -> Result<Vec<T>> {
        self.check_dim(x)?;
        let g = self.grad_psi(x);
        let len = norm2(&g);
        if !(len >= T::lit(1e-14)) {
            return Err(Error::DegenerateGradient { norm: len.to_f64_lossy() });
        }
        Ok(g.into_iter().map(|v| v / len).collect())
    }

    /// Shape operator `S_mk = D_m nu_k = (P H P)_mk / |grad psi|`, row-major.
    pub fn shape_operator(&self, x: &[T]) -> Result<Vec<T>> {
        let n = self.ambient_dim;
        let nu = self.unit_normal(x)?;
        let glen = norm2(&self.grad_psi(x));
        let h = self.hess_psi(x);
        let p = projector(&nu);
        let mut ph = vec![T::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                ph[i * n + j] = (0..n).fold(T::zero(), |acc, k| acc + p[i * n + k] * h[k * n + j]);
            }
        }
        let mut s = vec![T::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                s[i * n + j] = (0..n).fold(T::zero(), |acc, k| acc + ph[i * n + k] * p[k * n + j]) / glen;
            }
        }
        Ok(s)
    }

    /// Newton projection of `x` onto the zero set along the gradient direction.
    pub fn project(&self, x: &[T]) -> Result<Vec<T>> {
        self.check_dim(x)?;
        let mut y = x.to_vec();
        for _ in 0..50 {
            let v = self.psi(&y);
            if v.abs() <= T::lit(1e-15) {
                break;
            }
            let g = self.grad_psi(&y);
            let g2 = dot(&g, &g);
            if g2 <= T::lit(1e-28) {
                return Err(Error::DegenerateGradient { norm: g2.sqrt().to_f64_lossy() });
            }
            for (yi, gi) in y.iter_mut().zip(&g) {
                *yi -= v * *gi / g2;
            }
        }
        Ok(y)
    }
}

/// Tangential projector `P = I - nu nu^T`, row-major.
pub fn projector<T: Real>(nu: &[T]) -> Vec<T> {
    let n = nu.len();
    let mut p = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            p[i * n + j] = if i == j { T::one() } else { T::zero() } - nu[i] * nu[j];
        }
    }
    p
}

/// Free-function form of [`LevelSetSurface::unit_normal`].
pub fn unit_normal<T: Real>(surface: &LevelSetSurface<T>, x: &[T]) -> Result<Vec<T>> {
    surface.unit_normal(x)
}

fn unit_tolerance<T: Real>() -> T {
    T::lit(1e-12).max(T::eps() * T::lit(16.0))
}

/// The projected basis `d^j = e^j - nu_j nu`, `j = 1..n`.
pub fn tangent_frame<T: Real>(nu: &[T]) -> Result<Vec<Vec<T>>> {
    let len = norm2(nu);
    if (len - T::one()).abs() > unit_tolerance::<T>() {
        return Err(Error::NonUnitNormal { length: len.to_f64_lossy() });
    }
    let n = nu.len();
    Ok((0..n).map(|j| (0..n).map(|k| if j == k { T::one() } else { T::zero() } - nu[j] * nu[k]).collect()).collect())
}

/// Orthonormal basis (n - 1 vectors) of the tangent space `nu^perp`, built by
/// Gram-Schmidt on the projected basis vectors taken in order of decreasing length.
pub fn tangent_basis<T: Real>(nu: &[T]) -> Result<Vec<Vec<T>>> {
    let mut frame = tangent_frame(nu)?;
    frame.sort_by(|a, b| norm2(b).partial_cmp(&norm2(a)).unwrap_or(std::cmp::Ordering::Equal));
    let mut basis: Vec<Vec<T>> = Vec::with_capacity(nu.len() - 1);
    for mut v in frame {
        if basis.len() + 1 == nu.len() {
            break;
        }
        for b in &basis {
            let c = dot(&v, b);
            v.iter_mut().zip(b).for_each(|(vi, &bi)| *vi -= c * bi);
        }
        let l = norm2(&v);
        if l > T::lit(1e-6) {
            basis.push(v.into_iter().map(|x| x / l).collect());
        }
    }
    Ok(basis)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn plane_normal() {
        let s = LevelSetSurface::hyperplane(vec![0.0, 0.0, 1.0], 0.0);
        assert_eq!(s.unit_normal(&[0.0, 0.0, 0.0]).unwrap(), vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn sphere_normal_is_radial() {
        let s = LevelSetSurface::sphere(3, 1.0);
        assert!(close(&s.unit_normal(&[1.0, 0.0, 0.0]).unwrap(), &[1.0, 0.0, 0.0], 1e-15));
    }

    #[test]
    fn ellipse_normal_at_vertex() {
        // psi = x^2/4 + y^2 - 1, grad = (x/2, 2y) = (1, 0) at (2, 0)
        let s = LevelSetSurface::ellipsoid(vec![0.0, 0.0], vec![2.0, 1.0]);
        assert!(close(&s.unit_normal(&[2.0, 0.0]).unwrap(), &[1.0, 0.0], 1e-15));
        let nu = s.unit_normal(&[1.2, 0.8]).unwrap();
        assert!((norm2(&nu) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn degenerate_gradient_is_reported() {
        let s = LevelSetSurface::sphere(3, 1.0);
        assert!(matches!(s.unit_normal(&[0.0, 0.0, 0.0]), Err(Error::DegenerateGradient { .. })));
    }

    #[test]
    fn frame_examples() {
        let f = tangent_frame(&[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(f[0], vec![1.0, 0.0, 0.0]);
        assert_eq!(f[1], vec![0.0, 1.0, 0.0]);
        assert_eq!(f[2], vec![0.0, 0.0, 0.0]);
        let f = tangent_frame(&[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(f[0], vec![0.0, 0.0, 0.0]);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let f = tangent_frame(&[s, s, 0.0]).unwrap();
        assert!(close(&f[0], &[0.5, -0.5, 0.0], 1e-15));
    }

    #[test]
    fn frame_rejects_non_unit() {
        assert!(matches!(tangent_frame(&[0.0, 0.0, 1.1]), Err(Error::NonUnitNormal { .. })));
    }

    #[test]
    fn hessians_match_finite_differences() {
        let shapes = [
            LevelSetSurface::torus(2.0, 0.5),
            LevelSetSurface::ellipsoid(vec![0.1, 0.0, -0.2], vec![1.0, 2.0, 0.5]),
            LevelSetSurface::cylinder(1.5),
        ];
        let x = [0.7, 1.9, 0.3];
        for s in &shapes {
            let h = s.hess_psi(&x);
            let eps = 1e-6;
            for j in 0..3 {
                let mut xp = x;
                let mut xm = x;
                xp[j] += eps;
                xm[j] -= eps;
                let gp = s.grad_psi(&xp);
                let gm = s.grad_psi(&xm);
                for i in 0..3 {
                    let fd: f64 = (gp[i] - gm[i]) / (2.0 * eps);
                    assert!((fd - h[i * 3 + j]).abs() < 1e-6, "{:?} H[{i}][{j}]", s.kind);
                }
            }
        }
    }

    #[test]
    fn unit_sphere_shape_operator_is_projector() {
        let s = LevelSetSurface::sphere(3, 1.0);
        let x = [0.6, 0.0, 0.8];
        let sop = s.shape_operator(&x).unwrap();
        let p = projector(&s.unit_normal(&x).unwrap());
        assert!(close(&sop, &p, 1e-14));
    }

    #[test]
    fn tangent_basis_is_orthonormal() {
        let nu = [0.48f64, -0.6, 0.64];
        let b = tangent_basis(&nu).unwrap();
        assert_eq!(b.len(), 2);
        assert!(dot(&b[0], &nu).abs() < 1e-15 && dot(&b[1], &nu).abs() < 1e-15);
        assert!(dot(&b[0], &b[1]).abs() < 1e-15);
        assert!((norm2(&b[0]) - 1.0).abs() < 1e-15);
    }
}

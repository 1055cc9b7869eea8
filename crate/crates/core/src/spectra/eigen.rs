//! Smallest eigenpairs of `A x = lambda B x` on a linearly constrained subspace.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::cholesky::EnvelopeCholesky;
use super::form::OperatorMatrix;
use crate::error::{Error, Result};
use crate::num::{dot, norm2, Real};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EigenOptions {
    /// Target residual `||A x - lambda B x|| / ||x||`.
    pub tol: f64,
    /// Problems up to this many unknowns are solved densely.
    pub dense_threshold: usize,
    pub max_iterations: usize,
    pub seed: u64,
    /// Guard vectors added to the iteration block.
    pub extra_vectors: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions { tol: 1e-8, dense_threshold: 2000, max_iterations: 500, seed: 0x5EED, extra_vectors: 6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverPath {
    Dense,
    Iterative,
}

#[derive(Debug, Clone)]
pub struct EigenResult<T> {
    /// Ascending.
    pub values: Vec<T>,
    pub vectors: Vec<Vec<T>>,
    pub residuals: Vec<T>,
    pub iterations: usize,
    pub path: SolverPath,
    /// Largest eigenvalue on the admissible space (exact for the dense path,
    /// a power-iteration estimate otherwise).
    pub lambda_max: T,
}

impl<T: Real> EigenResult<T> {
    pub fn max_residual(&self) -> T {
        self.residuals.iter().fold(T::zero(), |m, &r| m.max(r))
    }
}

/// Orthonormal basis of the span of `rows` (modified Gram-Schmidt, twice);
/// dependent rows are dropped.
pub fn orthonormalize_rows<T: Real>(rows: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<T>> = Vec::new();
    for r in rows {
        let original = norm2(r);
        if original == T::zero() {
            continue;
        }
        let mut v = r.clone();
        for _ in 0..2 {
            for q in &out {
                let s = dot(q, &v);
                v.iter_mut().zip(q).for_each(|(vi, &qi)| *vi -= s * qi);
            }
        }
        let nv = norm2(&v);
        if nv > T::lit(1e-10) * original {
            v.iter_mut().for_each(|x| *x /= nv);
            out.push(v);
        }
    }
    out
}

fn project_out<T: Real>(q: &[Vec<T>], r: &mut [T]) {
    for c in q {
        let s = dot(c, r);
        r.iter_mut().zip(c).for_each(|(ri, &ci)| *ri -= s * ci);
    }
}

fn residual<T: Real>(a: &OperatorMatrix<T>, b: &OperatorMatrix<T>, q: &[Vec<T>], lambda: T, x: &[T]) -> T {
    let ax = a.apply(x);
    let bx = b.apply(x);
    let mut r: Vec<T> = ax.iter().zip(&bx).map(|(&u, &v)| u - lambda * v).collect();
    project_out(q, &mut r);
    norm2(&r) / norm2(x)
}

fn form_scale<T: Real>(f: &OperatorMatrix<T>) -> T {
    f.low_rank.iter().fold(f.sparse.norm_inf(), |s, (c, u)| s + c.abs() * dot(u, u))
}

/// `k` smallest eigenpairs of `A x = lambda B x`.
pub fn smallest_eigenpairs<T: Real>(
    a: &OperatorMatrix<T>,
    b: &OperatorMatrix<T>,
    k: usize,
    opts: &EigenOptions,
) -> Result<EigenResult<T>> {
    smallest_eigenpairs_constrained(a, b, &[], k, opts)
}

/// `k` smallest eigenpairs of `A x = lambda B x` restricted to `{x : c_i . x = 0}`.
/// `B` must be positive definite on that subspace.
pub fn smallest_eigenpairs_constrained<T: Real>(
    a: &OperatorMatrix<T>,
    b: &OperatorMatrix<T>,
    constraints: &[Vec<T>],
    k: usize,
    opts: &EigenOptions,
) -> Result<EigenResult<T>> {
    let n = a.dim();
    if b.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: b.dim() });
    }
    if let Some(c) = constraints.iter().find(|c| c.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, found: c.len() });
    }
    let q = orthonormalize_rows(constraints);
    let free = n - q.len();
    let k = k.min(free);
    if k == 0 {
        return Err(Error::DimensionMismatch { expected: 1, found: free });
    }
    if n <= opts.dense_threshold {
        dense(a, b, &q, k)
    } else {
        iterative(a, b, &q, k, opts)
    }
}

/// Columns spanning `{x : Q x = 0}` for orthonormal rows `Q` (Householder).
fn constraint_nullspace<T: Real>(q: &[Vec<T>], n: usize) -> DMatrix<T> {
    let c = q.len();
    let mut m = DMatrix::from_fn(n, c, |i, j| q[j][i]);
    let mut reflectors = Vec::with_capacity(c);
    for i in 0..c {
        let x: Vec<T> = (i..n).map(|r| m[(r, i)]).collect();
        let nx = norm2(&x);
        let alpha = if x[0] > T::zero() { -nx } else { nx };
        let mut v = x;
        v[0] -= alpha;
        let nv = norm2(&v);
        if nv > T::zero() {
            v.iter_mut().for_each(|t| *t /= nv);
        }
        for j in i..c {
            let s = (0..v.len()).fold(T::zero(), |acc, r| acc + v[r] * m[(i + r, j)]);
            for r in 0..v.len() {
                m[(i + r, j)] -= T::lit(2.0) * s * v[r];
            }
        }
        reflectors.push(v);
    }
    let mut z = DMatrix::zeros(n, n - c);
    for j in 0..n - c {
        z[(c + j, j)] = T::one();
    }
    for (i, v) in reflectors.iter().enumerate().rev() {
        for j in 0..n - c {
            let s = (0..v.len()).fold(T::zero(), |acc, r| acc + v[r] * z[(i + r, j)]);
            if s != T::zero() {
                for r in 0..v.len() {
                    z[(i + r, j)] -= T::lit(2.0) * s * v[r];
                }
            }
        }
    }
    z
}

fn symmetrize<T: Real>(m: &mut DMatrix<T>) {
    let half = T::lit(0.5);
    for i in 0..m.nrows() {
        for j in 0..i {
            let v = (m[(i, j)] + m[(j, i)]) * half;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// All eigenpairs of the dense pencil `(A, B)` with `B` positive definite,
/// ascending; columns of the returned matrix are B-orthonormal.
pub(crate) fn dense_pencil<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> Result<(Vec<T>, DMatrix<T>)> {
    let mut b = b.clone();
    symmetrize(&mut b);
    let chol = b.cholesky().ok_or(Error::NotPositiveDefinite)?;
    let l = chol.l();
    let la = l.solve_lower_triangular(a).ok_or(Error::NotPositiveDefinite)?;
    let mut c = l.solve_lower_triangular(&la.transpose()).ok_or(Error::NotPositiveDefinite)?;
    symmetrize(&mut c);
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let y = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    let w = l.transpose().solve_upper_triangular(&y).ok_or(Error::NotPositiveDefinite)?;
    Ok((values, w))
}

fn dense<T: Real>(a: &OperatorMatrix<T>, b: &OperatorMatrix<T>, q: &[Vec<T>], k: usize) -> Result<EigenResult<T>> {
    let n = a.dim();
    let mut ad = a.to_dense();
    let mut bd = b.to_dense();
    let z = (!q.is_empty()).then(|| constraint_nullspace(q, n));
    if let Some(z) = &z {
        ad = z.transpose() * ad * z;
        bd = z.transpose() * bd * z;
    }
    symmetrize(&mut ad);
    let (values, w) = dense_pencil(&ad, &bd)?;
    let w = match &z {
        Some(z) => z * w,
        None => w,
    };
    let vectors: Vec<Vec<T>> = (0..k).map(|c| w.column(c).iter().copied().collect()).collect();
    let residuals = vectors.iter().zip(&values).map(|(x, &l)| residual(a, b, q, l, x)).collect();
    let lambda_max = *values.last().unwrap();
    Ok(EigenResult {
        values: values[..k].to_vec(),
        vectors,
        residuals,
        iterations: 1,
        path: SolverPath::Dense,
        lambda_max,
    })
}

/// `(S + U D U^T)^{-1}` with constraint handling by a bordered solve.
struct ShiftedSolver<T> {
    chol: EnvelopeCholesky<T>,
    low_rank: Vec<Vec<T>>,
    s_inv_u: Vec<Vec<T>>,
    capacitance: Option<DMatrix<T>>,
    constraints: Vec<Vec<T>>,
    k_inv_c: Vec<Vec<T>>,
    schur: Option<DMatrix<T>>,
}

impl<T: Real> ShiftedSolver<T> {
    fn new(a: &OperatorMatrix<T>, b: &OperatorMatrix<T>, sigma: T, q: &[Vec<T>]) -> Result<Self> {
        let s = a.sparse.add(&b.sparse.scale(-sigma))?;
        let chol = EnvelopeCholesky::factor(&s)?;
        let mut terms: Vec<(T, Vec<T>)> = a.low_rank.clone();
        terms.extend(b.low_rank.iter().map(|(c, u)| (-sigma * *c, u.clone())));
        terms.retain(|(c, _)| *c != T::zero());
        let s_inv_u: Vec<Vec<T>> = terms.iter().map(|(_, u)| chol.solve(u)).collect();
        let capacitance = if terms.is_empty() {
            None
        } else {
            let r = terms.len();
            let m = DMatrix::from_fn(r, r, |i, j| {
                let d = if i == j { T::one() / terms[i].0 } else { T::zero() };
                d + dot(&terms[i].1, &s_inv_u[j])
            });
            Some(m.try_inverse().ok_or(Error::NotPositiveDefinite)?)
        };
        let mut solver = ShiftedSolver {
            chol,
            low_rank: terms.into_iter().map(|(_, u)| u).collect(),
            s_inv_u,
            capacitance,
            constraints: q.to_vec(),
            k_inv_c: Vec::new(),
            schur: None,
        };
        if !q.is_empty() {
            solver.k_inv_c = q.iter().map(|c| solver.solve_k(c)).collect();
            let g = DMatrix::from_fn(q.len(), q.len(), |i, j| dot(&q[i], &solver.k_inv_c[j]));
            solver.schur = Some(g.try_inverse().ok_or(Error::NotPositiveDefinite)?);
        }
        Ok(solver)
    }

    fn solve_k(&self, rhs: &[T]) -> Vec<T> {
        let mut y = self.chol.solve(rhs);
        if let Some(cap) = &self.capacitance {
            let t = DVector::from_iterator(self.low_rank.len(), self.low_rank.iter().map(|u| dot(u, &y)));
            let s = cap * t;
            for (i, w) in self.s_inv_u.iter().enumerate() {
                y.iter_mut().zip(w).for_each(|(yi, &wi)| *yi -= s[i] * wi);
            }
        }
        y
    }

    /// Solution of the bordered system `[K C^T; C 0] [y; mu] = [rhs; 0]`.
    fn solve(&self, rhs: &[T]) -> Vec<T> {
        let mut y = self.solve_k(rhs);
        if let Some(g) = &self.schur {
            let t = DVector::from_iterator(self.constraints.len(), self.constraints.iter().map(|c| dot(c, &y)));
            let mu = g * t;
            for (i, w) in self.k_inv_c.iter().enumerate() {
                y.iter_mut().zip(w).for_each(|(yi, &wi)| *yi -= mu[i] * wi);
            }
        }
        y
    }
}

/// B-orthonormalizes `vs` in place; collapsed vectors are replaced via `fresh`.
fn b_orthonormalize<T: Real>(vs: &mut [Vec<T>], b: &OperatorMatrix<T>, mut fresh: impl FnMut() -> Vec<T>) {
    for i in 0..vs.len() {
        for attempt in 0..4 {
            let before = b.quadratic(&vs[i]).max(T::zero()).sqrt();
            for _ in 0..2 {
                for j in 0..i {
                    let s = dot(&vs[j], &b.apply(&vs[i]));
                    let (head, tail) = vs.split_at_mut(i);
                    tail[0].iter_mut().zip(&head[j]).for_each(|(x, &y)| *x -= s * y);
                }
            }
            let after = b.quadratic(&vs[i]).max(T::zero()).sqrt();
            if after > T::lit(1e-10) * before && after > T::zero() {
                vs[i].iter_mut().for_each(|x| *x /= after);
                break;
            }
            if attempt == 3 {
                break;
            }
            vs[i] = fresh();
        }
    }
}

fn iterative<T: Real>(
    a: &OperatorMatrix<T>,
    b: &OperatorMatrix<T>,
    q: &[Vec<T>],
    k: usize,
    opts: &EigenOptions,
) -> Result<EigenResult<T>> {
    let n = a.dim();
    let ad = a.sparse.diagonal_entries();
    let bd = b.sparse.diagonal_entries();
    let ratio = ad.iter().zip(&bd).filter(|(_, &bi)| bi > T::zero()).fold(T::zero(), |m, (&ai, &bi)| m.max(ai / bi));
    let sigma = -T::lit(1e-6) * ratio.max(T::eps());
    let solver = ShiftedSolver::new(a, b, sigma, q)?;
    let m = (k + opts.extra_vectors).min(n - q.len());
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut random = move || -> Vec<T> { (0..n).map(|_| T::lit(rng.random_range(-1.0..1.0))).collect() };
    let mut x: Vec<Vec<T>> = (0..m).map(|_| random()).collect();
    let scale = form_scale(a);
    let bscale = form_scale(b);
    let mut values = vec![T::zero(); m];
    let mut residuals = vec![T::lit(f64::INFINITY); k];
    for it in 1..=opts.max_iterations {
        let mut y: Vec<Vec<T>> = x.iter().map(|v| solver.solve(&b.apply(v))).collect();
        b_orthonormalize(&mut y, b, || solver.solve(&b.apply(&random())));
        let h = DMatrix::from_fn(m, m, |i, j| dot(&y[i], &a.apply(&y[j])));
        let mut h = h;
        symmetrize(&mut h);
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..m).collect();
        order
            .sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap_or(std::cmp::Ordering::Equal));
        x = order
            .iter()
            .map(|&c| {
                let mut v = vec![T::zero(); n];
                for (r, yr) in y.iter().enumerate() {
                    let w = eig.eigenvectors[(r, c)];
                    v.iter_mut().zip(yr).for_each(|(vi, &yi)| *vi += w * yi);
                }
                v
            })
            .collect();
        values = order.iter().map(|&c| eig.eigenvalues[c]).collect();
        let mut done = true;
        for i in 0..k {
            residuals[i] = residual(a, b, q, values[i], &x[i]);
            let floor = T::lit(1e-11) * (scale + values[i].abs() * bscale);
            if !(residuals[i] <= T::lit(opts.tol) || residuals[i] <= floor) {
                done = false;
            }
        }
        if done {
            let lambda_max = largest_eigenvalue(a, b, 200, opts.seed)?.max(values[m - 1]);
            return Ok(EigenResult {
                values: values[..k].to_vec(),
                vectors: x[..k].to_vec(),
                residuals,
                iterations: it,
                path: SolverPath::Iterative,
                lambda_max,
            });
        }
    }
    let worst = residuals.iter().fold(T::zero(), |m, &r| m.max(r));
    let _ = values;
    Err(Error::NoConvergence { iterations: opts.max_iterations, residual: worst.to_f64_lossy() })
}

/// Power-iteration estimate of the largest eigenvalue of `A x = lambda B x`
/// (sparse part of `B`).
pub fn largest_eigenvalue<T: Real>(
    a: &OperatorMatrix<T>,
    b: &OperatorMatrix<T>,
    iterations: usize,
    seed: u64,
) -> Result<T> {
    let n = a.dim();
    let diagonal = b.sparse.is_diagonal();
    let chol = if diagonal { None } else { Some(EnvelopeCholesky::factor(&b.sparse)?) };
    let bdiag = b.sparse.diagonal_entries();
    let solve_b = |v: &[T]| -> Vec<T> {
        match &chol {
            Some(c) => c.solve(v),
            None => v.iter().zip(&bdiag).map(|(&x, &d)| x / d).collect(),
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9E37_79B9);
    let mut x: Vec<T> = (0..n).map(|_| T::lit(rng.random_range(-1.0..1.0))).collect();
    let mut lambda = T::zero();
    for _ in 0..iterations {
        let y = solve_b(&a.apply(&x));
        let bx = b.apply(&x);
        let xbx = dot(&x, &bx);
        if xbx > T::zero() {
            lambda = lambda.max(dot(&x, &a.apply(&x)) / xbx);
        }
        let ny = norm2(&y);
        if ny == T::zero() {
            break;
        }
        x = y.into_iter().map(|v| v / ny).collect();
    }
    Ok(lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::SparseMatrix;
    use crate::spectra::form::FormKind;

    fn neumann(n: usize) -> (OperatorMatrix<f64>, OperatorMatrix<f64>) {
        // linear finite elements on [0,1]: an independent discretization of -u'' = lambda u
        let h = 1.0 / (n - 1) as f64;
        let mut ka = Vec::new();
        let mut w = vec![h; n];
        w[0] = h / 2.0;
        w[n - 1] = h / 2.0;
        for e in 0..n - 1 {
            for (i, j, v) in [(e, e, 1.0), (e + 1, e + 1, 1.0), (e, e + 1, -1.0), (e + 1, e, -1.0)] {
                ka.push((i, j, v / h));
            }
        }
        (
            OperatorMatrix::from_sparse(FormKind::StiffnessGrad, SparseMatrix::from_triplets(n, n, ka)),
            OperatorMatrix::from_sparse(FormKind::Mass, SparseMatrix::diagonal(&w)),
        )
    }

    #[test]
    fn identity_pencil() {
        let b = OperatorMatrix::from_sparse(FormKind::Mass, SparseMatrix::diagonal(&[1.0, 2.0, 3.0]));
        let r = smallest_eigenpairs(&b, &b, 3, &EigenOptions::default()).unwrap();
        assert!(r.values.iter().all(|&v: &f64| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn neumann_dense_and_iterative_agree() {
        let (a, b) = neumann(257);
        let d = smallest_eigenpairs(&a, &b, 3, &EigenOptions::default()).unwrap();
        let pi2 = std::f64::consts::PI.powi(2);
        assert!(d.values[0].abs() < 1e-10);
        assert!((d.values[1] - pi2).abs() / pi2 < 0.01);
        let opts = EigenOptions { dense_threshold: 10, ..Default::default() };
        let it = smallest_eigenpairs(&a, &b, 3, &opts).unwrap();
        assert_eq!(it.path, SolverPath::Iterative);
        for i in 0..3 {
            assert!((it.values[i] - d.values[i]).abs() < 1e-8 * (1.0 + d.values[i]));
            assert!(it.residuals[i] <= 1e-8);
        }
    }

    #[test]
    fn constraints_and_low_rank_terms() {
        let (a, b) = neumann(65);
        let w = b.sparse.diagonal_entries();
        let dense = smallest_eigenpairs_constrained(&a, &b, &[w.clone()], 2, &EigenOptions::default()).unwrap();
        let full = smallest_eigenpairs(&a, &b, 3, &EigenOptions::default()).unwrap();
        assert!((dense.values[0] - full.values[1]).abs() < 1e-9);
        let opts = EigenOptions { dense_threshold: 10, ..Default::default() };
        let it = smallest_eigenpairs_constrained(&a, &b, &[w.clone()], 2, &opts).unwrap();
        assert!((it.values[0] - dense.values[0]).abs() < 1e-8);
        assert!(dot(&w, &it.vectors[0]).abs() < 1e-10 * norm2(&it.vectors[0]));

        let mut e = vec![0.0; 65];
        e[0] = 1.0;
        let mut ar = a.clone();
        ar.low_rank.push((1.0, e));
        let d = smallest_eigenpairs(&ar, &b, 1, &EigenOptions::default()).unwrap();
        let i = smallest_eigenpairs(&ar, &b, 1, &opts).unwrap();
        assert!(d.values[0] > 0.1);
        assert!((d.values[0] - i.values[0]).abs() < 1e-8);
    }

    #[test]
    fn nullspace_basis_is_orthogonal_to_constraints() {
        let q = orthonormalize_rows(&[vec![1.0, 1.0, 1.0, 1.0], vec![1.0, 0.0, 0.0, -1.0], vec![2.0, 1.0, 1.0, 0.0]]);
        assert_eq!(q.len(), 2);
        let z = constraint_nullspace(&q, 4);
        assert_eq!(z.ncols(), 2);
        let zz = z.transpose() * &z;
        assert!((zz - DMatrix::identity(2, 2)).norm() < 1e-12);
        for c in &q {
            for j in 0..2 {
                assert!(z.column(j).iter().zip(c).map(|(a, b)| a * b).sum::<f64>().abs() < 1e-12);
            }
        }
    }
}

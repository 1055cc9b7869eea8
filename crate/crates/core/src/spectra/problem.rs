//! An inequality `LHS(x) <= C RHS(x)` over an admissible discrete space.

use serde::{Deserialize, Serialize};

use super::form::{FormKind, OperatorMatrix};
use crate::calculus::{CurvatureProvenance, WeightedOperator};
use crate::error::{Error, Result};
use crate::geometry::RegionKind;
use crate::norms::Exponent;
use crate::num::{dot, norm2, Real};
use crate::sparse::SparseMatrix;

/// One summand of an inequality side. Finite-`p` sides stack the p-th powers of
/// their terms; sup sides take the largest term.
#[derive(Debug, Clone, PartialEq)]
pub enum Term<T> {
    /// `sum_r w_r |(L x)_r|^p`
    Lp(WeightedOperator<T>),
    /// `sum_i w_i |x_i - mean_w x|^p`
    Centered(Vec<T>),
    /// `sum_l |l . x|^p`
    Moment(Vec<Vec<T>>),
    /// `max |x - mean_w x|`, or `max |x|` without weights.
    SupValue(Option<Vec<T>>),
    /// `max_i (sum_a (D_a x)_i^2)^(1/2)`
    SupGradient(Vec<SparseMatrix<T>>),
}

fn weighted_mean<T: Real>(w: &[T], x: &[T]) -> T {
    let total = w.iter().fold(T::zero(), |a, &v| a + v);
    dot(w, x) / total
}

impl<T: Real> Term<T> {
    pub fn is_sup(&self) -> bool {
        matches!(self, Term::SupValue(_) | Term::SupGradient(_))
    }

    fn power_sum(&self, x: &[T], p: T) -> T {
        let pw = |v: T| if v == T::zero() { T::zero() } else { v.abs().powf(p) };
        match self {
            Term::Lp(op) => op.power_sum(x, p),
            Term::Centered(w) => {
                let m = weighted_mean(w, x);
                w.iter().zip(x).fold(T::zero(), |a, (&wi, &xi)| a + wi * pw(xi - m))
            }
            Term::Moment(ls) => ls.iter().fold(T::zero(), |a, l| a + pw(dot(l, x))),
            Term::SupValue(_) | Term::SupGradient(_) => self.sup(x),
        }
    }

    fn sup(&self, x: &[T]) -> T {
        match self {
            Term::Lp(op) => op.sup(x),
            Term::Centered(w) | Term::SupValue(Some(w)) => {
                let m = weighted_mean(w, x);
                x.iter().fold(T::zero(), |a, &v| a.max((v - m).abs()))
            }
            Term::SupValue(None) => x.iter().fold(T::zero(), |a, &v| a.max(v.abs())),
            Term::Moment(ls) => ls.iter().fold(T::zero(), |a, l| a.max(dot(l, x).abs())),
            Term::SupGradient(ds) => {
                let parts: Vec<Vec<T>> = ds.iter().map(|d| d.mul_vec(x)).collect();
                (0..parts.first().map_or(0, Vec::len))
                    .map(|i| parts.iter().fold(T::zero(), |a, g| a + g[i] * g[i]).sqrt())
                    .fold(T::zero(), |a, v| a.max(v))
            }
        }
    }

    /// `p = 2` form on full unknowns. A centered term contributes its plain
    /// mass, which is exact on the mean-zero subspace it is paired with.
    fn form(&self, n: usize) -> Result<OperatorMatrix<T>> {
        match self {
            Term::Lp(op) => Ok(OperatorMatrix::from_sparse(FormKind::Composite, op.form())),
            Term::Centered(w) => Ok(OperatorMatrix::from_sparse(FormKind::Mass, SparseMatrix::diagonal(w))),
            Term::Moment(ls) => Ok(OperatorMatrix {
                kind: FormKind::RankOneTrace,
                sparse: SparseMatrix::zeros(n, n),
                low_rank: ls.iter().map(|l| (T::one(), l.clone())).collect(),
            }),
            _ => Err(Error::UnsupportedKind { kind: "sup term".into(), carrier: "quadratic form".into() }),
        }
    }
}

/// Value of one side of an inequality.
pub fn side_value<T: Real>(terms: &[Term<T>], x: &[T], p: Exponent) -> T {
    if p.is_infinite() || terms.iter().any(Term::is_sup) {
        return terms.iter().fold(T::zero(), |a, t| a.max(t.sup(x)));
    }
    let pr: T = p.as_real();
    terms.iter().fold(T::zero(), |a, t| a + t.power_sum(x, pr)).powf(T::one() / pr)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshDescriptor {
    pub shape: String,
    pub carrier: String,
    pub level: usize,
    pub nodes: usize,
    pub dofs: usize,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSummary {
    pub name: String,
    pub kind: RegionKind,
    pub nodes: usize,
    pub measure: f64,
}

/// Outcome of evaluating `LHS / RHS` on one field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ratio<T> {
    Value(T),
    /// Both sides vanish.
    ZeroOverZero,
    /// `RHS = 0 < LHS`.
    Unbounded,
}

/// An inequality on a concrete mesh. Sides act on full unknowns (nodal values,
/// or node-major vectors); admissible fields are `E x` with reduced `x`
/// satisfying the orthonormal `constraints`. `E` has orthonormal columns.
#[derive(Debug, Clone)]
pub struct Problem<T> {
    pub id: String,
    pub lhs: Vec<Term<T>>,
    pub rhs: Vec<Term<T>>,
    pub embedding: SparseMatrix<T>,
    pub constraints: Vec<Vec<T>>,
    /// Weights of a mean-zero constraint, projected by subtracting the mean.
    pub mean_zero: Option<Vec<T>>,
    pub components: usize,
    pub positions: Vec<Vec<T>>,
    pub mesh: MeshDescriptor,
    pub regions: Vec<RegionSummary>,
    pub provenance: Option<CurvatureProvenance>,
}

impl<T: Real> Problem<T> {
    pub fn reduced_dim(&self) -> usize {
        self.embedding.ncols()
    }

    pub fn full_dim(&self) -> usize {
        self.embedding.nrows()
    }

    pub fn is_sup(&self) -> bool {
        self.lhs.iter().chain(&self.rhs).any(Term::is_sup)
    }

    pub fn expand(&self, x: &[T]) -> Vec<T> {
        self.embedding.mul_vec(x)
    }

    /// Orthogonal projection of a full field onto the range of `E`.
    pub fn restrict(&self, full: &[T]) -> Vec<T> {
        self.embedding.mul_transpose_vec(full)
    }

    /// Projection onto the constraint subspace: mean subtraction for mean-zero
    /// problems, orthogonal projection otherwise.
    pub fn project(&self, x: &[T]) -> Vec<T> {
        if let (Some(w), 1) = (&self.mean_zero, self.constraints.len()) {
            let m = weighted_mean(w, x);
            return x.iter().map(|&v| v - m).collect();
        }
        let mut y = x.to_vec();
        for _ in 0..2 {
            for c in &self.constraints {
                let s = dot(c, &y);
                y.iter_mut().zip(c).for_each(|(yi, &ci)| *yi -= s * ci);
            }
        }
        y
    }

    /// Largest `|c . x| / |x|` over the constraints.
    pub fn constraint_defect(&self, x: &[T]) -> T {
        let nx = norm2(x);
        if nx == T::zero() {
            return T::zero();
        }
        self.constraints.iter().fold(T::zero(), |a, c| a.max(dot(c, x).abs() / nx))
    }

    pub fn lhs_value(&self, x: &[T], p: Exponent) -> T {
        side_value(&self.lhs, &self.expand(x), p)
    }

    pub fn rhs_value(&self, x: &[T], p: Exponent) -> T {
        side_value(&self.rhs, &self.expand(x), p)
    }

    pub fn ratio(&self, x: &[T], p: Exponent) -> Ratio<T> {
        let full = self.expand(x);
        let l = side_value(&self.lhs, &full, p);
        let r = side_value(&self.rhs, &full, p);
        let tiny = T::lit(1e-300_f64.max(f64::MIN_POSITIVE));
        match (l > tiny, r > tiny) {
            (false, false) => Ratio::ZeroOverZero,
            (true, false) => Ratio::Unbounded,
            _ => Ratio::Value(l / r),
        }
    }

    fn side_form(&self, terms: &[Term<T>]) -> Result<OperatorMatrix<T>> {
        let n = self.full_dim();
        let mut total = OperatorMatrix::from_sparse(FormKind::Composite, SparseMatrix::zeros(n, n));
        for t in terms {
            total = total.add(&t.form(n)?)?;
        }
        total.pull_back(&self.embedding)
    }

    /// `(A, B)` on reduced unknowns: `A` from the right-hand side, `B` from the left.
    pub fn forms(&self) -> Result<(OperatorMatrix<T>, OperatorMatrix<T>)> {
        Ok((self.side_form(&self.rhs)?, self.side_form(&self.lhs)?))
    }

    /// The same problem with one right-hand-side term removed.
    pub fn without_rhs_term(&self, index: usize) -> Self {
        let mut p = self.clone();
        if index < p.rhs.len() {
            p.rhs.remove(index);
        }
        p.id = format!("{}~{index}", self.id);
        p
    }

    /// CSV of an admissible field: positions then components.
    pub fn field_csv(&self, x: &[T]) -> String {
        let full = self.expand(x);
        let k = self.components;
        let d = self.positions.first().map_or(0, Vec::len);
        let mut out = String::from("node");
        for a in 0..d {
            out.push_str(&format!(",x{}", a + 1));
        }
        if k == 1 {
            out.push_str(",value");
        } else {
            for c in 0..k {
                out.push_str(&format!(",u{}", c + 1));
            }
        }
        out.push('\n');
        for (i, pos) in self.positions.iter().enumerate() {
            out.push_str(&i.to_string());
            for v in pos {
                out.push_str(&format!(",{v:e}"));
            }
            for c in 0..k {
                out.push_str(&format!(",{:e}", full[i * k + c]));
            }
            out.push('\n');
        }
        out
    }
}

/// Columns of the identity at `keep` (full x kept).
pub(crate) fn selection<T: Real>(full: usize, keep: &[usize]) -> SparseMatrix<T> {
    SparseMatrix::from_triplets(full, keep.len(), keep.iter().enumerate().map(|(j, &i)| (i, j, T::one())).collect())
}

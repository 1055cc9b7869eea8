//! Norms, seminorms, averages and trace functionals.

use serde::{Deserialize, Serialize};

use crate::calculus::{Discretization, MultiIndex, ScalarField, SymmetricTensorField, VectorField, WeightedOperator};
use crate::error::{Error, Result};
use crate::geometry::MarkedRegion;
use crate::num::{norm2, Real};

/// Integrability exponent `p` in `[1, inf]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Exponent(f64);

impl Exponent {
    pub const TWO: Exponent = Exponent(2.0);
    pub const INFINITY: Exponent = Exponent(f64::INFINITY);

    pub fn new(p: f64) -> Result<Self> {
        if p >= 1.0 {
            Ok(Exponent(p))
        } else {
            Err(Error::InvalidP(p))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    pub fn as_real<T: Real>(self) -> T {
        T::lit(self.0)
    }
}

impl TryFrom<f64> for Exponent {
    type Error = Error;
    fn try_from(p: f64) -> Result<Self> {
        Exponent::new(p)
    }
}

impl From<Exponent> for f64 {
    fn from(p: Exponent) -> f64 {
        p.0
    }
}

/// Norm variants: standard Sobolev, Korn-equivalent (with or without the `L_p`
/// term) and functional-augmented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormVariant {
    Standard,
    KornEquivWithL,
    KornEquivDefOnly,
    FunctionalAugmented,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    pub p: Exponent,
    pub m: usize,
    pub variant: NormVariant,
}

impl NormSpec {
    pub fn standard(p: f64, m: usize) -> Result<Self> {
        Ok(NormSpec { p: Exponent::new(p)?, m, variant: NormVariant::Standard })
    }
}

/// Fields with an `L_p` norm: components stack by p-th powers; off-diagonal
/// tensor entries count twice (once for `(j,k)` and once for `(k,j)`).
pub trait LpField<T: Real> {
    fn nodes(&self) -> usize;
    fn components(&self) -> usize;
    fn value(&self, node: usize, component: usize) -> T;
    fn multiplicity(&self, _component: usize) -> T {
        T::one()
    }
}

impl<T: Real> LpField<T> for ScalarField<T> {
    fn nodes(&self) -> usize {
        self.values.len()
    }
    fn components(&self) -> usize {
        1
    }
    fn value(&self, node: usize, _: usize) -> T {
        self.values[node]
    }
}

impl<T: Real> LpField<T> for VectorField<T> {
    fn nodes(&self) -> usize {
        VectorField::nodes(self)
    }
    fn components(&self) -> usize {
        self.dim
    }
    fn value(&self, node: usize, c: usize) -> T {
        self.values[node * self.dim + c]
    }
}

impl<T: Real> LpField<T> for SymmetricTensorField<T> {
    fn nodes(&self) -> usize {
        SymmetricTensorField::nodes(self)
    }
    fn components(&self) -> usize {
        Self::entries_per_node(self.dim)
    }
    fn value(&self, node: usize, c: usize) -> T {
        self.values[node * self.components() + c]
    }
    fn multiplicity(&self, c: usize) -> T {
        let (j, k) = crate::calculus::packed_pairs(self.dim)[c];
        if j == k {
            T::one()
        } else {
            T::lit(2.0)
        }
    }
}

/// `(sum_nodes w sum_c mult_c |value|^p)^(1/p)`; `p = inf` gives the largest
/// absolute entry.
pub fn lp_norm<T: Real>(f: &impl LpField<T>, p: Exponent, weights: &[T]) -> Result<T> {
    if weights.len() != f.nodes() {
        return Err(Error::DimensionMismatch { expected: f.nodes(), found: weights.len() });
    }
    if p.is_infinite() {
        let mut m = T::zero();
        for i in 0..f.nodes() {
            for c in 0..f.components() {
                m = m.max(f.value(i, c).abs());
            }
        }
        return Ok(m);
    }
    let pr: T = p.as_real();
    let mut s = T::zero();
    for i in 0..f.nodes() {
        for c in 0..f.components() {
            let v = f.value(i, c).abs();
            if v > T::zero() {
                s += weights[i] * f.multiplicity(c) * v.powf(pr);
            }
        }
    }
    Ok(s.powf(T::one() / pr))
}

/// Weighted mean `sum w f / sum w`.
pub fn mean_value<T: Real>(f: &ScalarField<T>, weights: &[T]) -> Result<T> {
    if weights.len() != f.len() {
        return Err(Error::DimensionMismatch { expected: f.len(), found: weights.len() });
    }
    let total = weights.iter().fold(T::zero(), |a, &w| a + w);
    if !(total > T::zero()) {
        return Err(Error::ZeroMeasure);
    }
    Ok(f.values.iter().zip(weights).fold(T::zero(), |a, (&v, &w)| a + v * w) / total)
}

fn stacked<T: Real>(parts: &[T], p: Exponent) -> T {
    if p.is_infinite() {
        return parts.iter().fold(T::zero(), |m, &v| m.max(v));
    }
    let pr: T = p.as_real();
    parts.iter().fold(T::zero(), |a, &v| a + v.powf(pr)).powf(T::one() / pr)
}

fn op_norm<T: Real>(op: &WeightedOperator<T>, x: &[T], p: Exponent) -> T {
    if p.is_infinite() {
        op.sup(x)
    } else {
        op.norm(x, p.as_real())
    }
}

/// `(sum_{|alpha| <= m} ||d^alpha f||_p^p)^(1/p)` with Guenter derivatives on surfaces.
pub fn sobolev_norm<T: Real, D: Discretization<T> + ?Sized>(
    mesh: &D,
    f: &ScalarField<T>,
    spec: &NormSpec,
) -> Result<T> {
    if spec.m > mesh.max_order() {
        return Err(Error::OrderOutOfScope { order: spec.m, max: mesh.max_order() });
    }
    if f.len() != mesh.num_nodes() {
        return Err(Error::DimensionMismatch { expected: mesh.num_nodes(), found: f.len() });
    }
    let parts =
        (0..=spec.m).map(|k| Ok(op_norm(&mesh.order_operator(k)?, &f.values, spec.p))).collect::<Result<Vec<_>>>()?;
    Ok(stacked(&parts, spec.p))
}

/// Korn-equivalent norm of a vector field: `(||U||^p + ||Def U||^p)^(1/p)` or
/// `||Def U||` alone. Surface fields must be tangential.
pub fn korn_equivalent_norm<T: Real, D: Discretization<T> + ?Sized>(
    mesh: &D,
    u: &VectorField<T>,
    variant: NormVariant,
    p: Exponent,
) -> Result<T> {
    if u.dim != mesh.ambient_dim() || u.nodes() != mesh.num_nodes() {
        return Err(Error::DimensionMismatch {
            expected: mesh.ambient_dim() * mesh.num_nodes(),
            found: u.values.len(),
        });
    }
    if let Some(normals) = mesh.normals() {
        let scale = u.values.iter().fold(T::one(), |m, v| m.max(v.abs()));
        for i in 0..u.nodes() {
            let defect = crate::num::dot(u.at(i), &normals[i * u.dim..(i + 1) * u.dim]).abs();
            if defect > T::lit(1e-10) * scale {
                return Err(Error::NotTangential { node: i, defect: defect.to_f64_lossy() });
            }
        }
    }
    let def = op_norm(&mesh.deformation_operator()?, &u.values, p);
    match variant {
        NormVariant::KornEquivDefOnly => Ok(def),
        NormVariant::KornEquivWithL => Ok(stacked(&[lp_norm(u, p, mesh.node_weights())?, def], p)),
        other => Err(Error::UnsupportedKind { kind: format!("{other:?}"), carrier: "vector field".into() }),
    }
}

/// Shape of a trace functional.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceForm {
    /// `[sum_{|beta| < m} |int (d^beta f)^+|^p]^(1/p)`
    Moment,
    /// `[int |f^+|^p]^(1/p)`
    LpTrace,
}

/// Trace functional over a marked region; positively homogeneous of degree one.
pub fn trace_moment_functional<T: Real, D: Discretization<T> + ?Sized>(
    mesh: &D,
    f: &ScalarField<T>,
    region: &MarkedRegion<T>,
    m: usize,
    p: Exponent,
    form: TraceForm,
) -> Result<T> {
    if !(region.measure() > T::zero()) {
        return Err(Error::ZeroMeasure);
    }
    if region.parent_nodes != f.len() {
        return Err(Error::DimensionMismatch { expected: region.parent_nodes, found: f.len() });
    }
    match form {
        TraceForm::LpTrace => lp_norm(f, p, &region.weights),
        TraceForm::Moment => {
            if m == 0 || m > mesh.max_order() + 1 {
                return Err(Error::OrderOutOfScope { order: m, max: mesh.max_order() + 1 });
            }
            let mut parts = Vec::new();
            for order in 0..m {
                for beta in MultiIndex::all_of_order(mesh.ambient_dim(), order) {
                    let d = mesh.derivative_matrix(&beta)?.mul_vec(&f.values);
                    let integral = d.iter().zip(&region.weights).fold(T::zero(), |a, (&v, &w)| a + v * w);
                    parts.push(integral.abs());
                }
            }
            Ok(stacked(&parts, p))
        }
    }
}

/// `(max |f - mean f|, max |grad f|)` over the nodes.
pub fn sup_seminorm_pair<T: Real, D: Discretization<T> + ?Sized>(mesh: &D, f: &ScalarField<T>) -> Result<(T, T)> {
    let mean = mean_value(f, mesh.node_weights())?;
    let dev = f.values.iter().fold(T::zero(), |m, &v| m.max((v - mean).abs()));
    let g = mesh.nodal_gradient(f)?;
    let grad = (0..g.nodes()).fold(T::zero(), |m, i| m.max(norm2(g.at(i))));
    Ok((dev, grad))
}

//! Assembled quadratic forms.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::calculus::{
    cell_deformation_operator, cell_gradient_operator, deformation_operator, gradient_operator, order_operator,
    tangential_embedding, vector_mass, WeightedOperator,
};
use crate::error::{Error, Result};
use crate::geometry::{Carrier, CylinderMesh, DomainGrid, MarkedRegion, Mesh, SurfaceMesh};
use crate::num::{dot, Real};
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormKind {
    Mass,
    VectorMass,
    TangentialMass,
    StiffnessGrad,
    StiffnessSurfaceGrad,
    StiffnessDef,
    StiffnessSurfaceDef,
    RankOneTrace,
    RegionMass,
    SobolevM(usize),
    Composite,
}

/// Symmetric form `S + sum_i c_i u_i u_i^T` with sparse `S` and a short list of
/// rank-one terms (trace moments).
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix<T> {
    pub kind: FormKind,
    pub sparse: SparseMatrix<T>,
    pub low_rank: Vec<(T, Vec<T>)>,
}

impl<T: Real> OperatorMatrix<T> {
    pub fn from_sparse(kind: FormKind, sparse: SparseMatrix<T>) -> Self {
        OperatorMatrix { kind, sparse, low_rank: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.sparse.nrows()
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        let mut y = self.sparse.mul_vec(x);
        for (c, u) in &self.low_rank {
            let s = *c * dot(u, x);
            y.iter_mut().zip(u).for_each(|(yi, &ui)| *yi += s * ui);
        }
        y
    }

    pub fn quadratic(&self, x: &[T]) -> T {
        dot(x, &self.apply(x))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let mut low_rank = self.low_rank.clone();
        low_rank.extend(other.low_rank.iter().cloned());
        Ok(OperatorMatrix { kind: FormKind::Composite, sparse: self.sparse.add(&other.sparse)?, low_rank })
    }

    /// `E^T F E`.
    pub fn pull_back(&self, e: &SparseMatrix<T>) -> Result<Self> {
        let et = e.transpose();
        let sparse = et.matmul(&self.sparse)?.matmul(e)?;
        let low_rank = self.low_rank.iter().map(|(c, u)| (*c, et.mul_vec(u))).collect();
        Ok(OperatorMatrix { kind: self.kind, sparse, low_rank })
    }

    pub fn to_dense(&self) -> DMatrix<T> {
        let mut d = self.sparse.to_dense();
        for (c, u) in &self.low_rank {
            for i in 0..u.len() {
                if u[i] == T::zero() {
                    continue;
                }
                for j in 0..u.len() {
                    d[(i, j)] += *c * u[i] * u[j];
                }
            }
        }
        d
    }

    /// Largest relative asymmetry of the sparse part.
    pub fn asymmetry(&self) -> T {
        self.sparse.asymmetry()
    }
}

/// Carrier of a registered inequality.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain<T> {
    Grid(DomainGrid<T>),
    Surface(SurfaceMesh<T>),
    Cylinder(CylinderMesh<T>),
}

impl<T: Real> From<Mesh<T>> for Domain<T> {
    fn from(m: Mesh<T>) -> Self {
        match m {
            Mesh::Grid(g) => Domain::Grid(g),
            Mesh::Surface(s) => Domain::Surface(s),
        }
    }
}

impl<T: Real> Domain<T> {
    pub fn carrier(&self) -> &dyn Carrier<T> {
        match self {
            Domain::Grid(g) => g,
            Domain::Surface(s) => s,
            Domain::Cylinder(c) => c,
        }
    }

    pub fn carrier_name(&self) -> &'static str {
        match self {
            Domain::Grid(_) => "grid",
            Domain::Surface(_) => "surface",
            Domain::Cylinder(_) => "cylinder",
        }
    }

    pub fn as_grid(&self) -> Option<&DomainGrid<T>> {
        match self {
            Domain::Grid(g) => Some(g),
            _ => None,
        }
    }

    pub fn as_surface(&self) -> Option<&SurfaceMesh<T>> {
        match self {
            Domain::Surface(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_cylinder(&self) -> Option<&CylinderMesh<T>> {
        match self {
            Domain::Cylinder(c) => Some(c),
            _ => None,
        }
    }

    /// Smallest edge length scale: grid spacing or longest surface edge.
    pub fn resolution(&self) -> T {
        match self {
            Domain::Grid(g) => g.spacing().iter().fold(T::zero(), |m, &h| m.max(h)),
            Domain::Surface(s) => s.max_edge_length(),
            Domain::Cylinder(c) => {
                let (a, b) = c.interval();
                let ht = (b - a) / T::from_usize_lossy(c.layers() - 1);
                let hb = match c.base() {
                    crate::geometry::CylinderBase::Grid(g) => g.spacing().iter().fold(T::zero(), |m, &h| m.max(h)),
                    crate::geometry::CylinderBase::Surface(s) => s.max_edge_length(),
                };
                ht.max(hb)
            }
        }
    }

    fn unsupported(&self, kind: FormKind) -> Error {
        Error::UnsupportedKind { kind: format!("{kind:?}"), carrier: self.carrier_name().into() }
    }
}

fn need_region<'a, T>(kind: FormKind, region: Option<&'a MarkedRegion<T>>) -> Result<&'a MarkedRegion<T>> {
    region.ok_or_else(|| Error::MissingRegion(format!("{kind:?}")))
}

/// Assembles the quadratic form of `kind`. Scalar kinds act on nodal values,
/// `VectorMass`/`StiffnessDef` on node-major vectors, and the surface vector
/// kinds (`TangentialMass`, `StiffnessSurfaceDef`) on tangential coefficients.
pub fn assemble_quadratic_form<T: Real>(
    kind: FormKind,
    domain: &Domain<T>,
    region: Option<&MarkedRegion<T>>,
) -> Result<OperatorMatrix<T>> {
    let form = |op: WeightedOperator<T>| OperatorMatrix::from_sparse(kind, op.form());
    match (kind, domain) {
        (FormKind::Mass, d) => {
            Ok(OperatorMatrix::from_sparse(kind, SparseMatrix::diagonal(d.carrier().node_weights())))
        }
        (FormKind::VectorMass, d) => {
            let c = d.carrier();
            Ok(form(vector_mass(c.node_weights(), c.ambient_dim())))
        }
        (FormKind::TangentialMass, Domain::Surface(s)) => {
            let e = tangential_embedding(s)?;
            Ok(form(vector_mass(s.vertex_weights(), s.ambient_dim()).compose(&e)?))
        }
        (FormKind::StiffnessGrad, Domain::Grid(g)) => Ok(form(gradient_operator(g)?)),
        (FormKind::StiffnessSurfaceGrad, Domain::Surface(s)) => Ok(form(cell_gradient_operator(s)?)),
        (FormKind::StiffnessDef, Domain::Grid(g)) => Ok(form(deformation_operator(g)?)),
        (FormKind::StiffnessSurfaceDef, Domain::Surface(s)) => {
            let e = tangential_embedding(s)?;
            Ok(form(cell_deformation_operator(s)?.compose(&e)?))
        }
        (FormKind::RankOneTrace, d) => {
            let r = need_region(kind, region)?;
            Ok(OperatorMatrix {
                kind,
                sparse: SparseMatrix::zeros(d.carrier().num_nodes(), d.carrier().num_nodes()),
                low_rank: vec![(T::one(), r.weights.clone())],
            })
        }
        (FormKind::RegionMass, _) => {
            let r = need_region(kind, region)?;
            Ok(OperatorMatrix::from_sparse(kind, SparseMatrix::diagonal(&r.weights)))
        }
        (FormKind::SobolevM(m), Domain::Grid(g)) => {
            let mut total = SparseMatrix::diagonal(g.node_weights());
            for k in 1..=m {
                let op = if k == 1 { gradient_operator(g)? } else { order_operator(g, k)? };
                total = total.add(&op.form())?;
            }
            Ok(OperatorMatrix::from_sparse(kind, total))
        }
        (FormKind::SobolevM(m), Domain::Surface(s)) if m <= 1 => {
            let mut total = SparseMatrix::diagonal(s.vertex_weights());
            if m == 1 {
                total = total.add(&cell_gradient_operator(s)?.form())?;
            }
            Ok(OperatorMatrix::from_sparse(kind, total))
        }
        (k, d) => Err(d.unsupported(k)),
    }
}

//! Registered inequalities: admissible space, left- and right-hand side.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::form::Domain;
use super::problem::{selection, MeshDescriptor, Problem, RegionSummary, Term};
use crate::calculus::{
    cell_deformation_operator, cell_gradient_operator, deformation_operator, gradient_operator, jacobian_operator,
    tangential_embedding, vector_mass, CurvatureProvenance, Discretization, MultiIndex, WeightedOperator,
};
use crate::error::{Error, Result};
use crate::geometry::{
    build_mesh, extrude_cylinder, extrude_region, mark_region, Carrier, CylinderBase, CylinderMesh, DomainGrid,
    MarkedRegion, Mesh, RegionKind, ShapeSpec, SurfaceMesh,
};
use crate::num::Real;
use crate::sparse::SparseMatrix;

/// One displayed inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum InequalityId {
    PDomain,
    FDomain,
    P0Domain,
    CylF,
    CylP0,
    CylFlatF,
    CylFlatP0,
    PSurface,
    FSurface,
    P0Surface,
    SupP,
    SupP0,
    FKDomain,
    FKSurface,
    PKDomain,
    PKSurface,
    WmP { m: usize, surface: bool },
    WmP0 { m: usize, surface: bool },
    WmF { m: usize, surface: bool },
    CylKF,
    CylKP0,
    CylFlatKF,
    CylFlatKP0,
    KornI,
    KornISurf,
    KornII,
    KornIISurf,
}

/// Where an inequality lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CarrierClass {
    Grid,
    Surface,
    /// Hypersurface base times an interval.
    SurfaceCylinder,
    /// Flat base times an interval.
    FlatCylinder,
}

use InequalityId::*;

impl InequalityId {
    /// Every registered id (higher-order families at their supported orders).
    pub fn all() -> Vec<InequalityId> {
        vec![
            PDomain,
            FDomain,
            P0Domain,
            CylF,
            CylP0,
            CylFlatF,
            CylFlatP0,
            PSurface,
            FSurface,
            P0Surface,
            SupP,
            SupP0,
            FKDomain,
            FKSurface,
            PKDomain,
            PKSurface,
            WmP { m: 1, surface: false },
            WmP { m: 2, surface: false },
            WmP { m: 1, surface: true },
            WmP0 { m: 1, surface: false },
            WmP0 { m: 2, surface: false },
            WmP0 { m: 1, surface: true },
            WmF { m: 1, surface: false },
            WmF { m: 2, surface: false },
            WmF { m: 1, surface: true },
            CylKF,
            CylKP0,
            CylFlatKF,
            CylFlatKP0,
            KornI,
            KornISurf,
            KornII,
            KornIISurf,
        ]
    }

    pub fn name(&self) -> String {
        let s = |surface: bool| if surface { "_surf" } else { "" };
        match *self {
            PDomain => "P_domain".into(),
            FDomain => "F_domain".into(),
            P0Domain => "P0_domain".into(),
            CylF => "Cyl_F".into(),
            CylP0 => "Cyl_P0".into(),
            CylFlatF => "CylFlat_F".into(),
            CylFlatP0 => "CylFlat_P0".into(),
            PSurface => "P_surface".into(),
            FSurface => "F_surface".into(),
            P0Surface => "P0_surface".into(),
            SupP => "Sup_P".into(),
            SupP0 => "Sup_P0".into(),
            FKDomain => "FK_domain".into(),
            FKSurface => "FK_surface".into(),
            PKDomain => "PK_domain".into(),
            PKSurface => "PK_surface".into(),
            WmP { m, surface } => format!("Wm_P{m}{}", s(surface)),
            WmP0 { m, surface } => format!("Wm_P0_{m}{}", s(surface)),
            WmF { m, surface } => format!("Wm_F{m}{}", s(surface)),
            CylKF => "CylK_F".into(),
            CylKP0 => "CylK_P0".into(),
            CylFlatKF => "CylFlatK_F".into(),
            CylFlatKP0 => "CylFlatK_P0".into(),
            KornI => "KornI".into(),
            KornISurf => "KornI_surf".into(),
            KornII => "KornII".into(),
            KornIISurf => "KornII_surf".into(),
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            PDomain => "Poincare: ||f - mean f|| <= C ||grad f|| on a domain",
            FDomain => "Friedrichs: ||f|| <= C [||grad f||^p + |int_M0 f|^p]^(1/p) on a domain",
            P0Domain => "||f|| <= C ||grad f|| for f vanishing on M0",
            CylF => "cylinder over a hypersurface: ||f|| <= C [||grad_C f||^p + ||f||_{M0}^p]^(1/p)",
            CylP0 => "cylinder over a hypersurface: ||f|| <= C ||grad_C f|| for f vanishing on the strip",
            CylFlatF => "flat cylinder: ||f|| <= C [||grad_w f||^p + ||f||_{G0 x I}^p]^(1/p)",
            CylFlatP0 => "flat cylinder: ||f|| <= C ||grad_w f|| for f vanishing on G0 x I",
            PSurface => "Poincare on a hypersurface with surface gradient",
            FSurface => "Friedrichs on a hypersurface with a trace moment",
            P0Surface => "||f|| <= C ||grad_C f|| for f vanishing on G0",
            SupP => "uniform-norm Poincare: max |f - mean f| <= C max |grad f|",
            SupP0 => "uniform-norm bound for f vanishing at a point: max |f| <= C max |grad f|",
            FKDomain => "Friedrichs-Korn: ||U|| <= C [||Def U||^p + ||U||_{M0}^p]^(1/p)",
            FKSurface => "surface Friedrichs-Korn with Def_C",
            PKDomain => "Poincare-Korn: ||U|| <= C ||Def U|| for U vanishing on M0",
            PKSurface => "surface Poincare-Korn: ||U|| <= C ||Def_C U|| for U vanishing on G0",
            WmP { .. } => "higher order: ||f||_{W^m} <= C [sum ||d^a f||^p + sum |int_M0 d^b f|^p]^(1/p)",
            WmP0 { .. } => "higher order: ||f||_{W^m} <= C (sum ||d^a f||^p)^(1/p) for vanishing traces",
            WmF { .. } => "higher order: ||f||_{W^m} <= C [sum ||d^a f||^p + int_M0 |f|^p]^(1/p)",
            CylKF => "cylinder Korn: ||U|| <= C [||Def_C U||^p + ||U||_{M0}^p]^(1/p)",
            CylKP0 => "cylinder Korn: ||U|| <= C ||Def_C U|| for U vanishing on the strip",
            CylFlatKF => "flat cylinder Korn: ||U|| <= C [||Def_w U||^p + ||U||_{G0 x I}^p]^(1/p)",
            CylFlatKP0 => "flat cylinder Korn: ||U|| <= C ||Def_w U|| for U vanishing on G0 x I",
            KornI => "Korn I: ||U||_{W^1} <= C [||U||^p + ||Def U||^p]^(1/p)",
            KornISurf => "surface Korn I with Def_C",
            KornII => "Korn II: ||U||_{W^1} <= C ||Def U|| for U vanishing on M0",
            KornIISurf => "surface Korn II: ||U||_{W^1} <= C ||Def_C U|| for U vanishing on G0",
        }
    }

    pub fn carrier_class(&self) -> CarrierClass {
        match self {
            PDomain | FDomain | P0Domain | SupP | SupP0 | FKDomain | PKDomain | KornI | KornII => CarrierClass::Grid,
            WmP { surface, .. } | WmP0 { surface, .. } | WmF { surface, .. } => {
                if *surface {
                    CarrierClass::Surface
                } else {
                    CarrierClass::Grid
                }
            }
            PSurface | FSurface | P0Surface | FKSurface | PKSurface | KornISurf | KornIISurf => CarrierClass::Surface,
            CylF | CylP0 | CylKF | CylKP0 => CarrierClass::SurfaceCylinder,
            CylFlatF | CylFlatP0 | CylFlatKF | CylFlatKP0 => CarrierClass::FlatCylinder,
        }
    }

    pub fn is_sup(&self) -> bool {
        matches!(self, SupP | SupP0)
    }

    pub fn is_vector(&self) -> bool {
        matches!(
            self,
            FKDomain
                | FKSurface
                | PKDomain
                | PKSurface
                | CylKF
                | CylKP0
                | CylFlatKF
                | CylFlatKP0
                | KornI
                | KornISurf
                | KornII
                | KornIISurf
        )
    }

    /// Whether the id involves a deformation tensor (kernel checks apply).
    pub fn uses_def(&self) -> bool {
        self.is_vector()
    }

    /// The Friedrichs-type member of a Def family on the same carrier; its
    /// right-hand side leads with the bare deformation term.
    pub fn free_variant(&self) -> Option<InequalityId> {
        Some(match self {
            FKDomain | PKDomain | KornI | KornII => FKDomain,
            FKSurface | PKSurface | KornISurf | KornIISurf => FKSurface,
            CylKF | CylKP0 => CylKF,
            CylFlatKF | CylFlatKP0 => CylFlatKF,
            _ => return None,
        })
    }

    pub fn needs_region(&self) -> bool {
        !matches!(self, PDomain | PSurface | SupP | KornI | KornISurf)
    }

    /// Default shape (the base shape for cylinder ids).
    pub fn default_shape(&self) -> ShapeSpec {
        match self.carrier_class() {
            CarrierClass::Grid => ShapeSpec::Box { lower: vec![0.0, 0.0], upper: vec![1.0, 1.0], nodes: vec![17, 17] },
            CarrierClass::Surface => ShapeSpec::Sphere { radius: 1.0, subdivisions: 2 },
            CarrierClass::SurfaceCylinder => ShapeSpec::Circle { radius: 1.0, nodes: 32 },
            CarrierClass::FlatCylinder => {
                if self.is_vector() {
                    ShapeSpec::Box { lower: vec![0.0, 0.0], upper: vec![1.0, 1.0], nodes: vec![9, 9] }
                } else {
                    ShapeSpec::Interval { a: 0.0, b: 1.0, nodes: 33 }
                }
            }
        }
    }
}

impl fmt::Display for InequalityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for InequalityId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if let Some(id) = InequalityId::all().into_iter().find(|i| i.name() == s) {
            return Ok(id);
        }
        let (body, surface) = match s.strip_suffix("_surf") {
            Some(b) => (b, true),
            None => (s, false),
        };
        let parse_m = |t: &str| t.parse::<usize>().ok().filter(|&m| m >= 1);
        let id = if let Some(m) = body.strip_prefix("Wm_P0_").and_then(parse_m) {
            Some(WmP0 { m, surface })
        } else if let Some(m) = body.strip_prefix("Wm_P").and_then(parse_m) {
            Some(WmP { m, surface })
        } else if let Some(m) = body.strip_prefix("Wm_F").and_then(parse_m) {
            Some(WmF { m, surface })
        } else {
            None
        };
        id.ok_or_else(|| Error::Parse(format!("unknown inequality id `{s}`")))
    }
}

impl TryFrom<String> for InequalityId {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<InequalityId> for String {
    fn from(id: InequalityId) -> String {
        id.name()
    }
}

/// A region with the name it is reported under.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedRegion<T> {
    pub name: String,
    pub region: MarkedRegion<T>,
}

/// Mesh, regions and bookkeeping for one id.
#[derive(Debug, Clone)]
pub struct Setup<T> {
    pub id: InequalityId,
    pub shape: ShapeSpec,
    pub level: usize,
    pub domain: Domain<T>,
    pub regions: Vec<NamedRegion<T>>,
}

pub const DEFAULT_LAYERS: usize = 4;

/// Builds the carrier of `id` from `shape` (the base shape for cylinders).
pub fn build_domain<T: Real>(id: InequalityId, shape: &ShapeSpec, layers: usize) -> Result<Domain<T>> {
    let mesh = build_mesh::<T>(shape)?;
    let wrong = |mesh: &Mesh<T>| Error::UnsupportedKind {
        kind: id.name(),
        carrier: match mesh {
            Mesh::Grid(_) => "a grid".into(),
            Mesh::Surface(_) => "a surface".into(),
        },
    };
    match (id.carrier_class(), mesh) {
        (CarrierClass::Grid, Mesh::Grid(g)) => Ok(Domain::Grid(g)),
        (CarrierClass::Surface, Mesh::Surface(s)) => Ok(Domain::Surface(s)),
        (CarrierClass::SurfaceCylinder, Mesh::Surface(s)) if s.ambient_dim() == 2 => {
            Ok(Domain::Cylinder(extrude_cylinder(CylinderBase::Surface(s), (T::zero(), T::one()), layers)?))
        }
        (CarrierClass::FlatCylinder, Mesh::Grid(g)) => {
            Ok(Domain::Cylinder(extrude_cylinder(CylinderBase::Grid(g), (T::zero(), T::one()), layers)?))
        }
        (_, m) => Err(wrong(&m)),
    }
}

fn grid_face<T: Real>(g: &DomainGrid<T>, axes: &[usize]) -> Result<MarkedRegion<T>> {
    let lower = g.lower().to_vec();
    let tol: Vec<T> = (0..g.dim()).map(|a| T::lit(1e-9) * (g.upper()[a] - g.lower()[a])).collect();
    mark_region(g, |x| axes.iter().any(|&a| (x[a] - lower[a]).abs() <= tol[a]), RegionKind::BoundaryPart)
}

fn grid_corner<T: Real>(g: &DomainGrid<T>) -> Result<MarkedRegion<T>> {
    MarkedRegion::from_nodes(g, &[0], RegionKind::Point)
}

/// A marked curve or point on a surface mesh: the vertex nearest `(r, 0)` on a
/// curve, or a band around half of the great circle `x2 = 0, x1 >= 0`.
fn surface_region<T: Real>(s: &SurfaceMesh<T>) -> Result<MarkedRegion<T>> {
    if s.ambient_dim() == 2 {
        let best = (0..s.num_vertices())
            .max_by(|&a, &b| {
                let (pa, pb) = (s.vertex(a), s.vertex(b));
                (pa[0] - pa[1].abs()).partial_cmp(&(pb[0] - pb[1].abs())).unwrap()
            })
            .unwrap();
        return MarkedRegion::from_nodes(s, &[best], RegionKind::BoundaryPart);
    }
    let mut band = T::lit(0.5) * s.max_edge_length();
    let mut last = Error::EmptyRegion;
    for _ in 0..8 {
        match mark_region(s, |x| x[1].abs() <= band && x[0] >= -band, RegionKind::BoundaryPart) {
            Ok(r) => return Ok(r),
            Err(e) => last = e,
        }
        band *= T::lit(1.5);
    }
    Err(last)
}

fn base_region<T: Real>(base: &CylinderBase<T>) -> Result<MarkedRegion<T>> {
    match base {
        CylinderBase::Surface(s) => surface_region(s),
        CylinderBase::Grid(g) => grid_face(g, &[0]),
    }
}

/// The default marked region `M0` of `id` on `domain`, if the id uses one.
pub fn default_regions<T: Real>(id: InequalityId, domain: &Domain<T>) -> Result<Vec<NamedRegion<T>>> {
    if !id.needs_region() {
        return Ok(Vec::new());
    }
    let named = |name: &str, region| Ok(vec![NamedRegion { name: name.into(), region }]);
    match domain {
        Domain::Grid(g) => match id {
            SupP0 => named("corner", grid_corner(g)?),
            WmF { m, .. } if m >= 2 && g.dim() >= 2 => named("left_bottom", grid_face(g, &[0, 1])?),
            _ => named(if g.dim() == 1 { "left_end" } else { "left" }, grid_face(g, &[0])?),
        },
        Domain::Surface(s) => {
            named(if s.ambient_dim() == 2 { "point" } else { "half_great_circle" }, surface_region(s)?)
        }
        Domain::Cylinder(c) => named("strip", extrude_region(c, &base_region(c.base())?)?),
    }
}

/// Default setup of `id` at refinement `level` (shape defaults to the id's).
pub fn setup<T: Real>(id: InequalityId, shape: Option<&ShapeSpec>, level: usize, layers: usize) -> Result<Setup<T>> {
    let shape = shape.cloned().unwrap_or_else(|| id.default_shape()).refine(level);
    let domain = build_domain(id, &shape, layers)?;
    let regions = default_regions(id, &domain)?;
    Ok(Setup { id, shape, level, domain, regions })
}

impl<T: Real> Setup<T> {
    pub fn problem(&self) -> Result<Problem<T>> {
        let mut p = build_problem(self.id, &self.domain, &self.regions)?;
        p.mesh.shape = self.shape.name().into();
        p.mesh.level = self.level;
        Ok(p)
    }
}

fn region_summary<T: Real>(r: &NamedRegion<T>) -> RegionSummary {
    RegionSummary {
        name: r.name.clone(),
        kind: r.region.kind,
        nodes: r.region.nodes.len(),
        measure: r.region.measure().to_f64_lossy(),
    }
}

/// Kept dofs when all `components` of the region nodes are eliminated.
fn kept_dofs(region: &MarkedRegion<impl Real>, components: usize) -> Vec<usize> {
    region.complement().into_iter().flat_map(|i| (0..components).map(move |k| i * components + k)).collect()
}

fn region_mass<T: Real>(region: &MarkedRegion<T>, components: usize) -> WeightedOperator<T> {
    let op = WeightedOperator::mass(&region.weights);
    if components == 1 {
        op
    } else {
        op.componentwise(components)
    }
}

struct Builder<T> {
    lhs: Vec<Term<T>>,
    rhs: Vec<Term<T>>,
    embedding: SparseMatrix<T>,
    constraints: Vec<Vec<T>>,
    mean_zero: Option<Vec<T>>,
    components: usize,
    provenance: Option<CurvatureProvenance>,
}

impl<T: Real> Builder<T> {
    fn new(dofs: usize, components: usize) -> Self {
        Builder {
            lhs: Vec::new(),
            rhs: Vec::new(),
            embedding: SparseMatrix::identity(dofs),
            constraints: Vec::new(),
            mean_zero: None,
            components,
            provenance: None,
        }
    }
}

fn provenance_of<T: Real>(s: &SurfaceMesh<T>) -> CurvatureProvenance {
    if s.source().is_some() {
        CurvatureProvenance::Analytic
    } else {
        CurvatureProvenance::Discrete
    }
}

/// Assembles the problem of `id` on `domain`. The first region is `M0`.
pub fn build_problem<T: Real>(id: InequalityId, domain: &Domain<T>, regions: &[NamedRegion<T>]) -> Result<Problem<T>> {
    let carrier = domain.carrier();
    let n_nodes = carrier.num_nodes();
    let region = || regions.first().map(|r| &r.region).ok_or_else(|| Error::MissingRegion(id.name()));
    if let Some(r) = regions.first() {
        if r.region.parent_nodes != n_nodes {
            return Err(Error::DimensionMismatch { expected: n_nodes, found: r.region.parent_nodes });
        }
        if r.region.kind == RegionKind::Point && !id.is_sup() && id.needs_region() {
            return Err(Error::ZeroMeasure);
        }
    }
    let w = carrier.node_weights().to_vec();
    let unsupported = || Error::UnsupportedKind { kind: id.name(), carrier: domain.carrier_name().into() };

    let b = match (id, domain) {
        (PDomain | FDomain | P0Domain | SupP | SupP0, Domain::Grid(_))
        | (PSurface | FSurface | P0Surface, Domain::Surface(_)) => {
            let disc: &dyn Discretization<T> = match domain {
                Domain::Grid(g) => g,
                Domain::Surface(s) => s,
                _ => unreachable!(),
            };
            let mut b = Builder::new(n_nodes, 1);
            match id {
                PDomain | PSurface => {
                    b.lhs.push(Term::Centered(w.clone()));
                    b.rhs.push(Term::Lp(disc.gradient_operator()?));
                    b.constraints.push(w.clone());
                    b.mean_zero = Some(w.clone());
                }
                FDomain | FSurface => {
                    b.lhs.push(Term::Lp(WeightedOperator::mass(&w)));
                    b.rhs.push(Term::Lp(disc.gradient_operator()?));
                    b.rhs.push(Term::Moment(vec![region()?.weights.clone()]));
                }
                P0Domain | P0Surface => {
                    b.lhs.push(Term::Lp(WeightedOperator::mass(&w)));
                    b.rhs.push(Term::Lp(disc.gradient_operator()?));
                    b.embedding = selection(n_nodes, &region()?.complement());
                }
                SupP | SupP0 => {
                    let ds = (0..carrier.ambient_dim())
                        .map(|a| {
                            let mut alpha = vec![0; carrier.ambient_dim()];
                            alpha[a] = 1;
                            disc.derivative_matrix(&MultiIndex(alpha))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    b.rhs.push(Term::SupGradient(ds));
                    if id == SupP {
                        b.lhs.push(Term::SupValue(Some(w.clone())));
                        b.constraints.push(w.clone());
                        b.mean_zero = Some(w.clone());
                    } else {
                        b.lhs.push(Term::SupValue(None));
                        b.embedding = selection(n_nodes, &region()?.complement());
                    }
                }
                _ => unreachable!(),
            }
            b
        }
        (WmP { m, surface } | WmP0 { m, surface } | WmF { m, surface }, _) => {
            let disc: &dyn Discretization<T> = match (domain, surface) {
                (Domain::Grid(g), false) => g,
                (Domain::Surface(s), true) => s,
                _ => return Err(unsupported()),
            };
            if m > disc.max_order() {
                return Err(Error::OrderOutOfScope { order: m, max: disc.max_order() });
            }
            let mut b = Builder::new(n_nodes, 1);
            for k in 0..=m {
                b.lhs.push(Term::Lp(disc.order_operator(k)?));
            }
            b.rhs.push(Term::Lp(disc.order_operator(m)?));
            let r = region()?;
            let lower = (0..m).flat_map(|k| MultiIndex::all_of_order(carrier.ambient_dim(), k));
            match id {
                WmP { .. } => {
                    let ls = lower
                        .map(|beta| Ok(disc.derivative_matrix(&beta)?.mul_transpose_vec(&r.weights)))
                        .collect::<Result<Vec<_>>>()?;
                    b.rhs.push(Term::Moment(ls));
                }
                WmP0 { .. } => {
                    let keep = r.complement();
                    for beta in lower.filter(|b| b.order() > 0) {
                        let d = disc.derivative_matrix(&beta)?.submatrix(&r.nodes, &keep);
                        for row in 0..d.nrows() {
                            let mut c = vec![T::zero(); keep.len()];
                            d.row(row).for_each(|(j, v)| c[j] = v);
                            b.constraints.push(c);
                        }
                    }
                    b.embedding = selection(n_nodes, &keep);
                }
                _ => b.rhs.push(Term::Lp(region_mass(r, 1))),
            }
            b
        }
        (FKDomain | PKDomain | KornI | KornII, Domain::Grid(g)) => {
            let n = g.dim();
            let mut b = Builder::new(n_nodes * n, n);
            let mass = vector_mass(&w, n);
            b.lhs.push(Term::Lp(mass.clone()));
            if matches!(id, KornI | KornII) {
                b.lhs.push(Term::Lp(jacobian_operator(g, n)?));
            }
            if id == KornI {
                b.rhs.push(Term::Lp(mass));
            }
            b.rhs.push(Term::Lp(deformation_operator(g)?));
            match id {
                FKDomain => b.rhs.push(Term::Lp(region_mass(region()?, n))),
                PKDomain | KornII => b.embedding = selection(n_nodes * n, &kept_dofs(region()?, n)),
                _ => {}
            }
            b
        }
        (FKSurface | PKSurface | KornISurf | KornIISurf, Domain::Surface(s)) => {
            let n = s.ambient_dim();
            let mut b = Builder::new(n_nodes * n, n);
            b.provenance = Some(provenance_of(s));
            let mass = vector_mass(&w, n);
            b.lhs.push(Term::Lp(mass.clone()));
            if matches!(id, KornISurf | KornIISurf) {
                b.lhs.push(Term::Lp(cell_gradient_operator(s)?.componentwise(n)));
            }
            if id == KornISurf {
                b.rhs.push(Term::Lp(mass));
            }
            b.rhs.push(Term::Lp(cell_deformation_operator(s)?));
            let e = tangential_embedding(s)?;
            b.embedding = match id {
                FKSurface => {
                    b.rhs.push(Term::Lp(region_mass(region()?, n)));
                    e
                }
                PKSurface | KornIISurf => e.matmul(&selection(n_nodes * (n - 1), &kept_dofs(region()?, n - 1)))?,
                _ => e,
            };
            b
        }
        (CylF | CylP0 | CylFlatF | CylFlatP0 | CylKF | CylKP0 | CylFlatKF | CylFlatKP0, Domain::Cylinder(c)) => {
            cylinder_builder(id, c, region()?)?
        }
        _ => return Err(unsupported()),
    };

    let constraints = super::eigen::orthonormalize_rows(&b.constraints);
    Ok(Problem {
        id: id.name(),
        lhs: b.lhs,
        rhs: b.rhs,
        mesh: MeshDescriptor {
            shape: String::new(),
            carrier: domain.carrier_name().into(),
            level: 0,
            nodes: n_nodes,
            dofs: b.embedding.ncols() - constraints.len(),
            h: domain.resolution().to_f64_lossy(),
        },
        embedding: b.embedding,
        constraints,
        mean_zero: b.mean_zero,
        components: b.components,
        positions: (0..n_nodes).map(|i| carrier.position(i)).collect(),
        regions: regions.iter().map(region_summary).collect(),
        provenance: b.provenance,
    })
}

fn cylinder_builder<T: Real>(id: InequalityId, c: &CylinderMesh<T>, strip: &MarkedRegion<T>) -> Result<Builder<T>> {
    let n_nodes = c.num_nodes();
    let lw = c.layer_weights();
    let w = c.node_weights().to_vec();
    let unsupported = || Error::UnsupportedKind { kind: id.name(), carrier: "this cylinder base".into() };
    let eliminate = matches!(id, CylP0 | CylFlatP0 | CylKP0 | CylFlatKP0);
    let b = match (id, c.base()) {
        (CylF | CylP0, CylinderBase::Surface(_)) | (CylFlatF | CylFlatP0, CylinderBase::Grid(_)) => {
            let grad = match c.base() {
                CylinderBase::Surface(s) => cell_gradient_operator(s)?,
                CylinderBase::Grid(g) => gradient_operator(g)?,
            };
            let mut b = Builder::new(n_nodes, 1);
            b.lhs.push(Term::Lp(WeightedOperator::mass(&w)));
            b.rhs.push(Term::Lp(grad.lift_layers(lw)));
            if eliminate {
                b.embedding = selection(n_nodes, &strip.complement());
            } else {
                b.rhs.push(Term::Lp(region_mass(strip, 1)));
            }
            b
        }
        (CylKF | CylKP0, CylinderBase::Surface(s)) => {
            let n = s.ambient_dim();
            let mut b = Builder::new(n_nodes * n, n);
            b.provenance = Some(provenance_of(s));
            b.lhs.push(Term::Lp(vector_mass(&w, n)));
            b.rhs.push(Term::Lp(cell_deformation_operator(s)?.lift_layers(lw)));
            let e = tangential_embedding(s)?.block_diagonal(c.layers());
            b.embedding = if eliminate {
                e.matmul(&selection(n_nodes * (n - 1), &kept_dofs(strip, n - 1)))?
            } else {
                b.rhs.push(Term::Lp(region_mass(strip, n)));
                e
            };
            b
        }
        (CylFlatKF | CylFlatKP0, CylinderBase::Grid(g)) => {
            let d = g.dim();
            let mut b = Builder::new(n_nodes * d, d);
            b.lhs.push(Term::Lp(vector_mass(&w, d)));
            b.rhs.push(Term::Lp(deformation_operator(g)?.lift_layers(lw)));
            if eliminate {
                b.embedding = selection(n_nodes * d, &kept_dofs(strip, d));
            } else {
                b.rhs.push(Term::Lp(region_mass(strip, d)));
            }
            b
        }
        _ => return Err(unsupported()),
    };
    Ok(b)
}

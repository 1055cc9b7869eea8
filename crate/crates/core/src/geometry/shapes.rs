//! Registered shapes addressable by name: interval, box, circle, sphere, torus.

use std::collections::HashMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{dot, Real};

use super::{DomainGrid, LevelSetSurface, Mesh, SurfaceMesh};

/// Shape descriptor with resolution parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeSpec {
    Interval {
        a: f64,
        b: f64,
        nodes: usize,
    },
    /// Axis-aligned box; `nodes` per axis.
    Box {
        lower: Vec<f64>,
        upper: Vec<f64>,
        nodes: Vec<usize>,
    },
    Circle {
        radius: f64,
        nodes: usize,
    },
    /// Icosphere: the icosahedron refined `subdivisions` times by edge midpoints.
    Sphere {
        radius: f64,
        subdivisions: usize,
    },
    Torus {
        major: f64,
        minor: f64,
        nodes_major: usize,
        nodes_minor: usize,
    },
}

impl ShapeSpec {
    pub const NAMES: [&'static str; 5] = ["interval", "box", "circle", "sphere", "torus"];

    /// Unit-size default of a registered shape.
    pub fn by_name(name: &str) -> Result<Self> {
        Ok(match name {
            "interval" => ShapeSpec::Interval { a: 0.0, b: 1.0, nodes: 65 },
            "box" | "square" => ShapeSpec::Box { lower: vec![0.0; 2], upper: vec![1.0; 2], nodes: vec![17; 2] },
            "cube" => ShapeSpec::Box { lower: vec![0.0; 3], upper: vec![1.0; 3], nodes: vec![9; 3] },
            "circle" => ShapeSpec::Circle { radius: 1.0, nodes: 64 },
            "sphere" | "icosphere" => ShapeSpec::Sphere { radius: 1.0, subdivisions: 2 },
            "torus" => ShapeSpec::Torus { major: 2.0, minor: 0.5, nodes_major: 32, nodes_minor: 12 },
            other => return Err(Error::UnknownShape(other.to_string())),
        })
    }

    /// Overrides resolution/size parameters by name, e.g. `nodes = 257`.
    pub fn with_params(mut self, params: &HashMap<String, f64>) -> Result<Self> {
        let as_count = |v: f64| v.max(0.0).round() as usize;
        for (key, &v) in params {
            match (&mut self, key.as_str()) {
                (ShapeSpec::Interval { a, .. }, "a") => *a = v,
                (ShapeSpec::Interval { b, .. }, "b") => *b = v,
                (ShapeSpec::Interval { nodes, .. }, "nodes") => *nodes = as_count(v),
                (ShapeSpec::Box { nodes, .. }, "nodes") => nodes.iter_mut().for_each(|n| *n = as_count(v)),
                (ShapeSpec::Box { lower, upper, nodes }, "dim") => {
                    let d = as_count(v);
                    *lower = vec![lower.first().copied().unwrap_or(0.0); d];
                    *upper = vec![upper.first().copied().unwrap_or(1.0); d];
                    *nodes = vec![nodes.first().copied().unwrap_or(17); d];
                }
                (ShapeSpec::Circle { radius, .. }, "radius") | (ShapeSpec::Sphere { radius, .. }, "radius") => {
                    *radius = v
                }
                (ShapeSpec::Circle { nodes, .. }, "nodes") => *nodes = as_count(v),
                (ShapeSpec::Sphere { subdivisions, .. }, "subdivisions") => *subdivisions = as_count(v),
                (ShapeSpec::Torus { major, .. }, "major") => *major = v,
                (ShapeSpec::Torus { minor, .. }, "minor") => *minor = v,
                (ShapeSpec::Torus { nodes_major, .. }, "nodes_major") => *nodes_major = as_count(v),
                (ShapeSpec::Torus { nodes_minor, .. }, "nodes_minor") => *nodes_minor = as_count(v),
                _ => return Err(Error::Parse(format!("unknown parameter `{key}` for shape {}", self.name()))),
            }
        }
        Ok(self)
    }

    pub fn name(&self) -> &'static str {
        match self {
            ShapeSpec::Interval { .. } => "interval",
            ShapeSpec::Box { .. } => "box",
            ShapeSpec::Circle { .. } => "circle",
            ShapeSpec::Sphere { .. } => "sphere",
            ShapeSpec::Torus { .. } => "torus",
        }
    }

    /// The same shape refined `level` times by a factor of two in mesh size.
    pub fn refine(&self, level: usize) -> Self {
        let f = 1usize << level;
        let grid_nodes = |n: usize| (n.max(2) - 1) * f + 1;
        match self.clone() {
            ShapeSpec::Interval { a, b, nodes } => ShapeSpec::Interval { a, b, nodes: grid_nodes(nodes) },
            ShapeSpec::Box { lower, upper, nodes } => {
                ShapeSpec::Box { lower, upper, nodes: nodes.into_iter().map(grid_nodes).collect() }
            }
            ShapeSpec::Circle { radius, nodes } => ShapeSpec::Circle { radius, nodes: nodes * f },
            ShapeSpec::Sphere { radius, subdivisions } => {
                ShapeSpec::Sphere { radius, subdivisions: subdivisions + level }
            }
            ShapeSpec::Torus { major, minor, nodes_major, nodes_minor } => {
                ShapeSpec::Torus { major, minor, nodes_major: nodes_major * f, nodes_minor: nodes_minor * f }
            }
        }
    }

    /// Analytic measure of the continuous shape.
    pub fn exact_measure(&self) -> f64 {
        match self {
            ShapeSpec::Interval { a, b, .. } => b - a,
            ShapeSpec::Box { lower, upper, .. } => lower.iter().zip(upper).map(|(l, u)| u - l).product(),
            ShapeSpec::Circle { radius, .. } => 2.0 * PI * radius,
            ShapeSpec::Sphere { radius, .. } => 4.0 * PI * radius * radius,
            ShapeSpec::Torus { major, minor, .. } => 4.0 * PI * PI * major * minor,
        }
    }
}

/// Builds the mesh of a registered shape.
pub fn build_mesh<T: Real>(spec: &ShapeSpec) -> Result<Mesh<T>> {
    let too_coarse = |what: String| Err(Error::ResolutionTooCoarse(what));
    match spec {
        ShapeSpec::Interval { a, b, nodes } => {
            if *nodes < 3 {
                return too_coarse(format!("interval needs at least 3 nodes, got {nodes}"));
            }
            Ok(Mesh::Grid(DomainGrid::new(vec![T::lit(*a)], vec![T::lit(*b)], vec![*nodes])?))
        }
        ShapeSpec::Box { lower, upper, nodes } => {
            if let Some(n) = nodes.iter().find(|&&n| n < 3) {
                return too_coarse(format!("box needs at least 3 nodes per axis, got {n}"));
            }
            let l = lower.iter().map(|&v| T::lit(v)).collect();
            let u = upper.iter().map(|&v| T::lit(v)).collect();
            Ok(Mesh::Grid(DomainGrid::new(l, u, nodes.clone())?))
        }
        ShapeSpec::Circle { radius, nodes } => {
            if *nodes < 3 {
                return too_coarse(format!("circle needs at least 3 nodes, got {nodes}"));
            }
            Ok(Mesh::Surface(circle(T::lit(*radius), *nodes)?))
        }
        ShapeSpec::Sphere { radius, subdivisions } => Ok(Mesh::Surface(icosphere(T::lit(*radius), *subdivisions)?)),
        ShapeSpec::Torus { major, minor, nodes_major, nodes_minor } => {
            if *nodes_major < 3 || *nodes_minor < 3 || nodes_major * nodes_minor < 12 {
                return too_coarse(format!("torus {nodes_major}x{nodes_minor} is below 12 vertices"));
            }
            Ok(Mesh::Surface(torus(T::lit(*major), T::lit(*minor), *nodes_major, *nodes_minor)?))
        }
    }
}

/// Polygonal circle; each segment carries the exact arc length as its weight.
pub(crate) fn circle<T: Real>(r: T, n: usize) -> Result<SurfaceMesh<T>> {
    let mut v = Vec::with_capacity(2 * n);
    for k in 0..n {
        let t = 2.0 * PI * k as f64 / n as f64;
        v.push(r * T::lit(t.cos()));
        v.push(r * T::lit(t.sin()));
    }
    let cells: Vec<usize> = (0..n).flat_map(|k| [k, (k + 1) % n]).collect();
    let arc = r * T::lit(2.0 * PI / n as f64);
    SurfaceMesh::with_cell_weights(2, v, cells, vec![arc; n], Some(LevelSetSurface::sphere(2, r)))
}

const ICO_FACES: [[usize; 3]; 20] = [
    [0, 11, 5],
    [0, 5, 1],
    [0, 1, 7],
    [0, 7, 10],
    [0, 10, 11],
    [1, 5, 9],
    [5, 11, 4],
    [11, 10, 2],
    [10, 7, 6],
    [7, 1, 8],
    [3, 9, 4],
    [3, 4, 2],
    [3, 2, 6],
    [3, 6, 8],
    [3, 8, 9],
    [4, 9, 5],
    [2, 4, 11],
    [6, 2, 10],
    [8, 6, 7],
    [9, 8, 1],
];

/// Icosphere with `10 * 4^s + 2` vertices projected to the sphere of radius `r`.
pub(crate) fn icosphere<T: Real>(r: T, subdivisions: usize) -> Result<SurfaceMesh<T>> {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let base = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ];
    let unit = |p: [f64; 3]| {
        let l = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        [p[0] / l, p[1] / l, p[2] / l]
    };
    let mut pts: Vec<[f64; 3]> = base.iter().map(|&p| unit(p)).collect();
    let mut faces: Vec<[usize; 3]> = ICO_FACES.to_vec();
    for _ in 0..subdivisions {
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        let mut midpoint = |a: usize, b: usize, pts: &mut Vec<[f64; 3]>| -> usize {
            let key = (a.min(b), a.max(b));
            *mid.entry(key).or_insert_with(|| {
                let (p, q) = (pts[a], pts[b]);
                pts.push(unit([(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0, (p[2] + q[2]) / 2.0]));
                pts.len() - 1
            })
        };
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut pts);
            let bc = midpoint(b, c, &mut pts);
            let ca = midpoint(c, a, &mut pts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    let verts: Vec<T> = pts.iter().flat_map(|p| p.iter().map(|&x| r * T::lit(x))).collect();
    let cells = orient_outward(&verts, faces, |_| vec![T::zero(); 3]);
    SurfaceMesh::new(3, verts, cells, Some(LevelSetSurface::sphere(3, r)))
}

/// Ring torus around the `x3` axis, triangulated from the angle grid.
pub(crate) fn torus<T: Real>(major: T, minor: T, nu: usize, nv: usize) -> Result<SurfaceMesh<T>> {
    let mut verts = Vec::with_capacity(3 * nu * nv);
    for i in 0..nu {
        let u = T::lit(2.0 * PI * i as f64 / nu as f64);
        for j in 0..nv {
            let v = T::lit(2.0 * PI * j as f64 / nv as f64);
            let rho = major + minor * v.cos();
            verts.extend([rho * u.cos(), rho * u.sin(), minor * v.sin()]);
        }
    }
    let id = |i: usize, j: usize| (i % nu) * nv + (j % nv);
    let mut faces = Vec::with_capacity(2 * nu * nv);
    for i in 0..nu {
        for j in 0..nv {
            faces.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            faces.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    // outward means away from the tube's core circle
    let cells = orient_outward(&verts, faces, |c: &[T]| {
        let rho = (c[0] * c[0] + c[1] * c[1]).sqrt();
        vec![major * c[0] / rho, major * c[1] / rho, T::zero()]
    });
    SurfaceMesh::new(3, verts, cells, Some(LevelSetSurface::torus(major, minor)))
}

/// Flips triangles whose normal points towards `inner(centroid)`.
fn orient_outward<T: Real>(verts: &[T], faces: Vec<[usize; 3]>, inner: impl Fn(&[T]) -> Vec<T>) -> Vec<usize> {
    let p = |i: usize| &verts[3 * i..3 * i + 3];
    let mut cells = Vec::with_capacity(faces.len() * 3);
    for [a, b, c] in faces {
        let (pa, pb, pc) = (p(a), p(b), p(c));
        let e1: Vec<T> = (0..3).map(|k| pb[k] - pa[k]).collect();
        let e2: Vec<T> = (0..3).map(|k| pc[k] - pa[k]).collect();
        let n = [e1[1] * e2[2] - e1[2] * e2[1], e1[2] * e2[0] - e1[0] * e2[2], e1[0] * e2[1] - e1[1] * e2[0]];
        let third = T::lit(1.0 / 3.0);
        let centroid: Vec<T> = (0..3).map(|k| (pa[k] + pb[k] + pc[k]) * third).collect();
        let core = inner(&centroid);
        let out: Vec<T> = (0..3).map(|k| centroid[k] - core[k]).collect();
        if dot(&n, &out) >= T::zero() {
            cells.extend([a, b, c]);
        } else {
            cells.extend([a, c, b]);
        }
    }
    cells
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Carrier;

    #[test]
    fn circle_four_nodes() {
        let m = circle::<f64>(1.0, 4).unwrap();
        assert!(m.vertex_weights().iter().all(|&w| (w - PI / 2.0).abs() < 1e-14));
        assert!((m.vertex(1)[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn icosahedron_counts() {
        let m = icosphere::<f64>(1.0, 0).unwrap();
        assert_eq!(m.num_vertices(), 12);
        assert_eq!(m.num_cells(), 20);
        let rel = (m.measure() - 4.0 * PI).abs() / (4.0 * PI);
        assert!(rel < 0.25, "{rel}");
        let m2 = icosphere::<f64>(1.0, 4).unwrap();
        assert_eq!(m2.num_vertices(), 2562);
        for c in 0..m2.num_cells() {
            assert!(dot(&m2.cell_normal(c), &m2.cell_centroid(c)) > 0.0);
        }
    }

    #[test]
    fn torus_builds() {
        let m = torus::<f64>(2.0, 0.5, 24, 12).unwrap();
        assert!(m.is_connected());
        let rel = (m.measure() - 4.0 * PI * PI).abs() / (4.0 * PI * PI);
        assert!(rel < 0.05, "{rel}");
    }

    #[test]
    fn coarse_and_unknown_rejected() {
        let e = build_mesh::<f64>(&ShapeSpec::Interval { a: 0.0, b: 1.0, nodes: 2 }).unwrap_err();
        assert!(matches!(e, Error::ResolutionTooCoarse(_)));
        assert!(matches!(ShapeSpec::by_name("klein_bottle"), Err(Error::UnknownShape(_))));
    }

    #[test]
    fn refine_levels() {
        let s = ShapeSpec::Interval { a: 0.0, b: 1.0, nodes: 5 }.refine(2);
        assert_eq!(s, ShapeSpec::Interval { a: 0.0, b: 1.0, nodes: 17 });
        let c = ShapeSpec::Circle { radius: 1.0, nodes: 64 }.refine(1);
        assert_eq!(c, ShapeSpec::Circle { radius: 1.0, nodes: 128 });
    }
}

//! OFF text export/import of surface meshes with a JSON sidecar for normals,
//! weights and the analytic source.
//!
//! Curves in the plane are written with a zero third coordinate; the sidecar
//! records the true ambient dimension.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;

use super::{LevelSetSurface, SurfaceMesh};

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    ambient_dim: usize,
    normals: Vec<f64>,
    vertex_weights: Vec<f64>,
    cell_weights: Vec<f64>,
    source: Option<LevelSetSurface<f64>>,
}

/// Sidecar path: `mesh.off` -> `mesh.off.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn to_off<T: Real>(mesh: &SurfaceMesh<T>) -> String {
    let n = mesh.cell_size();
    let mut out = String::new();
    let _ = writeln!(out, "OFF");
    let _ = writeln!(out, "{} {} 0", mesh.num_vertices(), mesh.num_cells());
    for v in 0..mesh.num_vertices() {
        let p = mesh.vertex(v);
        let z = if n == 3 { p[2].to_f64_lossy() } else { 0.0 };
        let _ = writeln!(out, "{:e} {:e} {:e}", p[0].to_f64_lossy(), p[1].to_f64_lossy(), z);
    }
    for c in 0..mesh.num_cells() {
        let ids: Vec<String> = mesh.cell(c).iter().map(|i| i.to_string()).collect();
        let _ = writeln!(out, "{} {}", n, ids.join(" "));
    }
    out
}

/// Writes `path` and its sidecar.
pub fn write_off<T: Real>(mesh: &SurfaceMesh<T>, path: &Path) -> Result<()> {
    fs::write(path, to_off(mesh))?;
    let f = |v: &[T]| v.iter().map(|x| x.to_f64_lossy()).collect::<Vec<f64>>();
    let sidecar = Sidecar {
        ambient_dim: mesh.cell_size(),
        normals: f(mesh.normals_flat()),
        vertex_weights: f(mesh.vertex_weights()),
        cell_weights: f(mesh.cell_weights()),
        source: mesh.source().map(|s| convert_source(s, |x| x.to_f64_lossy())),
    };
    let json = serde_json::to_string_pretty(&sidecar).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(sidecar_path(path), json)?;
    Ok(())
}

fn convert_source<A: Clone, B>(s: &LevelSetSurface<A>, f: impl Fn(A) -> B) -> LevelSetSurface<B> {
    use super::LevelSetKind as K;
    let kind = match s.kind.clone() {
        K::Hyperplane { normal, offset } => {
            K::Hyperplane { normal: normal.into_iter().map(&f).collect(), offset: f(offset) }
        }
        K::Ellipsoid { center, semi_axes } => K::Ellipsoid {
            center: center.into_iter().map(&f).collect(),
            semi_axes: semi_axes.into_iter().map(&f).collect(),
        },
        K::Torus { major, minor } => K::Torus { major: f(major), minor: f(minor) },
        K::Cylinder { radius } => K::Cylinder { radius: f(radius) },
    };
    LevelSetSurface { kind, ambient_dim: s.ambient_dim }
}

/// Parses OFF text; without a sidecar the normals are recomputed from the cells.
pub fn parse_off<T: Real>(text: &str, sidecar: Option<&str>) -> Result<SurfaceMesh<T>> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    match lines.next() {
        Some(h) if h.starts_with("OFF") => {}
        other => return Err(Error::Parse(format!("expected OFF header, found {other:?}"))),
    }
    let counts: Vec<usize> = lines
        .next()
        .ok_or_else(|| Error::Parse("missing count line".into()))?
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad count `{t}`"))))
        .collect::<Result<_>>()?;
    if counts.len() < 2 {
        return Err(Error::Parse("count line needs vertex and face counts".into()));
    }
    let (nv, nf) = (counts[0], counts[1]);
    let side: Option<Sidecar> =
        sidecar.map(|s| serde_json::from_str(s).map_err(|e| Error::Parse(format!("sidecar: {e}")))).transpose()?;
    let mut raw_vertices = Vec::with_capacity(nv);
    for i in 0..nv {
        let line = lines.next().ok_or_else(|| Error::Parse(format!("missing vertex {i}")))?;
        let p: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad coordinate `{t}`"))))
            .collect::<Result<_>>()?;
        if p.len() < 3 {
            return Err(Error::Parse(format!("vertex {i} has {} coordinates", p.len())));
        }
        raw_vertices.push(p);
    }
    let mut cells = Vec::with_capacity(nf * 3);
    let mut cell_size = None;
    for i in 0..nf {
        let line = lines.next().ok_or_else(|| Error::Parse(format!("missing face {i}")))?;
        let ids: Vec<usize> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad index `{t}`"))))
            .collect::<Result<_>>()?;
        let k = *ids.first().ok_or_else(|| Error::Parse(format!("empty face {i}")))?;
        if ids.len() != k + 1 || !(2..=3).contains(&k) || cell_size.is_some_and(|c| c != k) {
            return Err(Error::Parse(format!("face {i} is not a consistent segment/triangle")));
        }
        cell_size = Some(k);
        cells.extend_from_slice(&ids[1..]);
    }
    let dim = side.as_ref().map(|s| s.ambient_dim).or(cell_size).unwrap_or(3);
    let vertices: Vec<T> = raw_vertices.iter().flat_map(|p| p[..dim].iter().map(|&x| T::lit(x))).collect();
    let lift = |v: &[f64]| v.iter().map(|&x| T::lit(x)).collect::<Vec<T>>();
    match side {
        Some(s) => SurfaceMesh::from_parts(
            dim,
            vertices,
            cells,
            lift(&s.normals),
            lift(&s.cell_weights),
            s.source.as_ref().map(|src| convert_source(src, T::lit)),
        ),
        None => SurfaceMesh::new(dim, vertices, cells, None),
    }
}

/// Reads `path` plus its sidecar when present.
pub fn read_off<T: Real>(path: &Path) -> Result<SurfaceMesh<T>> {
    let text = fs::read_to_string(path)?;
    let side = sidecar_path(path);
    let sidecar = if side.exists() { Some(fs::read_to_string(side)?) } else { None };
    parse_off(&text, sidecar.as_deref())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::shapes::{circle, icosphere};

    #[test]
    fn round_trip_sphere() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.off");
        let m = icosphere::<f64>(1.0, 1).unwrap();
        write_off(&m, &path).unwrap();
        let back: SurfaceMesh<f64> = read_off(&path).unwrap();
        assert_eq!(back.cells_flat(), m.cells_flat());
        for (a, b) in back.normals_flat().iter().zip(m.normals_flat()) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!((crate::geometry::Carrier::measure(&back) - crate::geometry::Carrier::measure(&m)).abs() < 1e-12);
    }

    #[test]
    fn curve_without_sidecar() {
        let m = circle::<f64>(1.0, 16).unwrap();
        let back: SurfaceMesh<f64> = parse_off(&to_off(&m), None).unwrap();
        assert_eq!(back.cell_size(), 2);
        assert_eq!(back.num_vertices(), 16);
    }

    #[test]
    fn malformed_header() {
        assert!(matches!(parse_off::<f64>("PLY\n", None), Err(Error::Parse(_))));
    }
}

//! Simplicial hypersurface meshes: polygons in R^2 and triangulations in R^3.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{dot, norm2, Real};

use super::level_set::LevelSetSurface;
use super::{Carrier, RegionKind};

/// Hypersurface mesh with per-vertex unit normals and lumped measures.
///
/// Cells are `(n-1)`-simplices in R^n: segments for `n = 2`, triangles for `n = 3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceMesh<T> {
    ambient_dim: usize,
    vertices: Vec<T>,
    cells: Vec<usize>,
    vertex_normals: Vec<T>,
    vertex_weights: Vec<T>,
    cell_weights: Vec<T>,
    source: Option<LevelSetSurface<T>>,
    allow_disconnected: bool,
    #[serde(skip)]
    neighbors: Vec<Vec<usize>>,
    #[serde(skip)]
    vertex_cells: Vec<Vec<usize>>,
}

fn factorial(k: usize) -> usize {
    (1..=k).product::<usize>().max(1)
}

impl<T: Real> SurfaceMesh<T> {
    /// Builds a mesh; normals come from `source` when present, otherwise from the
    /// measure-weighted cell normals. Cell weights are the flat simplex measures.
    pub fn new(
        ambient_dim: usize,
        vertices: Vec<T>,
        cells: Vec<usize>,
        source: Option<LevelSetSurface<T>>,
    ) -> Result<Self> {
        let mut mesh = Self::raw(ambient_dim, vertices, cells, source)?;
        let cw: Vec<T> = (0..mesh.num_cells()).map(|c| mesh.flat_cell_measure(c)).collect();
        mesh.set_cell_weights(cw)?;
        mesh.compute_normals()?;
        mesh.validate()?;
        Ok(mesh)
    }

    /// Like [`SurfaceMesh::new`] with explicit cell quadrature weights (e.g. exact
    /// arc lengths for a polygonal circle).
    pub fn with_cell_weights(
        ambient_dim: usize,
        vertices: Vec<T>,
        cells: Vec<usize>,
        cell_weights: Vec<T>,
        source: Option<LevelSetSurface<T>>,
    ) -> Result<Self> {
        let mut mesh = Self::raw(ambient_dim, vertices, cells, source)?;
        mesh.set_cell_weights(cell_weights)?;
        mesh.compute_normals()?;
        mesh.validate()?;
        Ok(mesh)
    }

    /// Fully explicit construction, used by mesh import.
    pub fn from_parts(
        ambient_dim: usize,
        vertices: Vec<T>,
        cells: Vec<usize>,
        vertex_normals: Vec<T>,
        cell_weights: Vec<T>,
        source: Option<LevelSetSurface<T>>,
    ) -> Result<Self> {
        let mut mesh = Self::raw(ambient_dim, vertices, cells, source)?;
        mesh.set_cell_weights(cell_weights)?;
        if vertex_normals.len() != mesh.vertices.len() {
            return Err(Error::DimensionMismatch { expected: mesh.vertices.len(), found: vertex_normals.len() });
        }
        mesh.vertex_normals = vertex_normals;
        mesh.validate()?;
        Ok(mesh)
    }

    fn raw(
        ambient_dim: usize,
        vertices: Vec<T>,
        cells: Vec<usize>,
        source: Option<LevelSetSurface<T>>,
    ) -> Result<Self> {
        if !(2..=3).contains(&ambient_dim) {
            return Err(Error::UnsupportedDimension(ambient_dim));
        }
        if vertices.len() % ambient_dim != 0 {
            return Err(Error::DimensionMismatch { expected: ambient_dim, found: vertices.len() % ambient_dim });
        }
        if cells.len() % ambient_dim != 0 {
            return Err(Error::DimensionMismatch { expected: ambient_dim, found: cells.len() % ambient_dim });
        }
        if let Some(s) = &source {
            if s.ambient_dim != ambient_dim {
                return Err(Error::DimensionMismatch { expected: ambient_dim, found: s.ambient_dim });
            }
        }
        let nv = vertices.len() / ambient_dim;
        if let Some(&bad) = cells.iter().find(|&&v| v >= nv) {
            return Err(Error::Parse(format!("cell references vertex {bad} of {nv}")));
        }
        let mut neighbors = vec![Vec::new(); nv];
        let mut vertex_cells = vec![Vec::new(); nv];
        for (c, cell) in cells.chunks(ambient_dim).enumerate() {
            for &a in cell {
                vertex_cells[a].push(c);
                for &b in cell {
                    if a != b && !neighbors[a].contains(&b) {
                        neighbors[a].push(b);
                    }
                }
            }
        }
        neighbors.iter_mut().for_each(|n| n.sort_unstable());
        Ok(SurfaceMesh {
            ambient_dim,
            vertices,
            cells,
            vertex_normals: Vec::new(),
            vertex_weights: Vec::new(),
            cell_weights: Vec::new(),
            source,
            allow_disconnected: false,
            neighbors,
            vertex_cells,
        })
    }

    fn set_cell_weights(&mut self, cell_weights: Vec<T>) -> Result<()> {
        if cell_weights.len() != self.num_cells() {
            return Err(Error::DimensionMismatch { expected: self.num_cells(), found: cell_weights.len() });
        }
        let share = T::from_usize_lossy(self.ambient_dim);
        let mut vw = vec![T::zero(); self.num_vertices()];
        for (c, &w) in cell_weights.iter().enumerate() {
            for &v in self.cell(c) {
                vw[v] += w / share;
            }
        }
        self.cell_weights = cell_weights;
        self.vertex_weights = vw;
        Ok(())
    }

    fn compute_normals(&mut self) -> Result<()> {
        let n = self.ambient_dim;
        let nv = self.num_vertices();
        let mut normals = vec![T::zero(); nv * n];
        if let Some(src) = &self.source {
            for v in 0..nv {
                let nu = src.unit_normal(self.vertex(v))?;
                normals[v * n..(v + 1) * n].copy_from_slice(&nu);
            }
        } else {
            for c in 0..self.num_cells() {
                let cn = self.cell_normal(c);
                let w = self.cell_weights[c];
                for &v in self.cell(c) {
                    for k in 0..n {
                        normals[v * n + k] += w * cn[k];
                    }
                }
            }
            for v in 0..nv {
                let s = &mut normals[v * n..(v + 1) * n];
                let l = norm2(s);
                if !(l > T::zero()) {
                    return Err(Error::DegenerateGradient { norm: 0.0 });
                }
                s.iter_mut().for_each(|x| *x /= l);
            }
        }
        self.vertex_normals = normals;
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        let tol = T::lit(1e-12).max(T::eps() * T::lit(16.0));
        for v in 0..self.num_vertices() {
            let l = norm2(self.normal(v));
            if (l - T::one()).abs() > tol {
                return Err(Error::NonUnitNormal { length: l.to_f64_lossy() });
            }
            if !(self.vertex_weights[v] > T::zero()) {
                return Err(Error::ZeroMeasure);
            }
        }
        if let Some(src) = &self.source {
            let psi_tol = T::lit(1e-10).max(T::eps() * T::lit(64.0));
            for v in 0..self.num_vertices() {
                let val = src.psi(self.vertex(v));
                if val.abs() > psi_tol {
                    return Err(Error::VertexOffSurface { vertex: v, value: val.to_f64_lossy() });
                }
            }
        }
        if !self.allow_disconnected {
            let k = self.connected_components();
            if k != 1 {
                return Err(Error::NotConnected { components: k });
            }
        }
        Ok(())
    }

    /// Rebuilds adjacency after deserialisation.
    pub fn rebuild_topology(&mut self) {
        if let Ok(m) = Self::raw(self.ambient_dim, self.vertices.clone(), self.cells.clone(), None) {
            self.neighbors = m.neighbors;
            self.vertex_cells = m.vertex_cells;
        }
    }

    /// Marks the mesh as intentionally multi-component.
    pub fn allow_disconnected(mut self) -> Self {
        self.allow_disconnected = true;
        self
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len() / self.ambient_dim
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len() / self.ambient_dim
    }

    /// Vertices per cell (equals the ambient dimension).
    pub fn cell_size(&self) -> usize {
        self.ambient_dim
    }

    pub fn vertex(&self, v: usize) -> &[T] {
        &self.vertices[v * self.ambient_dim..(v + 1) * self.ambient_dim]
    }

    pub fn normal(&self, v: usize) -> &[T] {
        &self.vertex_normals[v * self.ambient_dim..(v + 1) * self.ambient_dim]
    }

    pub fn cell(&self, c: usize) -> &[usize] {
        &self.cells[c * self.ambient_dim..(c + 1) * self.ambient_dim]
    }

    pub fn vertices_flat(&self) -> &[T] {
        &self.vertices
    }

    pub fn cells_flat(&self) -> &[usize] {
        &self.cells
    }

    pub fn normals_flat(&self) -> &[T] {
        &self.vertex_normals
    }

    pub fn vertex_weights(&self) -> &[T] {
        &self.vertex_weights
    }

    pub fn cell_weights(&self) -> &[T] {
        &self.cell_weights
    }

    pub fn source(&self) -> Option<&LevelSetSurface<T>> {
        self.source.as_ref()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn vertex_cells(&self, v: usize) -> &[usize] {
        &self.vertex_cells[v]
    }

    /// Edge vectors `p_a - p_0`, `a = 1..k`, of a cell.
    pub fn cell_edges(&self, c: usize) -> Vec<Vec<T>> {
        let cell = self.cell(c);
        let p0 = self.vertex(cell[0]);
        cell[1..].iter().map(|&a| self.vertex(a).iter().zip(p0).map(|(&x, &y)| x - y).collect()).collect()
    }

    /// Flat simplex measure `sqrt(det(E^T E)) / k!`.
    pub fn flat_cell_measure(&self, c: usize) -> T {
        let e = self.cell_edges(c);
        let g = gram(&e);
        let det = det_small(&g, e.len());
        det.max(T::zero()).sqrt() / T::from_usize_lossy(factorial(e.len()))
    }

    /// Unit normal of the flat cell, oriented by vertex order.
    pub fn cell_normal(&self, c: usize) -> Vec<T> {
        let e = self.cell_edges(c);
        let n = match self.ambient_dim {
            2 => vec![e[0][1], -e[0][0]],
            _ => vec![
                e[0][1] * e[1][2] - e[0][2] * e[1][1],
                e[0][2] * e[1][0] - e[0][0] * e[1][2],
                e[0][0] * e[1][1] - e[0][1] * e[1][0],
            ],
        };
        let l = norm2(&n);
        n.into_iter().map(|x| x / l).collect()
    }

    pub fn cell_centroid(&self, c: usize) -> Vec<T> {
        let k = T::from_usize_lossy(self.cell_size());
        let mut x = vec![T::zero(); self.ambient_dim];
        for &v in self.cell(c) {
            x.iter_mut().zip(self.vertex(v)).for_each(|(a, &b)| *a += b / k);
        }
        x
    }

    /// Unique undirected edges `(a, b)` with `a < b`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut set = BTreeMap::new();
        for c in 0..self.num_cells() {
            let cell = self.cell(c);
            for i in 0..cell.len() {
                for j in i + 1..cell.len() {
                    let (a, b) = (cell[i].min(cell[j]), cell[i].max(cell[j]));
                    set.insert((a, b), ());
                }
            }
        }
        set.into_keys().collect()
    }

    pub fn connected_components(&self) -> usize {
        let nv = self.num_vertices();
        let mut seen = vec![false; nv];
        let mut count = 0;
        for s in 0..nv {
            if seen[s] {
                continue;
            }
            count += 1;
            let mut stack = vec![s];
            seen[s] = true;
            while let Some(v) = stack.pop() {
                for &w in &self.neighbors[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        count
    }

    pub fn is_connected(&self) -> bool {
        self.connected_components() == 1
    }

    /// Largest edge length.
    pub fn max_edge_length(&self) -> T {
        self.edges().iter().fold(T::zero(), |m, &(a, b)| {
            let d: Vec<T> = self.vertex(a).iter().zip(self.vertex(b)).map(|(&x, &y)| x - y).collect();
            m.max(norm2(&d))
        })
    }

    /// Orthonormal tangent basis at each vertex (`n - 1` vectors per vertex).
    pub fn tangent_bases(&self) -> Result<Vec<Vec<Vec<T>>>> {
        (0..self.num_vertices()).map(|v| super::level_set::tangent_basis(self.normal(v))).collect()
    }

    /// Returns the vertex permutation induced by an isometry `map`, matching images
    /// to vertices within `tol`.
    pub fn vertex_permutation(&self, map: impl Fn(&[T]) -> Vec<T>, tol: T) -> Option<Vec<usize>> {
        let mut perm = Vec::with_capacity(self.num_vertices());
        for v in 0..self.num_vertices() {
            let img = map(self.vertex(v));
            let hit = (0..self.num_vertices()).find(|&w| {
                let d: Vec<T> = img.iter().zip(self.vertex(w)).map(|(&a, &b)| a - b).collect();
                norm2(&d) <= tol
            })?;
            perm.push(hit);
        }
        Some(perm)
    }
}

pub(crate) fn gram<T: Real>(e: &[Vec<T>]) -> Vec<T> {
    let k = e.len();
    let mut g = vec![T::zero(); k * k];
    for i in 0..k {
        for j in 0..k {
            g[i * k + j] = dot(&e[i], &e[j]);
        }
    }
    g
}

pub(crate) fn det_small<T: Real>(g: &[T], k: usize) -> T {
    match k {
        1 => g[0],
        2 => g[0] * g[3] - g[1] * g[2],
        _ => unreachable!("cells have at most 2 edge vectors"),
    }
}

/// Inverse of a 1x1 or 2x2 matrix.
pub(crate) fn inv_small<T: Real>(g: &[T], k: usize) -> Option<Vec<T>> {
    let det = det_small(g, k);
    if det.abs() <= T::eps() * T::lit(1e-4) * g.iter().fold(T::zero(), |m, v| m.max(v.abs())).powi(k as i32) {
        return None;
    }
    Some(match k {
        1 => vec![T::one() / det],
        _ => vec![g[3] / det, -g[1] / det, -g[2] / det, g[0] / det],
    })
}

impl<T: Real> Carrier<T> for SurfaceMesh<T> {
    fn num_nodes(&self) -> usize {
        self.num_vertices()
    }

    fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    fn position(&self, node: usize) -> Vec<T> {
        self.vertex(node).to_vec()
    }

    fn node_weights(&self) -> &[T] {
        &self.vertex_weights
    }

    fn region_weights(&self, selected: &[bool], kind: RegionKind) -> Vec<T> {
        let nv = self.num_vertices();
        let mut w = vec![T::zero(); nv];
        let cut_points = self.ambient_dim == 2;
        match kind {
            RegionKind::Point => {
                for v in 0..nv {
                    if selected[v] {
                        w[v] = T::one();
                    }
                }
            }
            RegionKind::BoundaryPart if cut_points => {
                // co-dimension one inside a curve is a point set: counting measure
                for v in 0..nv {
                    if selected[v] {
                        w[v] = T::one();
                    }
                }
            }
            RegionKind::BoundaryPart => {
                let half = T::lit(0.5);
                for (a, b) in self.edges() {
                    if selected[a] && selected[b] {
                        let d: Vec<T> = self.vertex(a).iter().zip(self.vertex(b)).map(|(&x, &y)| x - y).collect();
                        let l = norm2(&d);
                        w[a] += half * l;
                        w[b] += half * l;
                    }
                }
            }
            RegionKind::Subdomain => {
                let share = T::from_usize_lossy(self.cell_size());
                for c in 0..self.num_cells() {
                    if self.cell(c).iter().all(|&v| selected[v]) {
                        for &v in self.cell(c) {
                            w[v] += self.cell_weights[c] / share;
                        }
                    }
                }
            }
        }
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_loop() -> SurfaceMesh<f64> {
        let v = vec![1.0, 0.0, 0.0, 1.0, -1.0, 0.0, 0.0, -1.0];
        let c = vec![0, 1, 1, 2, 2, 3, 3, 0];
        SurfaceMesh::new(2, v, c, Some(LevelSetSurface::sphere(2, 1.0))).unwrap()
    }

    #[test]
    fn polygon_measures() {
        let m = square_loop();
        let side = 2f64.sqrt();
        assert!((m.measure() - 4.0 * side).abs() < 1e-14);
        assert!(m.vertex_weights().iter().all(|&w| (w - side).abs() < 1e-14));
        assert_eq!(m.neighbors(0), &[1, 3]);
    }

    #[test]
    fn off_surface_vertex_rejected() {
        let v = vec![1.0, 0.0, 0.0, 1.0, -1.0, 0.0, 0.0, -1.1];
        let c = vec![0, 1, 1, 2, 2, 3, 3, 0];
        let e = SurfaceMesh::new(2, v, c, Some(LevelSetSurface::sphere(2, 1.0))).unwrap_err();
        assert!(matches!(e, Error::VertexOffSurface { vertex: 3, .. }));
    }

    #[test]
    fn disconnected_needs_flag() {
        let v = vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 5.0, 5.0, 6.0, 5.0, 5.0, 6.0];
        let c = vec![0, 1, 1, 2, 2, 0, 3, 4, 4, 5, 5, 3];
        assert!(matches!(SurfaceMesh::new(2, v.clone(), c.clone(), None), Err(Error::NotConnected { components: 2 })));
        let m = SurfaceMesh::raw(2, v, c, None).unwrap().allow_disconnected();
        assert_eq!(m.connected_components(), 2);
    }
}

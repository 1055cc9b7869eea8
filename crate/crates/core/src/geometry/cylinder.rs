//! Cylinders `base x [a, b]` built by stacking copies of a base carrier.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;

use super::grid::trapezoid_weights;
use super::{Carrier, DomainGrid, LevelSetKind, LevelSetSurface, MarkedRegion, RegionKind, SurfaceMesh};

/// Cross-section of a cylinder: a hypersurface or a flat domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CylinderBase<T> {
    Surface(SurfaceMesh<T>),
    Grid(DomainGrid<T>),
}

impl<T: Real> CylinderBase<T> {
    pub fn carrier(&self) -> &dyn Carrier<T> {
        match self {
            CylinderBase::Surface(s) => s,
            CylinderBase::Grid(g) => g,
        }
    }
}

/// Tensor product of a base carrier with `layers` equispaced copies along `t`.
/// Node `(base_node, layer)` has id `layer * base_nodes + base_node`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CylinderMesh<T> {
    base: CylinderBase<T>,
    interval: (T, T),
    layers: usize,
    layer_weights: Vec<T>,
    node_weights: Vec<T>,
}

/// Extrudes `base` over `[a, b]` with trapezoid weights in `t`.
pub fn extrude_cylinder<T: Real>(base: CylinderBase<T>, interval: (T, T), layers: usize) -> Result<CylinderMesh<T>> {
    let (a, b) = interval;
    if !(b > a) {
        return Err(Error::DegenerateInterval { a: a.to_f64_lossy(), b: b.to_f64_lossy() });
    }
    if layers < 2 {
        return Err(Error::ResolutionTooCoarse(format!("cylinder needs at least 2 layers, got {layers}")));
    }
    let h = (b - a) / T::from_usize_lossy(layers - 1);
    let layer_weights = trapezoid_weights(layers, h);
    let bw = base.carrier().node_weights().to_vec();
    let node_weights = layer_weights.iter().flat_map(|&lw| bw.iter().map(move |&w| w * lw)).collect();
    Ok(CylinderMesh { base, interval, layers, layer_weights, node_weights })
}

/// Strip `region x [a, b]` of a base region.
pub fn extrude_region<T: Real>(cyl: &CylinderMesh<T>, base_region: &MarkedRegion<T>) -> Result<MarkedRegion<T>> {
    let nb = cyl.base_nodes();
    if base_region.parent_nodes != nb {
        return Err(Error::DimensionMismatch { expected: nb, found: base_region.parent_nodes });
    }
    let mut nodes = Vec::with_capacity(base_region.nodes.len() * cyl.layers);
    let mut weights = vec![T::zero(); cyl.num_nodes()];
    for (l, &lw) in cyl.layer_weights.iter().enumerate() {
        for &b in &base_region.nodes {
            nodes.push(cyl.node(b, l));
        }
        for b in 0..nb {
            weights[cyl.node(b, l)] = base_region.weights[b] * lw;
        }
    }
    nodes.sort_unstable();
    let kind = match base_region.kind {
        RegionKind::Point => RegionKind::BoundaryPart,
        k => k,
    };
    Ok(MarkedRegion { parent_nodes: cyl.num_nodes(), nodes, weights, kind })
}

impl<T: Real> CylinderMesh<T> {
    pub fn base(&self) -> &CylinderBase<T> {
        &self.base
    }

    pub fn base_nodes(&self) -> usize {
        self.base.carrier().num_nodes()
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn interval(&self) -> (T, T) {
        self.interval
    }

    pub fn layer_weights(&self) -> &[T] {
        &self.layer_weights
    }

    pub fn node(&self, base_node: usize, layer: usize) -> usize {
        layer * self.base_nodes() + base_node
    }

    /// `(base_node, layer)` of a cylinder node.
    pub fn split(&self, node: usize) -> (usize, usize) {
        (node % self.base_nodes(), node / self.base_nodes())
    }

    pub fn layer_coordinate(&self, layer: usize) -> T {
        let (a, b) = self.interval;
        a + (b - a) * T::from_usize_lossy(layer) / T::from_usize_lossy(self.layers - 1)
    }

    /// Triangulates a closed curve base times the interval as a surface in R^3.
    /// A circle centred at the origin yields the round cylinder level set as source.
    pub fn to_surface_mesh(&self) -> Result<SurfaceMesh<T>> {
        let base = match &self.base {
            CylinderBase::Surface(s) if s.cell_size() == 2 => s,
            _ => return Err(Error::UnsupportedDimension(self.ambient_dim())),
        };
        let nb = base.num_vertices();
        let mut verts = Vec::with_capacity(3 * nb * self.layers);
        for l in 0..self.layers {
            let t = self.layer_coordinate(l);
            for v in 0..nb {
                let p = base.vertex(v);
                verts.extend([p[0], p[1], t]);
            }
        }
        let mut cells = Vec::with_capacity(6 * base.num_cells() * (self.layers - 1));
        for l in 0..self.layers - 1 {
            for c in 0..base.num_cells() {
                let (a, b) = (base.cell(c)[0], base.cell(c)[1]);
                let (a0, b0, a1, b1) = (self.node(a, l), self.node(b, l), self.node(a, l + 1), self.node(b, l + 1));
                // base segment normal (dy, -dx) x e3 ordering keeps the outward side
                cells.extend([a0, b0, b1, a0, b1, a1]);
            }
        }
        let source = base.source().and_then(|s| match &s.kind {
            LevelSetKind::Ellipsoid { center, semi_axes }
                if center.iter().all(|&c| c == T::zero()) && semi_axes[0] == semi_axes[1] =>
            {
                Some(LevelSetSurface::cylinder(semi_axes[0]))
            }
            _ => None,
        });
        SurfaceMesh::new(3, verts, cells, source)
    }
}

impl<T: Real> Carrier<T> for CylinderMesh<T> {
    fn num_nodes(&self) -> usize {
        self.node_weights.len()
    }

    fn ambient_dim(&self) -> usize {
        self.base.carrier().ambient_dim() + 1
    }

    fn position(&self, node: usize) -> Vec<T> {
        let (b, l) = self.split(node);
        let mut p = self.base.carrier().position(b);
        p.push(self.layer_coordinate(l));
        p
    }

    fn node_weights(&self) -> &[T] {
        &self.node_weights
    }

    /// Layer-by-layer product of base region weights with the `t` weights, so
    /// strips `G x [a, b]` and slabs `w x [a, b]` get their product measure.
    fn region_weights(&self, selected: &[bool], kind: RegionKind) -> Vec<T> {
        let nb = self.base_nodes();
        let mut w = vec![T::zero(); self.num_nodes()];
        for l in 0..self.layers {
            let sel = &selected[l * nb..(l + 1) * nb];
            if !sel.iter().any(|&s| s) {
                continue;
            }
            let bw = match kind {
                RegionKind::Point => sel.iter().map(|&s| if s { T::one() } else { T::zero() }).collect(),
                k => self.base.carrier().region_weights(sel, k),
            };
            let lw = if kind == RegionKind::Point { T::one() } else { self.layer_weights[l] };
            for b in 0..nb {
                w[l * nb + b] = bw[b] * lw;
            }
        }
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::mark_region;
    use crate::geometry::shapes::circle;

    #[test]
    fn interval_slab() {
        let g = DomainGrid::<f64>::unit(1, 5).unwrap();
        let c = extrude_cylinder(CylinderBase::Grid(g.clone()), (0.0, 1.0), 3).unwrap();
        assert_eq!(c.num_nodes(), 15);
        assert!((c.measure() - 1.0).abs() < 1e-12);
        let g0 = mark_region(&g, |x| x[0] == 0.0, RegionKind::BoundaryPart).unwrap();
        let strip = extrude_region(&c, &g0).unwrap();
        assert_eq!(strip.nodes.len(), 3);
        assert!((strip.measure() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn circle_cylinder_measure() {
        let c = extrude_cylinder(CylinderBase::Surface(circle::<f64>(1.0, 64).unwrap()), (0.0, 2.0), 5).unwrap();
        assert!((c.measure() - 4.0 * std::f64::consts::PI).abs() < 1e-10);
        let s = c.to_surface_mesh().unwrap();
        assert_eq!(s.num_vertices(), 320);
        for cell in 0..s.num_cells() {
            let n = s.cell_normal(cell);
            let x = s.cell_centroid(cell);
            assert!(n[0] * x[0] + n[1] * x[1] > 0.0);
        }
    }

    #[test]
    fn degenerate_interval() {
        let g = DomainGrid::<f64>::unit(1, 5).unwrap();
        let e = extrude_cylinder(CylinderBase::Grid(g), (1.0, 1.0), 3).unwrap_err();
        assert!(matches!(e, Error::DegenerateInterval { .. }));
    }
}

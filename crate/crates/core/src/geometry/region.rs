//! Marked subsets (the sets carrying traces and homogeneous conditions).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;

use super::{Carrier, RegionKind};

/// Selected nodes of a carrier with per-node region measure.
///
/// `weights` has one entry per carrier node (zero off the region), so traces are
/// plain weighted sums over nodal values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkedRegion<T> {
    pub parent_nodes: usize,
    pub nodes: Vec<usize>,
    pub weights: Vec<T>,
    pub kind: RegionKind,
}

impl<T: Real> MarkedRegion<T> {
    /// Builds a region from explicit node ids.
    pub fn from_nodes<C: Carrier<T> + ?Sized>(mesh: &C, nodes: &[usize], kind: RegionKind) -> Result<Self> {
        let mut selected = vec![false; mesh.num_nodes()];
        for &i in nodes {
            if i >= selected.len() {
                return Err(Error::DimensionMismatch { expected: selected.len(), found: i });
            }
            selected[i] = true;
        }
        Self::from_selection(mesh, &selected, kind)
    }

    pub fn from_selection<C: Carrier<T> + ?Sized>(mesh: &C, selected: &[bool], kind: RegionKind) -> Result<Self> {
        let nodes: Vec<usize> = (0..selected.len()).filter(|&i| selected[i]).collect();
        if nodes.is_empty() {
            return Err(Error::EmptyRegion);
        }
        let weights = mesh.region_weights(selected, kind);
        let region = MarkedRegion { parent_nodes: mesh.num_nodes(), nodes, weights, kind };
        if kind != RegionKind::Point && !(region.measure() > T::zero()) {
            return Err(Error::ZeroMeasure);
        }
        Ok(region)
    }

    /// Total region measure (node count for point regions).
    pub fn measure(&self) -> T {
        self.weights.iter().fold(T::zero(), |a, &w| a + w)
    }

    pub fn contains(&self, node: usize) -> bool {
        self.nodes.binary_search(&node).is_ok()
    }

    /// Boolean node mask over the parent carrier.
    pub fn mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.parent_nodes];
        self.nodes.iter().for_each(|&i| m[i] = true);
        m
    }

    /// Nodes not in the region, ascending.
    pub fn complement(&self) -> Vec<usize> {
        let m = self.mask();
        (0..self.parent_nodes).filter(|&i| !m[i]).collect()
    }
}

/// Marks the nodes whose position satisfies `predicate`.
pub fn mark_region<T: Real, C: Carrier<T> + ?Sized>(
    mesh: &C,
    predicate: impl Fn(&[T]) -> bool,
    kind: RegionKind,
) -> Result<MarkedRegion<T>> {
    let selected: Vec<bool> = (0..mesh.num_nodes()).map(|i| predicate(&mesh.position(i))).collect();
    MarkedRegion::from_selection(mesh, &selected, kind)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::shapes::circle;
    use crate::geometry::DomainGrid;

    #[test]
    fn interval_point() {
        let g = DomainGrid::<f64>::unit(1, 5).unwrap();
        let r = mark_region(&g, |x| x[0] == 0.0, RegionKind::Point).unwrap();
        assert_eq!(r.nodes, vec![0]);
    }

    #[test]
    fn square_left_edge() {
        let g = DomainGrid::<f64>::unit(2, 9).unwrap();
        let r = mark_region(&g, |x| x[0] == 0.0, RegionKind::BoundaryPart).unwrap();
        assert!((r.measure() - 1.0).abs() < 1e-10);
        assert_eq!(r.nodes.len(), 9);
    }

    #[test]
    fn half_circle_arc() {
        let m = circle::<f64>(1.0, 256).unwrap();
        let r = mark_region(&m, |x| x[1] >= -1e-12, RegionKind::Subdomain).unwrap();
        assert!((r.measure() - std::f64::consts::PI).abs() < 1e-10);
    }

    #[test]
    fn empty_and_zero_measure() {
        let g = DomainGrid::<f64>::unit(2, 5).unwrap();
        assert_eq!(mark_region(&g, |_| false, RegionKind::Point).unwrap_err(), Error::EmptyRegion);
        let corner = mark_region(&g, |x| x[0] == 0.0 && x[1] == 0.0, RegionKind::BoundaryPart);
        assert_eq!(corner.unwrap_err(), Error::ZeroMeasure);
    }
}

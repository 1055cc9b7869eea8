//! Regular tensor-product grids over axis-aligned boxes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;

use super::{Carrier, RegionKind};

/// Trapezoid weights for `n` equispaced nodes with spacing `h`.
pub fn trapezoid_weights<T: Real>(n: usize, h: T) -> Vec<T> {
    let half = T::lit(0.5);
    (0..n).map(|i| if i == 0 || i + 1 == n { half * h } else { h }).collect()
}

/// Tensor grid on `[lower, upper]`; node ids run with axis 0 fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainGrid<T> {
    lower: Vec<T>,
    upper: Vec<T>,
    shape: Vec<usize>,
    spacing: Vec<T>,
    axis_weights: Vec<Vec<T>>,
    node_weights: Vec<T>,
    boundary_mask: Vec<bool>,
}

impl<T: Real> DomainGrid<T> {
    pub fn new(lower: Vec<T>, upper: Vec<T>, shape: Vec<usize>) -> Result<Self> {
        let d = shape.len();
        if d == 0 || lower.len() != d || upper.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: lower.len().min(upper.len()) });
        }
        for k in 0..d {
            if !(upper[k] > lower[k]) {
                return Err(Error::DegenerateInterval { a: lower[k].to_f64_lossy(), b: upper[k].to_f64_lossy() });
            }
            if shape[k] < 2 {
                return Err(Error::ResolutionTooCoarse(format!("axis {k} has {} nodes", shape[k])));
            }
        }
        let spacing: Vec<T> = (0..d).map(|k| (upper[k] - lower[k]) / T::from_usize_lossy(shape[k] - 1)).collect();
        let axis_weights: Vec<Vec<T>> = (0..d).map(|k| trapezoid_weights(shape[k], spacing[k])).collect();
        let total: usize = shape.iter().product();
        let mut node_weights = Vec::with_capacity(total);
        let mut boundary_mask = Vec::with_capacity(total);
        let mut idx = vec![0usize; d];
        for _ in 0..total {
            node_weights.push((0..d).fold(T::one(), |w, k| w * axis_weights[k][idx[k]]));
            boundary_mask.push((0..d).any(|k| idx[k] == 0 || idx[k] + 1 == shape[k]));
            for k in 0..d {
                idx[k] += 1;
                if idx[k] < shape[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        Ok(DomainGrid { lower, upper, shape, spacing, axis_weights, node_weights, boundary_mask })
    }

    /// Unit cube `[0,1]^d` with `nodes` per axis.
    pub fn unit(d: usize, nodes: usize) -> Result<Self> {
        Self::new(vec![T::zero(); d], vec![T::one(); d], vec![nodes; d])
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn spacing(&self) -> &[T] {
        &self.spacing
    }

    pub fn lower(&self) -> &[T] {
        &self.lower
    }

    pub fn upper(&self) -> &[T] {
        &self.upper
    }

    pub fn axis_weights(&self, axis: usize) -> &[T] {
        &self.axis_weights[axis]
    }

    pub fn boundary_mask(&self) -> &[bool] {
        &self.boundary_mask
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.shape[..axis].iter().product()
    }

    pub fn index(&self, multi: &[usize]) -> usize {
        multi.iter().enumerate().fold(0, |acc, (k, &i)| acc + i * self.stride(k))
    }

    pub fn multi_index(&self, mut node: usize) -> Vec<usize> {
        self.shape
            .iter()
            .map(|&n| {
                let i = node % n;
                node /= n;
                i
            })
            .collect()
    }

    pub fn coordinate(&self, axis: usize, i: usize) -> T {
        self.lower[axis] + self.spacing[axis] * T::from_usize_lossy(i)
    }

    fn cell_corners(&self, lower_corner: &[usize], axes: &[usize]) -> Vec<usize> {
        (0..(1usize << axes.len()))
            .map(|mask| {
                let mut m = lower_corner.to_vec();
                for (bit, &ax) in axes.iter().enumerate() {
                    if mask >> bit & 1 == 1 {
                        m[ax] += 1;
                    }
                }
                self.index(&m)
            })
            .collect()
    }

    /// Visits every cell spanned by `axes` whose lower corner has the given fixed
    /// indices on the remaining axes.
    fn for_each_cell(&self, axes: &[usize], fixed: &[(usize, usize)], mut f: impl FnMut(&[usize])) {
        let d = self.dim();
        let ranges: Vec<usize> = (0..d).map(|k| if axes.contains(&k) { self.shape[k] - 1 } else { 1 }).collect();
        let total: usize = ranges.iter().product();
        let mut idx = vec![0usize; d];
        for _ in 0..total {
            let mut corner = idx.clone();
            for &(ax, v) in fixed {
                corner[ax] = v;
            }
            f(&corner);
            for k in 0..d {
                idx[k] += 1;
                if idx[k] < ranges[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
    }
}

impl<T: Real> Carrier<T> for DomainGrid<T> {
    fn num_nodes(&self) -> usize {
        self.node_weights.len()
    }

    fn ambient_dim(&self) -> usize {
        self.dim()
    }

    fn position(&self, node: usize) -> Vec<T> {
        self.multi_index(node).iter().enumerate().map(|(k, &i)| self.coordinate(k, i)).collect()
    }

    fn node_weights(&self) -> &[T] {
        &self.node_weights
    }

    fn region_weights(&self, selected: &[bool], kind: RegionKind) -> Vec<T> {
        let n = self.num_nodes();
        let d = self.dim();
        let mut w = vec![T::zero(); n];
        match kind {
            RegionKind::Point => {
                for (i, &s) in selected.iter().enumerate() {
                    if s {
                        w[i] = T::one();
                    }
                }
            }
            RegionKind::Subdomain => {
                let axes: Vec<usize> = (0..d).collect();
                let vol = self.spacing.iter().fold(T::one(), |a, &h| a * h);
                let share = vol / T::from_usize_lossy(1 << d);
                self.for_each_cell(&axes, &[], |corner| {
                    let c = self.cell_corners(corner, &axes);
                    if c.iter().all(|&i| selected[i]) {
                        c.iter().for_each(|&i| w[i] += share);
                    }
                });
            }
            RegionKind::BoundaryPart => {
                for k in 0..d {
                    let axes: Vec<usize> = (0..d).filter(|&a| a != k).collect();
                    let vol = axes.iter().fold(T::one(), |a, &ax| a * self.spacing[ax]);
                    let share = vol / T::from_usize_lossy(1 << axes.len());
                    for side in [0, self.shape[k] - 1] {
                        self.for_each_cell(&axes, &[(k, side)], |corner| {
                            let c = self.cell_corners(corner, &axes);
                            if c.iter().all(|&i| selected[i]) {
                                c.iter().for_each(|&i| w[i] += share);
                            }
                        });
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

    #[test]
    fn interval_trapezoid() {
        let g = DomainGrid::<f64>::new(vec![0.0], vec![1.0], vec![5]).unwrap();
        assert_eq!(g.spacing(), &[0.25]);
        assert_eq!(g.node_weights(), &[0.125, 0.25, 0.25, 0.25, 0.125]);
        assert_eq!(g.boundary_mask(), &[true, false, false, false, true]);
    }

    #[test]
    fn weights_sum_to_volume() {
        let g = DomainGrid::<f64>::new(vec![-1.0, 0.0, 2.0], vec![1.0, 0.5, 3.0], vec![5, 4, 3]).unwrap();
        assert!((g.measure() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn index_round_trip() {
        let g = DomainGrid::<f64>::unit(3, 4).unwrap();
        for node in 0..g.num_nodes() {
            assert_eq!(g.index(&g.multi_index(node)), node);
        }
        assert_eq!(g.position(g.index(&[3, 0, 1])), vec![1.0, 0.0, 1.0 / 3.0]);
    }

    #[test]
    fn boundary_face_weights() {
        let g = DomainGrid::<f64>::unit(2, 5).unwrap();
        let sel: Vec<bool> = (0..g.num_nodes()).map(|i| g.position(i)[0] == 0.0).collect();
        let w = g.region_weights(&sel, RegionKind::BoundaryPart);
        let total: f64 = w.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        let sub = g.region_weights(&vec![true; g.num_nodes()], RegionKind::Subdomain);
        assert!((sub.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

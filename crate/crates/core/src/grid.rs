//! Uniform spatial grids with row-major flattened indexing (first axis
//! slowest), matching the vector layout `p = (p_{0,0}, p_{0,1}, ...)`.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// One spatial dimension of the discretized domain `[x_min, x_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: String,
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl Axis {
    pub fn new(name: impl Into<String>, x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        let name = name.into();
        if !(x_min.is_finite() && x_max.is_finite()) || x_min >= x_max {
            return Err(Error::InvalidAxis {
                name,
                reason: String::from("require finite x_min < x_max"),
            });
        }
        if n_points < 2 {
            return Err(Error::InvalidAxis {
                name,
                reason: String::from("require at least 2 grid points"),
            });
        }
        Ok(Self { name, x_min, x_max, n_points })
    }

    /// Grid spacing `(x_max - x_min) / (n_points - 1)`.
    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    /// Coordinate of grid point `k`.
    pub fn coord(&self, k: usize) -> f64 {
        debug_assert!(k < self.n_points);
        self.x_min + k as f64 * self.spacing()
    }

    /// Index of the grid point closest to `x`.
    pub fn nearest(&self, x: f64) -> usize {
        let k = ((x - self.x_min) / self.spacing() + 0.5) as isize;
        k.clamp(0, self.n_points as isize - 1) as usize
    }
}

/// Cartesian product of axes. Tested up to two dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    axes: Vec<Axis>,
}

impl Grid {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidParameter(String::from("grid needs at least one axis")));
        }
        Ok(Self { axes })
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn total_points(&self) -> usize {
        self.axes.iter().map(|a| a.n_points).product()
    }

    /// Flattened index of a multi-index; the first axis varies slowest.
    pub fn flat_index(&self, multi: &[usize]) -> usize {
        debug_assert_eq!(multi.len(), self.dim());
        let mut flat = 0;
        for (axis, &k) in self.axes.iter().zip(multi) {
            debug_assert!(k < axis.n_points);
            flat = flat * axis.n_points + k;
        }
        flat
    }

    /// Inverse of [`Self::flat_index`].
    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut multi = alloc::vec![0; self.dim()];
        for (slot, axis) in multi.iter_mut().zip(&self.axes).rev() {
            *slot = flat % axis.n_points;
            flat /= axis.n_points;
        }
        multi
    }

    /// Physical coordinates of the grid point with flattened index `flat`.
    pub fn coords(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat)
            .iter()
            .zip(&self.axes)
            .map(|(&k, axis)| axis.coord(k))
            .collect()
    }

    /// Flattened index of the grid point nearest to `x`.
    pub fn nearest(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), actual: x.len() });
        }
        let multi: Vec<usize> =
            self.axes.iter().zip(x).map(|(axis, &xi)| axis.nearest(xi)).collect();
        Ok(self.flat_index(&multi))
    }
}

/// Builds a grid after validating every axis.
pub fn build_grid(axes: Vec<Axis>) -> Result<Grid> {
    Grid::new(axes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_domain_spacing() {
        let axis = Axis::new("x", -2.0, 2.0, 21).unwrap();
        assert!((axis.spacing() - 0.2).abs() < 1e-15);
        let grid = Grid::new(alloc::vec![axis]).unwrap();
        assert_eq!(grid.total_points(), 21);
    }

    #[test]
    fn two_axes_total() {
        let a = Axis::new("x", -2.0, 2.0, 21).unwrap();
        let b = Axis::new("y", -2.0, 2.0, 21).unwrap();
        let grid = Grid::new(alloc::vec![a, b]).unwrap();
        assert_eq!(grid.total_points(), 441);
        assert_eq!(grid.dim(), 2);
    }

    #[test]
    fn three_point_unit_interval() {
        let axis = Axis::new("x", 0.0, 1.0, 3).unwrap();
        let coords: alloc::vec::Vec<f64> = (0..3).map(|k| axis.coord(k)).collect();
        assert_eq!(coords, alloc::vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn rejects_degenerate_axes() {
        assert!(Axis::new("x", 0.0, 1.0, 1).is_err());
        assert!(Axis::new("x", 1.0, 1.0, 5).is_err());
        assert!(Axis::new("x", 2.0, 1.0, 5).is_err());
    }

    #[test]
    fn row_major_first_axis_slowest() {
        let a = Axis::new("x", 0.0, 1.0, 3).unwrap();
        let b = Axis::new("y", 0.0, 1.0, 4).unwrap();
        let grid = Grid::new(alloc::vec![a, b]).unwrap();
        assert_eq!(grid.flat_index(&[0, 0]), 0);
        assert_eq!(grid.flat_index(&[0, 3]), 3);
        assert_eq!(grid.flat_index(&[1, 0]), 4);
        assert_eq!(grid.flat_index(&[2, 3]), 11);
    }

    #[test]
    fn index_roundtrip() {
        let a = Axis::new("x", -1.0, 1.0, 5).unwrap();
        let b = Axis::new("y", 0.0, 2.0, 7).unwrap();
        let grid = Grid::new(alloc::vec![a, b]).unwrap();
        for flat in 0..grid.total_points() {
            let multi = grid.multi_index(flat);
            assert_eq!(grid.flat_index(&multi), flat);
        }
    }
}

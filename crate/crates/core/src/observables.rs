//! Summary statistics over probability vectors: per-axis means and
//! variances, and the L1 trace distance. Auxiliary sink/source sites are not
//! part of the grid and must be stripped before computing moments.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::prob::ProbVector;

/// Moments of a distribution at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentRecord {
    pub time: f64,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
}

/// Ensemble average position `<x_i> = sum_k x_i(k) p_k` per axis.
pub fn mean(p: &ProbVector, grid: &Grid) -> Result<Vec<f64>> {
    if p.len() != grid.total_points() {
        return Err(Error::DimensionMismatch { expected: grid.total_points(), actual: p.len() });
    }
    let d = grid.dim();
    let mut m = vec![0.0; d];
    for (k, &w) in p.values().iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for (axis, x) in grid.coords(k).iter().enumerate() {
            m[axis] += x * w;
        }
    }
    Ok(m)
}

/// Per-axis variance `<x_i^2> - <x_i>^2`; tiny negative roundoff is clamped.
pub fn variance(p: &ProbVector, grid: &Grid) -> Result<Vec<f64>> {
    if p.len() != grid.total_points() {
        return Err(Error::DimensionMismatch { expected: grid.total_points(), actual: p.len() });
    }
    let d = grid.dim();
    let mut m = vec![0.0; d];
    let mut m2 = vec![0.0; d];
    for (k, &w) in p.values().iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for (axis, x) in grid.coords(k).iter().enumerate() {
            m[axis] += x * w;
            m2[axis] += x * x * w;
        }
    }
    Ok((0..d)
        .map(|axis| {
            let v = m2[axis] - m[axis] * m[axis];
            debug_assert!(v >= -1e-12);
            v.max(0.0)
        })
        .collect())
}

/// Trace distance `L1(p, q) = sum_i |p_i - q_i|`.
pub fn trace_distance(pa: &ProbVector, pb: &ProbVector) -> Result<f64> {
    if pa.len() != pb.len() {
        return Err(Error::DimensionMismatch { expected: pa.len(), actual: pb.len() });
    }
    Ok(pa
        .values()
        .iter()
        .zip(pb.values())
        .map(|(a, b)| (a - b).abs())
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Axis;

    fn grid_2d() -> Grid {
        Grid::new(vec![
            Axis::new("x", -2.0, 2.0, 21).unwrap(),
            Axis::new("y", -2.0, 2.0, 21).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn symmetric_distribution_has_zero_mean() {
        let grid = grid_2d();
        let n = grid.total_points();
        let p = ProbVector::normalized(vec![1.0; n]).unwrap();
        let m = mean(&p, &grid).unwrap();
        assert!(m[0].abs() < 1e-12 && m[1].abs() < 1e-12);
    }

    #[test]
    fn point_mass_moments() {
        let grid = grid_2d();
        let p = ProbVector::delta(&grid, &[1.0, -0.4]).unwrap();
        let m = mean(&p, &grid).unwrap();
        assert!((m[0] - 1.0).abs() < 1e-12);
        assert!((m[1] + 0.4).abs() < 1e-12);
        let v = variance(&p, &grid).unwrap();
        assert_eq!(v, vec![0.0, 0.0]);
    }

    #[test]
    fn uniform_three_point_variance() {
        let grid = Grid::new(vec![Axis::new("x", -1.0, 1.0, 3).unwrap()]).unwrap();
        let p = ProbVector::normalized(vec![1.0, 1.0, 1.0]).unwrap();
        let v = variance(&p, &grid).unwrap();
        assert!((v[0] - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn trace_distance_extremes() {
        let grid = Grid::new(vec![Axis::new("x", -1.0, 1.0, 5).unwrap()]).unwrap();
        let a = ProbVector::delta(&grid, &[-1.0]).unwrap();
        let b = ProbVector::delta(&grid, &[1.0]).unwrap();
        assert_eq!(trace_distance(&a, &a).unwrap(), 0.0);
        assert!((trace_distance(&a, &b).unwrap() - 2.0).abs() < 1e-15);
    }
}

//! L1-normalized probability vectors over grid points.

use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Tiny negatives below this magnitude are treated as roundoff and clamped.
const CLAMP_TOL: f64 = 1e-14;
const NORM_TOL: f64 = 1e-12;

/// Nonnegative vector with unit L1 norm.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector {
    values: Vec<f64>,
}

impl ProbVector {
    /// Validates an already-normalized vector. Entries in `[-1e-14, 0)` are
    /// clamped to zero; anything more negative is rejected.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let mut values = values;
        clamp_roundoff(&mut values, CLAMP_TOL)?;
        let l1: f64 = values.iter().sum();
        if (l1 - 1.0).abs() > NORM_TOL {
            return Err(Error::BadNorm { l1 });
        }
        Ok(Self { values })
    }

    /// Clamps roundoff negatives (tolerance `neg_tol`) and rescales to unit
    /// L1 norm. Returns the vector together with the L1 norm seen before
    /// rescaling.
    pub fn normalized_with_drift(values: Vec<f64>, neg_tol: f64) -> Result<(Self, f64)> {
        let mut values = values;
        clamp_roundoff(&mut values, neg_tol)?;
        let l1: f64 = values.iter().sum();
        if !(l1.is_finite() && l1 > 0.0) {
            return Err(Error::BadNorm { l1 });
        }
        for v in &mut values {
            *v /= l1;
        }
        Ok((Self { values }, l1))
    }

    /// As [`Self::normalized_with_drift`] with the default roundoff
    /// tolerance, discarding the recorded norm.
    pub fn normalized(values: Vec<f64>) -> Result<Self> {
        Ok(Self::normalized_with_drift(values, CLAMP_TOL)?.0)
    }

    /// Point mass at the grid point nearest to `x`.
    pub fn delta(grid: &Grid, x: &[f64]) -> Result<Self> {
        let idx = grid.nearest(x)?;
        let mut values = alloc::vec![0.0; grid.total_points()];
        values[idx] = 1.0;
        Ok(Self { values })
    }

    /// Discretized isotropic Gaussian of standard deviation `width` centered
    /// at `x`, sampled on grid points and L1-normalized.
    pub fn gaussian(grid: &Grid, x: &[f64], width: f64) -> Result<Self> {
        if x.len() != grid.dim() {
            return Err(Error::DimensionMismatch { expected: grid.dim(), actual: x.len() });
        }
        if !(width > 0.0) {
            return Err(Error::InvalidParameter(alloc::format!(
                "gaussian width must be positive, got {width}"
            )));
        }
        let values: Vec<f64> = (0..grid.total_points())
            .map(|flat| {
                let r2: f64 = grid
                    .coords(flat)
                    .iter()
                    .zip(x)
                    .map(|(c, m)| (c - m) * (c - m))
                    .sum();
                (-r2 / (2.0 * width * width)).exp()
            })
            .collect();
        Self::normalized(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn clamp_roundoff(values: &mut [f64], neg_tol: f64) -> Result<()> {
    for (index, v) in values.iter_mut().enumerate() {
        if *v < 0.0 {
            if *v < -neg_tol {
                return Err(Error::NegativeEntry { index, value: *v });
            }
            *v = 0.0;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Axis;
    use alloc::vec;

    #[test]
    fn clamps_roundoff_negatives() {
        let p = ProbVector::new(vec![0.5, 0.5 + 5e-15, -5e-15]).unwrap();
        assert_eq!(p.values()[2], 0.0);
    }

    #[test]
    fn rejects_true_negatives() {
        assert!(matches!(
            ProbVector::new(vec![1.0, -1e-3]),
            Err(Error::NegativeEntry { .. })
        ));
    }

    #[test]
    fn rejects_unnormalized() {
        assert!(matches!(ProbVector::new(vec![0.4, 0.4]), Err(Error::BadNorm { .. })));
    }

    #[test]
    fn delta_at_origin() {
        let grid = Grid::new(vec![Axis::new("x", -2.0, 2.0, 21).unwrap()]).unwrap();
        let p = ProbVector::delta(&grid, &[0.0]).unwrap();
        assert_eq!(p.values()[10], 1.0);
        assert_eq!(p.values().iter().filter(|&&v| v != 0.0).count(), 1);
    }
}

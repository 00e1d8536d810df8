//! Drift/diffusion models and evaluation of Fokker-Planck coefficients on a
//! grid.
//!
//! The drift coefficient is `D^(i)(x) = f_i(x) + g_i(x) d/dx_i g_i(x)` for
//! diagonal noise gains; the diffusion coefficient is `D^(ii)(x) = g_i(x)^2`.
//! The noise-induced drift term is computed by central finite differences of
//! `g` on the grid (one-sided at the boundary); for constant gains it
//! vanishes exactly and the drift equals `f`.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::grid::Grid;

type FieldFn = Box<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

/// A dynamical system `dx/dt = f(x) + g(x) * noise` with diagonal noise
/// gains.
pub struct DriftDiffusionModel {
    dim: usize,
    drift: FieldFn,
    noise_gain: FieldFn,
    constant_gain: bool,
}

impl DriftDiffusionModel {
    /// Custom model from evaluators. Set `constant_gain` when `g` does not
    /// depend on position, so the noise-induced drift term is skipped.
    pub fn new(dim: usize, drift: FieldFn, noise_gain: FieldFn, constant_gain: bool) -> Self {
        Self { dim, drift, noise_gain, constant_gain }
    }

    /// 1D double well: `f(x) = x - kappa x^3`, constant diffusion `d`.
    pub fn double_well_1d(kappa: f64, d: f64) -> Result<Self> {
        if kappa <= 0.0 || d <= 0.0 {
            return Err(Error::InvalidParameter(alloc::format!(
                "double_well_1d requires kappa > 0 and d > 0, got kappa={kappa}, d={d}"
            )));
        }
        let g = d.sqrt();
        Ok(Self::new(
            1,
            Box::new(move |x, out| out[0] = x[0] - kappa * x[0] * x[0] * x[0]),
            Box::new(move |_, out| out[0] = g),
            true,
        ))
    }

    /// 2D inward spiral: `f = (y - gamma x y^2, -x - gamma x^2 y)`, constant
    /// diffusion `d` on both axes. The linear part is a pure rotation and the
    /// coupling gives `d(x^2 + y^2)/dt = -4 gamma x^2 y^2 <= 0`, so integral
    /// curves spiral inward toward the origin.
    pub fn spiral_2d(gamma: f64, d: f64) -> Result<Self> {
        if gamma <= 0.0 || d <= 0.0 {
            return Err(Error::InvalidParameter(alloc::format!(
                "spiral_2d requires gamma > 0 and d > 0, got gamma={gamma}, d={d}"
            )));
        }
        let g = d.sqrt();
        Ok(Self::new(
            2,
            Box::new(move |x, out| {
                out[0] = x[1] - gamma * x[0] * x[1] * x[1];
                out[1] = -x[0] - gamma * x[0] * x[0] * x[1];
            }),
            Box::new(move |_, out| {
                out[0] = g;
                out[1] = g;
            }),
            true,
        ))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn drift_at(&self, x: &[f64], out: &mut [f64]) {
        (self.drift)(x, out);
    }

    pub fn noise_gain_at(&self, x: &[f64], out: &mut [f64]) {
        (self.noise_gain)(x, out);
    }
}

/// Drift and diagonal diffusion coefficients sampled on every grid point.
#[derive(Debug, Clone)]
pub struct CoefficientField {
    grid: Grid,
    /// `drift[axis][flat_index]`
    drift: Vec<Vec<f64>>,
    /// `diffusion[axis][flat_index]`, strictly positive
    diffusion: Vec<Vec<f64>>,
}

impl CoefficientField {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn drift(&self, axis: usize) -> &[f64] {
        &self.drift[axis]
    }

    pub fn diffusion(&self, axis: usize) -> &[f64] {
        &self.diffusion[axis]
    }
}

/// Samples `D^(i)` and `D^(ii)` on the grid.
pub fn eval_coefficients(model: &DriftDiffusionModel, grid: &Grid) -> Result<CoefficientField> {
    let d = grid.dim();
    if model.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, actual: model.dim() });
    }
    let n = grid.total_points();
    let mut drift = vec![vec![0.0; n]; d];
    let mut diffusion = vec![vec![0.0; n]; d];
    let mut f = vec![0.0; d];
    let mut g = vec![0.0; d];

    let mut gains: Vec<Vec<f64>> = vec![Vec::new(); d];
    if !model.constant_gain {
        for item in gains.iter_mut() {
            *item = vec![0.0; n];
        }
    }

    for flat in 0..n {
        let x = grid.coords(flat);
        model.drift_at(&x, &mut f);
        model.noise_gain_at(&x, &mut g);
        for axis in 0..d {
            if !(f[axis].is_finite() && g[axis].is_finite()) {
                return Err(Error::NonFiniteCoefficient { axis, index: flat });
            }
            drift[axis][flat] = f[axis];
            diffusion[axis][flat] = g[axis] * g[axis];
            if !model.constant_gain {
                gains[axis][flat] = g[axis];
            }
        }
    }

    // Noise-induced drift g_i * d/dx_i g_i by finite differences of the
    // sampled gains along axis i.
    if !model.constant_gain {
        for axis in 0..d {
            let n_axis = grid.axes()[axis].n_points;
            let dx = grid.axes()[axis].spacing();
            for flat in 0..n {
                let mut multi = grid.multi_index(flat);
                let k = multi[axis];
                let deriv = if k == 0 {
                    multi[axis] = 1;
                    let up = gains[axis][grid.flat_index(&multi)];
                    (up - gains[axis][flat]) / dx
                } else if k == n_axis - 1 {
                    multi[axis] = k - 1;
                    let down = gains[axis][grid.flat_index(&multi)];
                    (gains[axis][flat] - down) / dx
                } else {
                    multi[axis] = k + 1;
                    let up = gains[axis][grid.flat_index(&multi)];
                    multi[axis] = k - 1;
                    let down = gains[axis][grid.flat_index(&multi)];
                    (up - down) / (2.0 * dx)
                };
                drift[axis][flat] += gains[axis][flat] * deriv;
            }
        }
    }

    for axis in 0..d {
        for flat in 0..n {
            let v = diffusion[axis][flat];
            if !(v > 0.0) {
                return Err(Error::NonPositiveDiffusion { axis, index: flat, value: v });
            }
        }
    }

    Ok(CoefficientField { grid: grid.clone(), drift, diffusion })
}

/// Largest admissible grid spacing per axis: `min_k |2 D^(ii)_k / D^(i)_k|`
/// over interior points of that axis. Returns `+inf` for an axis whose drift
/// vanishes at every interior point.
pub fn mesh_bound(field: &CoefficientField) -> Vec<f64> {
    let grid = field.grid();
    let d = grid.dim();
    let mut bounds = vec![f64::INFINITY; d];
    for axis in 0..d {
        let n_axis = grid.axes()[axis].n_points;
        for flat in 0..grid.total_points() {
            let k = grid.multi_index(flat)[axis];
            if k == 0 || k == n_axis - 1 {
                continue;
            }
            let drift = field.drift(axis)[flat];
            if drift == 0.0 {
                continue;
            }
            let bound = (2.0 * field.diffusion(axis)[flat] / drift).abs();
            if bound < bounds[axis] {
                bounds[axis] = bound;
            }
        }
    }
    bounds
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Axis;

    fn grid_1d() -> Grid {
        Grid::new(vec![Axis::new("x", -2.0, 2.0, 21).unwrap()]).unwrap()
    }

    #[test]
    fn double_well_coefficients() {
        let model = DriftDiffusionModel::double_well_1d(0.5, 0.15).unwrap();
        let grid = grid_1d();
        let field = eval_coefficients(&model, &grid).unwrap();
        let at_zero = grid.nearest(&[0.0]).unwrap();
        assert!(field.drift(0)[at_zero].abs() < 1e-14);
        assert!((field.diffusion(0)[at_zero] - 0.15).abs() < 1e-14);
        let at_two = grid.nearest(&[2.0]).unwrap();
        assert!((field.drift(0)[at_two] - (-2.0)).abs() < 1e-12);
    }

    #[test]
    fn spiral_drift_at_one_one() {
        let model = DriftDiffusionModel::spiral_2d(0.1, 0.15).unwrap();
        let grid = Grid::new(vec![
            Axis::new("x", -2.0, 2.0, 21).unwrap(),
            Axis::new("y", -2.0, 2.0, 21).unwrap(),
        ])
        .unwrap();
        let field = eval_coefficients(&model, &grid).unwrap();
        let at = grid.nearest(&[1.0, 1.0]).unwrap();
        assert!((field.drift(0)[at] - 0.9).abs() < 1e-12);
        assert!((field.drift(1)[at] - (-1.1)).abs() < 1e-12);
        // Off the diagonal the rotational structure shows: at (1, 0) the
        // drift is purely tangential.
        let axis = grid.nearest(&[1.0, 0.0]).unwrap();
        assert!(field.drift(0)[axis].abs() < 1e-12);
        assert!((field.drift(1)[axis] - (-1.0)).abs() < 1e-12);
    }

    #[test]
    fn mesh_bound_constant_coefficients() {
        let model = DriftDiffusionModel::new(
            1,
            Box::new(|_, out| out[0] = 1.0),
            Box::new(|_, out| out[0] = 0.5f64.sqrt()),
            true,
        );
        let grid = grid_1d();
        let field = eval_coefficients(&model, &grid).unwrap();
        let bounds = mesh_bound(&field);
        assert!((bounds[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mesh_bound_double_well() {
        let model = DriftDiffusionModel::double_well_1d(0.5, 0.15).unwrap();
        let grid = grid_1d();
        let field = eval_coefficients(&model, &grid).unwrap();
        let bounds = mesh_bound(&field);
        // Minimum over interior points sits at x = +-1.8 where |f| = 1.116.
        assert!((bounds[0] - 2.0 * 0.15 / 1.116).abs() < 1e-12);
    }

    #[test]
    fn mesh_bound_zero_drift_is_unbounded() {
        let model = DriftDiffusionModel::new(
            1,
            Box::new(|_, out| out[0] = 0.0),
            Box::new(|_, out| out[0] = 1.0),
            true,
        );
        let grid = grid_1d();
        let field = eval_coefficients(&model, &grid).unwrap();
        assert_eq!(mesh_bound(&field)[0], f64::INFINITY);
    }

    #[test]
    fn position_dependent_gain_adds_drift_term() {
        // g(x) = 1 + 0.1 x  =>  drift gains g g' = 0.1 (1 + 0.1 x).
        let model = DriftDiffusionModel::new(
            1,
            Box::new(|_, out| out[0] = 0.0),
            Box::new(|x, out| out[0] = 1.0 + 0.1 * x[0]),
            false,
        );
        let grid = grid_1d();
        let field = eval_coefficients(&model, &grid).unwrap();
        let at = grid.nearest(&[1.0]).unwrap();
        let expected = 0.1 * (1.0 + 0.1);
        // Central differences are exact for a linear gain.
        assert!((field.drift(0)[at] - expected).abs() < 1e-12);
    }

    #[test]
    fn mesh_bound_scale_invariance() {
        // Scaling drift and diffusion by the same constant leaves the bound
        // unchanged.
        for c in [0.5, 2.0, 7.3] {
            let base = DriftDiffusionModel::double_well_1d(0.5, 0.15).unwrap();
            let scaled = DriftDiffusionModel::new(
                1,
                Box::new(move |x, out| out[0] = c * (x[0] - 0.5 * x[0] * x[0] * x[0])),
                Box::new(move |_, out| out[0] = (c * 0.15f64).sqrt()),
                true,
            );
            let grid = grid_1d();
            let a = mesh_bound(&eval_coefficients(&base, &grid).unwrap());
            let b = mesh_bound(&eval_coefficients(&scaled, &grid).unwrap());
            assert!((a[0] - b[0]).abs() < 1e-12 * a[0]);
        }
    }
}

//! Classical reference integrators: dense matrix exponential, forward
//! Euler, Euler-Maruyama Monte Carlo, and the analytic 1D steady state.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DVector;
#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::generator::GeneratorMatrix;
use crate::grid::Grid;
use crate::linalg;
use crate::model::DriftDiffusionModel;
use crate::prob::ProbVector;

/// Dense-exponentiation dimension limit.
const EXPM_DENSE_LIMIT: usize = 4096;

/// Time-stamped sequence of probability vectors with the L1 norm recorded
/// before each renormalization.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ProbVector>,
    /// L1 norm observed before renormalization of each snapshot; 1.0 means
    /// conservation held exactly.
    pub l1_drift: Vec<f64>,
    pub solver: String,
}

impl Trajectory {
    pub fn new(solver: impl Into<String>) -> Self {
        Self { times: Vec::new(), states: Vec::new(), l1_drift: Vec::new(), solver: solver.into() }
    }

    pub fn push(&mut self, time: f64, state: ProbVector, drift: f64) {
        debug_assert!(self.times.last().map_or(true, |&t| time > t));
        self.times.push(time);
        self.states.push(state);
        self.l1_drift.push(drift);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> Option<&ProbVector> {
        self.states.last()
    }
}

/// `p(t) = e^{R t} p0` at each requested time, by dense scaling-and-squaring
/// exponentiation.
pub fn expm_propagate(r: &GeneratorMatrix, p0: &ProbVector, times: &[f64]) -> Result<Trajectory> {
    if r.dim() > EXPM_DENSE_LIMIT {
        return Err(Error::DenseLimit { dim: r.dim(), limit: EXPM_DENSE_LIMIT });
    }
    if p0.len() != r.dim() {
        return Err(Error::DimensionMismatch { expected: r.dim(), actual: p0.len() });
    }
    let dense = r.to_dense();
    let p0_vec = DVector::from_column_slice(p0.values());
    let mut traj = Trajectory::new("classical_expm");
    for &t in times {
        let state = if t == 0.0 {
            p0_vec.clone()
        } else {
            let propagator = linalg::expm(&dense.map(|x| x * t));
            &propagator * &p0_vec
        };
        let (p, l1) = ProbVector::normalized_with_drift(state.iter().copied().collect(), 1e-9)?;
        traj.push(t, p, l1);
    }
    Ok(traj)
}

/// Forward Euler `p_{m+1} = (I + dt R) p_m`, renormalized per step with the
/// drift recorded. The trajectory includes the initial state at `t = 0`.
pub fn euler_propagate(
    r: &GeneratorMatrix,
    p0: &ProbVector,
    dt: f64,
    n_steps: usize,
) -> Result<Trajectory> {
    if !(dt > 0.0) && n_steps > 0 {
        return Err(Error::InvalidParameter(format!("step size must be positive, got {dt}")));
    }
    if p0.len() != r.dim() {
        return Err(Error::DimensionMismatch { expected: r.dim(), actual: p0.len() });
    }
    let mut traj = Trajectory::new("classical_euler");
    traj.push(0.0, p0.clone(), 1.0);
    let mut current = p0.clone();
    for step in 1..=n_steps {
        let rp = r.matvec(current.values())?;
        let next: Vec<f64> =
            current.values().iter().zip(&rp).map(|(p, dp)| p + dt * dp).collect();
        // Entries below -1e-10 signal a stability/mesh-bound violation.
        let (p, l1) = ProbVector::normalized_with_drift(next, 1e-10).map_err(|e| match e {
            Error::NegativeEntry { index, value } => Error::PositivityLost { index, value },
            other => other,
        })?;
        current = p;
        traj.push(step as f64 * dt, current.clone(), l1);
    }
    Ok(traj)
}

/// Starting condition for the Monte Carlo sampler.
#[derive(Debug, Clone)]
pub enum McStart {
    /// All samples begin at this state-space point.
    Point(Vec<f64>),
    /// Sample starting grid points from this distribution.
    Distribution(ProbVector),
}

/// Euler-Maruyama sampling of the underlying SDE with mirror reflection at
/// the domain edges; returns the L1-normalized grid histogram of the final
/// positions. Deterministic for a fixed `(seed, n_samples)`: sample `i` uses
/// an independent stream `i` of a ChaCha generator seeded with `seed`.
pub fn sde_monte_carlo(
    model: &DriftDiffusionModel,
    grid: &Grid,
    start: &McStart,
    dt: f64,
    n_steps: usize,
    n_samples: usize,
    seed: u64,
) -> Result<ProbVector> {
    let d = grid.dim();
    if model.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, actual: model.dim() });
    }
    if !(dt >= 0.0) {
        return Err(Error::InvalidParameter(format!("negative step size {dt}")));
    }
    if n_samples == 0 {
        return Err(Error::InvalidParameter(String::from("need at least one sample")));
    }
    if let McStart::Point(x0) = start {
        if x0.len() != d {
            return Err(Error::DimensionMismatch { expected: d, actual: x0.len() });
        }
    }

    let mut histogram = vec![0.0f64; grid.total_points()];
    let mut x = vec![0.0; d];
    let mut f = vec![0.0; d];
    let mut g = vec![0.0; d];

    for sample in 0..n_samples {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(sample as u64);

        match start {
            McStart::Point(x0) => x.copy_from_slice(x0),
            McStart::Distribution(p) => {
                // Inverse-CDF draw of a starting grid point.
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                let mut idx = p.len() - 1;
                for (k, &w) in p.values().iter().enumerate() {
                    acc += w;
                    if u < acc {
                        idx = k;
                        break;
                    }
                }
                x.copy_from_slice(&grid.coords(idx));
            }
        }

        for step in 0..n_steps {
            model.drift_at(&x, &mut f);
            model.noise_gain_at(&x, &mut g);
            for axis in 0..d {
                // Langevin normalization <G G> = 2 delta: variance 2 D dt
                // with D = g^2.
                let noise: f64 = rng.sample(rand_distr::StandardNormal);
                x[axis] += f[axis] * dt + (2.0 * g[axis] * g[axis] * dt).sqrt() * noise;
                let (lo, hi) = {
                    let a = &grid.axes()[axis];
                    (a.x_min, a.x_max)
                };
                // Mirror reflection at the domain edge.
                if x[axis] < lo {
                    x[axis] = 2.0 * lo - x[axis];
                } else if x[axis] > hi {
                    x[axis] = 2.0 * hi - x[axis];
                }
                if x[axis] < lo || x[axis] > hi {
                    return Err(Error::SampleEscaped { sample, step });
                }
            }
        }

        histogram[grid.nearest(&x)?] += 1.0;
    }

    Ok(ProbVector::normalized(histogram)?)
}

/// Discretized analytic steady state of the 1D double well:
/// `p_k ~ exp((2 x_k^2 - kappa x_k^4) / (4 D))`, L1-normalized.
pub fn steady_state_1d(kappa: f64, d: f64, grid: &Grid) -> Result<ProbVector> {
    if grid.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, actual: grid.dim() });
    }
    if !(kappa > 0.0 && d > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "steady_state_1d requires kappa > 0 and d > 0, got kappa={kappa}, d={d}"
        )));
    }
    let values: Vec<f64> = (0..grid.total_points())
        .map(|k| {
            let x = grid.coords(k)[0];
            ((2.0 * x * x - kappa * x * x * x * x) / (4.0 * d)).exp()
        })
        .collect();
    ProbVector::normalized(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::{assemble_1d_rates, BoundaryCondition};
    use crate::grid::Axis;
    use crate::model::eval_coefficients;
    use crate::observables::trace_distance;
    use alloc::boxed::Box;

    fn double_well_generator() -> GeneratorMatrix {
        let model = DriftDiffusionModel::double_well_1d(0.5, 0.15).unwrap();
        let grid = Grid::new(vec![Axis::new("x", -2.0, 2.0, 21).unwrap()]).unwrap();
        let field = eval_coefficients(&model, &grid).unwrap();
        assemble_1d_rates(&field, BoundaryCondition::Reflecting).unwrap()
    }

    #[test]
    fn expm_zero_generator_is_identity() {
        // Zero drift and tiny diffusion scaled by t = 0 leaves p unchanged.
        let r = double_well_generator();
        let p0 = ProbVector::delta(r.grid(), &[0.0]).unwrap();
        let traj = expm_propagate(&r, &p0, &[0.0]).unwrap();
        assert_eq!(traj.states[0], p0);
    }

    #[test]
    fn expm_two_state_closed_form() {
        // dp/dt = [[-a, b], [a, -b]] p has p0(t) = b/(a+b) + (p0 - b/(a+b)) e^{-(a+b)t}.
        let (a, b): (f64, f64) = (0.7, 0.4);
        let dense = nalgebra::DMatrix::from_row_slice(2, 2, &[-a, b, a, -b]);
        for &t in &[0.1, 0.5, 2.0] {
            let e = linalg::expm(&dense.map(|x| x * t));
            let p0 = nalgebra::DVector::from_vec(vec![1.0, 0.0]);
            let p = &e * &p0;
            let eq = b / (a + b);
            let expected0 = eq + (1.0 - eq) * (-(a + b) * t).exp();
            assert!((p[0] - expected0).abs() < 1e-12);
            assert!((p[0] + p[1] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn euler_zero_steps_echoes_initial() {
        let r = double_well_generator();
        let p0 = ProbVector::delta(r.grid(), &[0.0]).unwrap();
        let traj = euler_propagate(&r, &p0, 0.1, 0).unwrap();
        assert_eq!(traj.len(), 1);
        assert_eq!(traj.states[0], p0);
    }

    #[test]
    fn euler_one_step_error_is_second_order() {
        let r = double_well_generator();
        let p0 = ProbVector::gaussian(r.grid(), &[0.0], 0.4).unwrap();
        let gap = |dt: f64| -> f64 {
            let e = euler_propagate(&r, &p0, dt, 1).unwrap();
            let x = expm_propagate(&r, &p0, &[dt]).unwrap();
            trace_distance(&e.states[1], &x.states[0]).unwrap()
        };
        let g1 = gap(0.02);
        let g2 = gap(0.01);
        let ratio = g1 / g2;
        assert!((2.5..6.0).contains(&ratio), "O(dt^2) ratio was {ratio}");
    }

    #[test]
    fn euler_forty_steps_is_bimodal() {
        let r = double_well_generator();
        let p0 = ProbVector::delta(r.grid(), &[0.0]).unwrap();
        let traj = euler_propagate(&r, &p0, 0.1, 40).unwrap();
        let p = traj.final_state().unwrap().values();
        let grid = r.grid();
        // Maxima near x = +-sqrt(2) ~ +-1.4: the grid points at +-1.4 must
        // dominate their neighbors toward the center and the origin must be
        // a local minimum.
        let at = |x: f64| p[grid.nearest(&[x]).unwrap()];
        assert!(at(1.4) > at(0.8));
        assert!(at(-1.4) > at(-0.8));
        assert!(at(1.4) > at(0.0));
        // Symmetric dynamics from a symmetric start.
        assert!((at(1.4) - at(-1.4)).abs() < 1e-12);
    }

    #[test]
    fn euler_converges_to_expm_linearly() {
        let r = double_well_generator();
        let p0 = ProbVector::gaussian(r.grid(), &[0.0], 0.4).unwrap();
        let horizon = 2.0;
        let gap = |dt: f64| -> f64 {
            let n = (horizon / dt) as usize;
            let e = euler_propagate(&r, &p0, dt, n).unwrap();
            let x = expm_propagate(&r, &p0, &[horizon]).unwrap();
            trace_distance(e.final_state().unwrap(), &x.states[0]).unwrap()
        };
        let g1 = gap(0.05);
        let g2 = gap(0.025);
        let ratio = g1 / g2;
        assert!((1.5..3.0).contains(&ratio), "O(dt) ratio was {ratio}");
    }

    #[test]
    fn mc_frozen_dynamics_is_point_mass() {
        // Drift and diffusion cannot both be zero through the public model
        // constructors (diffusion must stay positive for the generator), so
        // freeze dynamics by taking zero steps.
        let model = DriftDiffusionModel::double_well_1d(0.5, 0.15).unwrap();
        let grid = Grid::new(vec![Axis::new("x", -2.0, 2.0, 21).unwrap()]).unwrap();
        let h = sde_monte_carlo(&model, &grid, &McStart::Point(vec![0.6]), 1e-3, 0, 100, 7).unwrap();
        let idx = grid.nearest(&[0.6]).unwrap();
        assert_eq!(h.values()[idx], 1.0);
    }

    #[test]
    fn mc_heat_kernel_variance() {
        // Pure diffusion D = 0.15 from a delta at 0: Var(x(t)) = 2 D t.
        let model = DriftDiffusionModel::new(
            1,
            Box::new(|_, out| out[0] = 0.0),
            Box::new(|_, out| out[0] = 0.15f64.sqrt()),
            true,
        );
        let grid = Grid::new(vec![Axis::new("x", -4.0, 4.0, 81).unwrap()]).unwrap();
        let h =
            sde_monte_carlo(&model, &grid, &McStart::Point(vec![0.0]), 1e-3, 1000, 20_000, 11).unwrap();
        let var = crate::observables::variance(&h, &grid).unwrap()[0];
        let expected = 2.0 * 0.15 * 1.0;
        // Monte Carlo + binning tolerance.
        assert!((var - expected).abs() < 0.02, "variance {var} vs {expected}");
    }

    #[test]
    fn mc_is_deterministic_in_seed() {
        let model = DriftDiffusionModel::double_well_1d(0.5, 0.15).unwrap();
        let grid = Grid::new(vec![Axis::new("x", -2.0, 2.0, 21).unwrap()]).unwrap();
        let a = sde_monte_carlo(&model, &grid, &McStart::Point(vec![0.0]), 1e-2, 100, 500, 3).unwrap();
        let b = sde_monte_carlo(&model, &grid, &McStart::Point(vec![0.0]), 1e-2, 100, 500, 3).unwrap();
        assert_eq!(a, b);
        let c = sde_monte_carlo(&model, &grid, &McStart::Point(vec![0.0]), 1e-2, 100, 500, 4).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn steady_state_shape() {
        let grid = Grid::new(vec![Axis::new("x", -2.0, 2.0, 21).unwrap()]).unwrap();
        let p = steady_state_1d(0.5, 0.15, &grid).unwrap();
        let v = p.values();
        // Ratio at sqrt(2) vs 0: exp((4 - 2)/0.6) = e^{10/3}. The grid point
        // 1.4 is the closest to sqrt(2); evaluate the exact ratio there.
        let at = |x: f64| v[grid.nearest(&[x]).unwrap()];
        let x = 1.4f64;
        let expected = ((2.0 * x * x - 0.5 * x.powi(4)) / 0.6).exp();
        assert!((at(1.4) / at(0.0) - expected).abs() < 1e-10 * expected);
        // Symmetry.
        for k in 0..21 {
            assert!((v[k] - v[20 - k]).abs() < 1e-15);
        }
        // Maxima at +-1/sqrt(kappa) = +-sqrt(2); on this grid, x = 1.4.
        let max_idx = v
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        let max_x = grid.coords(max_idx)[0].abs();
        assert!((max_x - 1.4).abs() < 1e-12);
    }

    #[test]
    fn steady_state_is_expm_fixed_point_under_refinement() {
        let residual = |n: usize| -> f64 {
            let model = DriftDiffusionModel::double_well_1d(0.5, 0.15).unwrap();
            let grid = Grid::new(vec![Axis::new("x", -2.0, 2.0, n).unwrap()]).unwrap();
            let field = eval_coefficients(&model, &grid).unwrap();
            let r = assemble_1d_rates(&field, BoundaryCondition::Reflecting).unwrap();
            let ps = steady_state_1d(0.5, 0.15, &grid).unwrap();
            let traj = expm_propagate(&r, &ps, &[0.5]).unwrap();
            trace_distance(&traj.states[0], &ps).unwrap()
        };
        let r1 = residual(21);
        let r2 = residual(41);
        assert!(r2 < r1, "residual did not decrease: {r1} -> {r2}");
    }
}

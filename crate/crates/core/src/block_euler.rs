//! Forward-Euler stepping by unitary block encoding.
//!
//! One Euler update `p -> (I + dt R) p` is embedded as the lower-left block
//! of a unitary on a doubled space. The emulation is post-selection-exact:
//! it follows the successful ancilla branch deterministically and tracks its
//! probability, reporting the measurement cost through the expected number
//! of solver calls.
//!
//! The explicit unitary exists only when `I + dt R` is a contraction, which
//! requires the Hermitian part of `R` to be negative semidefinite. For
//! conserving master-equation generators that part is generically
//! indefinite (a two-site exchange with unequal rates already breaks it),
//! so [`build_block_encoding`] rejects such matrices while
//! [`run_block_euler`] still emulates the post-selected branch, which only
//! ever applies `I + dt R` and is independent of how the unitary dilation
//! is completed. The contraction premises hold exactly in the
//! detailed-balance gauge (`GeneratorMatrix::symmetrized_1d`), where the
//! full construction can be exercised.

use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::{Complex, DMatrix, DVector};
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::classical::Trajectory;
use crate::error::{Error, Result};
use crate::generator::GeneratorMatrix;
use crate::linalg;
use crate::prob::ProbVector;

/// Negative eigenvalues of `I - A^T A` beyond this magnitude abort the
/// square-root construction; anything closer to zero is clamped.
const CLAMP_ABORT: f64 = 1e-8;
/// Unitarity acceptance threshold for the assembled block unitary.
const UNITARITY_TOL: f64 = 1e-8;
/// Post-selection probabilities below this are treated as annihilation.
const SUCCESS_CUTOFF: f64 = 1e-14;
/// Eigenvalues of `-R - R^T` below this are treated as zero modes.
const ZERO_MODE_REL_CUTOFF: f64 = 1e-10;
/// Hermitian-part eigenvalues of `R` above this make the generator
/// non-dissipative for the purposes of the explicit encoding.
const DISSIPATIVITY_TOL: f64 = 1e-8;

/// Complex amplitude vector with post-selection bookkeeping.
#[derive(Debug, Clone)]
pub struct EmulatorState {
    /// L2-normalized amplitudes.
    pub amplitudes: DVector<Complex<f64>>,
    /// Product of per-step success probabilities so far.
    pub cumulative_success: f64,
    /// L1 norm of the represented (real) probability vector.
    pub l1_scale: f64,
}

impl EmulatorState {
    pub fn from_prob(p: &ProbVector) -> Self {
        let v = DVector::from_iterator(p.len(), p.values().iter().map(|&x| Complex::new(x, 0.0)));
        let l2 = v.norm();
        Self { amplitudes: v.map(|z| z / l2), cumulative_success: 1.0, l1_scale: 1.0 }
    }

    /// Real parts clamped and L1-normalized. Errors if a genuinely complex
    /// amplitude is present.
    pub fn to_prob(&self, neg_tol: f64) -> Result<ProbVector> {
        let max_imag = self.amplitudes.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        if max_imag > 1e-10 {
            return Err(Error::ImaginaryResidue { value: max_imag });
        }
        let values: Vec<f64> = self.amplitudes.iter().map(|z| z.re).collect();
        // A global sign flip is unobservable in the emulation; fix it by the
        // dominant component.
        let l1: f64 = values.iter().sum();
        let values = if l1 < 0.0 { values.iter().map(|v| -v).collect() } else { values };
        Ok(ProbVector::normalized_with_drift(values, neg_tol)?.0)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }
}

/// One Euler step `A = I + dt R` embedded in a `2 dim` unitary.
#[derive(Debug, Clone)]
pub struct BlockEncodedStep {
    pub dt: f64,
    /// The encoded matrix `A = I + dt R`.
    pub a: DMatrix<f64>,
    /// The block unitary; `u[dim.., ..dim] == a`.
    pub u: DMatrix<f64>,
}

/// Largest admissible Euler step for the explicit block encoding:
/// `lambda*_min(-R - R^T) / lambda_max(R R^T)`, where `lambda*_min` is the
/// smallest nonzero eigenvalue (relative cutoff `1e-10 lambda_max`).
///
/// Errors with `NotDissipative` when `-R - R^T` has eigenvalues below
/// `-1e-8`: the bound presumes a negative-semidefinite Hermitian part,
/// without which no step size makes `I + dt R` a contraction.
pub fn max_step_size(r: &GeneratorMatrix) -> Result<f64> {
    let dense = r.to_dense();
    let s = -(&dense + dense.transpose());
    let s_eig = linalg::symmetric_eigen(&s);
    let s_max = s_eig.eigenvalues.iter().fold(0.0f64, |m, &w| m.max(w));
    for &w in &s_eig.eigenvalues {
        if w < -DISSIPATIVITY_TOL {
            return Err(Error::NotDissipative { value: w });
        }
    }
    let cutoff = ZERO_MODE_REL_CUTOFF * s_max;
    let lambda_min_star = s_eig
        .eigenvalues
        .iter()
        .copied()
        .filter(|&w| w > cutoff)
        .fold(f64::INFINITY, f64::min);
    if !lambda_min_star.is_finite() {
        return Err(Error::InvalidParameter(String::from(
            "R + R^T has no nonzero eigenvalue; Hermitian part vanishes",
        )));
    }
    let rrt = &dense * dense.transpose();
    let rrt_max = linalg::symmetric_eigen(&rrt)
        .eigenvalues
        .iter()
        .fold(0.0f64, |m, &w| m.max(w));
    Ok(lambda_min_star / rrt_max)
}

/// Principal square root of a symmetric PSD matrix with eigenvalues
/// clamped at zero; aborts if an eigenvalue is negative beyond `CLAMP_ABORT`.
fn psd_sqrt(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = linalg::symmetric_eigen(m);
    for &w in &eig.eigenvalues {
        if w < -CLAMP_ABORT {
            return Err(Error::IndefiniteBlock { value: w });
        }
    }
    let sqrt_d = DMatrix::from_diagonal(&DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&w| w.max(0.0).sqrt()),
    ));
    Ok(&eig.vectors * sqrt_d * eig.vectors.transpose())
}

/// Builds the block unitary
/// `U = [[sqrt(I - A^T A), A^T], [A, -sqrt(I - A A^T)]]` for `A = I + dt R`.
/// Rejects with `StepSizeAboveBound` when `I - A^T A` is indefinite beyond
/// the clamping tolerance, i.e. when `A` is not a contraction at this `dt`.
pub fn build_block_encoding(r: &GeneratorMatrix, dt: f64) -> Result<BlockEncodedStep> {
    if dt < 0.0 {
        return Err(Error::InvalidParameter(alloc::format!("negative step size {dt}")));
    }
    let n = r.dim();
    let a = DMatrix::<f64>::identity(n, n) + r.to_dense() * dt;
    let ata = DMatrix::<f64>::identity(n, n) - a.transpose() * &a;
    let aat = DMatrix::<f64>::identity(n, n) - &a * a.transpose();
    let reject = |e: Error| match e {
        Error::IndefiniteBlock { .. } => {
            Error::StepSizeAboveBound { dt, bound: max_step_size(r).unwrap_or(f64::NAN) }
        }
        other => other,
    };
    let sqrt_ata = psd_sqrt(&ata).map_err(reject)?;
    let sqrt_aat = psd_sqrt(&aat).map_err(reject)?;

    let mut u = DMatrix::<f64>::zeros(2 * n, 2 * n);
    u.view_mut((0, 0), (n, n)).copy_from(&sqrt_ata);
    u.view_mut((0, n), (n, n)).copy_from(&a.transpose());
    u.view_mut((n, 0), (n, n)).copy_from(&a);
    u.view_mut((n, n), (n, n)).copy_from(&(-&sqrt_aat));

    let residual = (u.transpose() * &u - DMatrix::<f64>::identity(2 * n, 2 * n))
        .abs()
        .max();
    if residual > UNITARITY_TOL {
        return Err(Error::UnitarityViolation { residual });
    }
    Ok(BlockEncodedStep { dt, a, u })
}

/// Shared post-selected update: applies `A`, renormalizes, reports the
/// success probability `||A psi||^2`.
fn apply_post_selected(a: &DMatrix<f64>, state: &EmulatorState) -> Result<(EmulatorState, f64)> {
    let n = a.nrows();
    if state.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: state.dim() });
    }
    let y = apply_real(a, &state.amplitudes);
    let success = y.norm_squared();
    if success < SUCCESS_CUTOFF {
        return Err(Error::StateAnnihilated { prob: success });
    }
    let norm = success.sqrt();
    let l1_next: f64 = y.iter().map(|z| z.re).sum::<f64>();
    Ok((
        EmulatorState {
            amplitudes: y.map(|z| z / norm),
            cumulative_success: state.cumulative_success * success,
            l1_scale: state.l1_scale * l1_next.abs(),
        },
        success,
    ))
}

/// Applies one post-selected Euler step through a constructed block
/// encoding: `U` on `|0_a> x psi`, ancilla projected onto the `A` branch
/// and flipped back. Returns the updated state and `||A psi||^2`.
pub fn block_euler_step(
    step: &BlockEncodedStep,
    state: &EmulatorState,
) -> Result<(EmulatorState, f64)> {
    apply_post_selected(&step.a, state)
}

fn apply_real(m: &DMatrix<f64>, v: &DVector<Complex<f64>>) -> DVector<Complex<f64>> {
    let re = DVector::from_iterator(v.len(), v.iter().map(|z| z.re));
    let im = DVector::from_iterator(v.len(), v.iter().map(|z| z.im));
    let mre = m * re;
    let mim = m * im;
    DVector::from_iterator(v.len(), mre.iter().zip(mim.iter()).map(|(&a, &b)| Complex::new(a, b)))
}

/// Per-step record of the post-selection bookkeeping.
#[derive(Debug, Clone)]
pub struct StepRecord {
    pub step: usize,
    pub success_prob: f64,
    pub cumulative_success: f64,
    /// L1 norm of the unnormalized probability vector after the step,
    /// relative to the step input.
    pub l1_drift: f64,
}

/// Output of a full block-Euler emulation run.
#[derive(Debug, Clone)]
pub struct SolverRun {
    pub trajectory: Trajectory,
    pub steps: Vec<StepRecord>,
    pub cumulative_success: f64,
    /// Expected number of solver calls `E = (p^-n - 1)/(1 - p)` at the mean
    /// per-step success probability `p`.
    pub expected_calls: f64,
}

/// Expected number of calls of a `p`-probabilistic solver for `n` sequential
/// successes, continuous at `p = 1` where the limit is `n`.
pub fn expected_calls(p: f64, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    if (1.0 - p).abs() < 1e-12 {
        return n as f64;
    }
    (p.powi(-(n as i32)) - 1.0) / (1.0 - p)
}

/// Runs `n_steps` post-selected Euler steps from `p0`.
///
/// Emulates the successful measurement branch only, which applies
/// `A = I + dt R` directly; the unitary completion is never materialised,
/// so this works for generators whose explicit encoding does not exist.
pub fn run_block_euler(
    r: &GeneratorMatrix,
    p0: &ProbVector,
    dt: f64,
    n_steps: usize,
) -> Result<SolverRun> {
    if dt < 0.0 {
        return Err(Error::InvalidParameter(alloc::format!("negative step size {dt}")));
    }
    let n = r.dim();
    let a = DMatrix::<f64>::identity(n, n) + r.to_dense() * dt;
    let mut state = EmulatorState::from_prob(p0);
    let mut trajectory = Trajectory::new("q_block");
    trajectory.push(0.0, p0.clone(), 1.0);
    let mut steps = Vec::with_capacity(n_steps);
    let mut success_sum = 0.0;

    for m in 1..=n_steps {
        let (next, success) = apply_post_selected(&a, &state)?;
        let l1_drift = next.l1_scale / state.l1_scale;
        state = next;
        success_sum += success;
        steps.push(StepRecord {
            step: m,
            success_prob: success,
            cumulative_success: state.cumulative_success,
            l1_drift,
        });
        trajectory.push(m as f64 * dt, state.to_prob(1e-10)?, l1_drift);
    }

    let mean_success = if n_steps == 0 { 1.0 } else { success_sum / n_steps as f64 };
    Ok(SolverRun {
        trajectory,
        steps,
        cumulative_success: state.cumulative_success,
        expected_calls: expected_calls(mean_success, n_steps),
    })
}

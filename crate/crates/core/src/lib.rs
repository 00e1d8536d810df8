//! Master-equation discretization of Fokker-Planck operators and desk-scale
//! emulation of quantum integration strategies for the resulting non-normal
//! linear ODE system.
//!
//! The crate is organized around a pipeline:
//!
//! 1. [`model`] defines drift/diffusion models and samples their
//!    Fokker-Planck coefficients on a [`grid::Grid`].
//! 2. [`generator`] assembles the sparse master-equation generator `R`
//!    (rate scheme or central finite differences, with boundary conditions).
//! 3. [`classical`] provides the reference integrators: dense matrix
//!    exponential, forward Euler, Euler-Maruyama Monte Carlo, and the
//!    analytic 1D steady state.
//! 4. [`block_euler`], [`lcu`] and [`schrod`] emulate the three quantum
//!    solvers (unitary block encoding, linear combination of unitaries,
//!    Schrodingerisation) at the statevector level, tracking post-selection
//!    probabilities.
//! 5. [`observables`] computes means, variances and trace distances.
//!
//! All heavy linear algebra is dense and sized for desk-scale experiments
//! (grid dimensions up to a few thousand).

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod block_euler;
pub mod classical;
pub mod error;
pub mod generator;
pub mod grid;
pub mod lcu;
pub mod linalg;
pub mod model;
pub mod observables;
pub mod prob;
pub mod schrod;

pub use error::{Error, Result};
pub use generator::{BoundaryCondition, GeneratorMatrix, Scheme};
pub use grid::{Axis, Grid};
pub use model::{CoefficientField, DriftDiffusionModel};
pub use prob::ProbVector;

//! Casimir-preserving time integration of stochastic Lie-Poisson systems.
//!
//! The central method is the trapezoidal Munthe-Kaas scheme
//! ([`integrators::tmk_step`]): each step solves a trapezoidal equation for
//! an algebra element `σ` by the chord method and then moves the momentum
//! along its coadjoint orbit, `μₙ₊₁ = exp(± ad*_σ) μₙ`. Casimirs are
//! therefore conserved up to round-off, whatever the step size or noise.
//!
//! ```
//! use coadjoint::models::{build_heavy_top, HeavyTopParams};
//! use coadjoint::integrators::{integrate, StepperConfig};
//! use coadjoint::noise::{generate, TimeGrid};
//!
//! let model = build_heavy_top(&HeavyTopParams::default()).unwrap();
//! let grid = TimeGrid::covering(0.01, 1.0).unwrap();
//! let path = generate(7, model.hamiltonian.drivers(), &grid);
//! let mut traj = integrate(&model.algebra, &model.hamiltonian, &model.initial,
//!                          &grid, &path, &StepperConfig::default()).unwrap();
//! traj.attach_casimirs(&model.casimirs);
//! let drift = coadjoint::diagnostics::drift_series(&traj);
//! assert!(drift.iter().all(|d| d.max() < 1e-12));
//! ```

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod expm;
pub mod hamiltonian;
pub mod integrators;
pub mod lie;
pub mod models;
pub mod noise;
pub mod output;
pub mod selftest;

pub use error::{Error, Result};
pub use lie::{AlgebraVector, Chirality, DualVector, LieAlgebra};

/// `<crate version> (rev <git short hash>)`.
pub fn version_string() -> String {
    format!("{} (rev {})", env!("CARGO_PKG_VERSION"), env!("COADJOINT_GIT_REV"))
}

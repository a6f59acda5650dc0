//! Implicit finite-volume simulation of the Penrose-Fife phase-transition
//! model with homogeneous Neumann boundary conditions, together with a
//! harness that checks its structural properties numerically.
//!
//! Module map:
//!
//! * [`grid`]: cell-centred geometry, [`grid::Field`] and the operator `A ≈ -Δ`.
//! * [`potentials`]: configuration potential `b̂` and the conjugate pair `j, j*`.
//! * [`energy`]: total energy and dissipation bookkeeping.
//! * [`stepper`]: fully implicit Euler + damped Newton for both model variants.
//! * [`analysis`]: resolvent smoothing, logarithmic Poincaré quantities,
//!   Moser exponents, separation bounds and refinement experiments.
//! * [`cli`]: configuration parsing, CSV output and the `pfsim` commands.

pub mod analysis;
pub mod cli;
pub mod energy;
pub mod error;
pub mod grid;
pub mod initial;
pub mod linalg;
pub mod newton;
pub mod potentials;
pub mod stepper;

pub use error::{Error, Result};
pub use grid::{build_grid, DiscreteLaplacian, Field, Grid, GridKind, Lp};
pub use potentials::{PotentialKind, PotentialSpec};
pub use stepper::{ModelConfig, SimState, StepReport, StepperParams, Trajectory, Variant};

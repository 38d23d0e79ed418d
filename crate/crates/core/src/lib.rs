//! Forward uncertainty quantification for variably saturated flow.
//!
//! The crate is organised bottom-up:
//!
//! * [`grid`] – cell-centred grids on the unit square and inter-level interpolation.
//! * [`randfield`] – Matérn Gaussian fields by FFT moving average, Hermite-chaos
//!   transforms to bounded marginals, white-noise upscaling and soil realizations.
//! * [`constitutive`] – van Genuchten–Mualem closures.
//! * [`solver`] – backward Euler + modified Picard outer loop with a cell-centred
//!   multigrid W(2,2) inner solver.
//! * [`uq`] – Monte Carlo, multilevel and parametric-continuation multilevel estimators.
//! * [`bench`] – the infiltration problem and experiment drivers built on top.
//! * [`io`] – CSV field dumps and JSON helpers shared by the command line tool.

pub mod bench;
pub mod constitutive;
pub mod error;
pub mod grid;
pub mod io;
mod par;
pub mod randfield;
pub mod seed;
pub mod solver;
pub mod uq;

pub use error::{Error, Result};
pub use grid::{CellField, CellGrid, GridHierarchy};

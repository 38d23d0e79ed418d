//! Mixed-form Richards solver: backward Euler in time, modified Picard for the
//! nonlinearity and a cell-centred multigrid W(2,2) cycle for each linearized
//! problem.
//!
//! Orientation: `z = 0` is the bottom of the unit square and gravity points
//! towards decreasing `z`, so the Darcy flux is `-K (∇p + e_z)`.

mod multigrid;
mod picard;
mod system;

use serde::{Deserialize, Serialize};

pub use multigrid::{
    coarsen_coefficients, prolong_add, restrict, smooth_gauss_seidel, solve_inner, w_cycle,
    MgHierarchy,
};
pub use picard::{picard_time_step, solve_richards, step_plan, Medium, SolveOutcome, SolveStats, StepStats};
pub use system::{assemble_inner, FivePoint, InnerSystem, StencilLevel};

use crate::error::{Error, Result};

/// Boundary condition on one side of the unit square.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Side {
    /// Prescribed pressure head [m].
    Dirichlet(f64),
    /// Zero total flux.
    NoFlux,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Boundaries {
    pub left: Side,
    pub right: Side,
    pub bottom: Side,
    pub top: Side,
}

impl Boundaries {
    /// Wet bottom (`p = 0.1`), dry top (`p = -0.4`), closed lateral sides.
    pub fn infiltration() -> Self {
        Self {
            left: Side::NoFlux,
            right: Side::NoFlux,
            bottom: Side::Dirichlet(0.1),
            top: Side::Dirichlet(-0.4),
        }
    }
}

/// Boundary data plus the physics switches of the flow equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowProblem {
    pub boundaries: Boundaries,
    pub gravity: bool,
    /// Uniform volumetric source [1/h].
    pub source: f64,
}

impl FlowProblem {
    pub fn infiltration() -> Self {
        Self {
            boundaries: Boundaries::infiltration(),
            gravity: true,
            source: 0.0,
        }
    }
}

/// Tolerances and multigrid shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSettings {
    /// Picard stopping tolerance on `‖δp‖_∞`.
    pub eps_picard: f64,
    /// Multigrid stopping tolerance on `‖L δp - f‖_∞`.
    pub eps_mg: f64,
    pub max_picard: usize,
    pub max_cycles: usize,
    /// Cells per side on the coarsest multigrid level.
    pub coarsest: usize,
    pub pre_sweeps: usize,
    pub post_sweeps: usize,
    pub coarse_sweeps: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            eps_picard: 1e-5,
            eps_mg: 1e-5,
            max_picard: 50,
            max_cycles: 100,
            coarsest: 2,
            pre_sweeps: 2,
            post_sweeps: 2,
            coarse_sweeps: 50,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps_picard > 0.0 && self.eps_mg > 0.0) {
            return Err(Error::Config("solver tolerances must be positive".into()));
        }
        if self.max_picard == 0 || self.max_cycles == 0 {
            return Err(Error::Config("iteration caps must be positive".into()));
        }
        if self.coarsest < 1 {
            return Err(Error::Config("coarsest multigrid level needs at least one cell".into()));
        }
        Ok(())
    }
}

//! Backward Euler time stepping with the modified Picard linearization.

use serde::{Deserialize, Serialize};

use super::multigrid::solve_inner;
use super::system::assemble_inner;
use super::{FlowProblem, SolverSettings};
use crate::constitutive::{VgPoint, VgState};
use crate::error::{Error, Result};
use crate::grid::{CellField, CellGrid};
use crate::randfield::SoilRealization;

/// Per-cell material data in the layout the solver wants.
#[derive(Debug, Clone, PartialEq)]
pub struct Medium {
    grid: CellGrid,
    pub ks: Vec<f64>,
    pub vg: Vec<VgPoint>,
}

impl Medium {
    pub fn from_soil(soil: &SoilRealization) -> Self {
        let grid = soil.grid();
        let vg = (0..grid.len())
            .map(|c| VgPoint {
                alpha: soil.alpha.values()[c],
                n: soil.n.values()[c],
                theta_s: soil.theta_s.values()[c],
                theta_r: soil.theta_r.values()[c],
            })
            .collect();
        Self {
            grid,
            ks: soil.ks.values().to_vec(),
            vg,
        }
    }

    pub fn homogeneous(grid: CellGrid, ks: f64, vg: VgPoint) -> Self {
        Self {
            grid,
            ks: vec![ks; grid.len()],
            vg: vec![vg; grid.len()],
        }
    }

    pub fn grid(&self) -> CellGrid {
        self.grid
    }

    pub fn moisture(&self, p: &[f64]) -> Vec<f64> {
        self.vg.iter().zip(p).map(|(vg, &p)| vg.moisture(p)).collect()
    }

    fn states(&self, p: &[f64], out: &mut Vec<VgState>) {
        out.clear();
        out.extend(self.vg.iter().zip(p).map(|(vg, &p)| vg.eval(p)));
    }
}

/// Diagnostics of one converged time step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    pub picard_iterations: usize,
    pub cycles: usize,
    pub dt: f64,
    /// `Σ (θ^{j+1} - θ^j) h²`.
    pub mass_change: f64,
    /// `Δt ×` boundary inflow evaluated with the last linearization.
    pub boundary_inflow: f64,
}

impl StepStats {
    /// `|ΔM - Δt·Q| / max(|ΔM|, |Δt·Q|)`, or the absolute mismatch when both
    /// sides vanish.
    pub fn mass_balance_error(&self) -> f64 {
        let diff = (self.mass_change - self.boundary_inflow).abs();
        let scale = self.mass_change.abs().max(self.boundary_inflow.abs());
        if scale > 1e-14 {
            diff / scale
        } else {
            diff
        }
    }
}

/// One backward Euler step from `p_old`. `step` only labels errors.
pub fn picard_time_step(
    p_old: &[f64],
    medium: &Medium,
    problem: &FlowProblem,
    dt: f64,
    settings: &SolverSettings,
    step: usize,
) -> Result<(Vec<f64>, StepStats)> {
    let grid = medium.grid();
    let h2 = grid.h() * grid.h();
    let theta_old = medium.moisture(p_old);
    let mut p = p_old.to_vec();
    let mut states = Vec::with_capacity(p.len());
    let mut cycles = 0;
    for k in 1..=settings.max_picard {
        medium.states(&p, &mut states);
        let system = assemble_inner(grid, &p, &states, &medium.ks, &theta_old, dt, problem)?;
        let (delta, c) = solve_inner(&system, settings)?;
        cycles += c;
        let mut norm = 0.0f64;
        for (pv, dv) in p.iter_mut().zip(&delta) {
            *pv += dv;
            norm = norm.max(dv.abs());
        }
        if !norm.is_finite() {
            break;
        }
        if norm < settings.eps_picard {
            let theta_new = medium.moisture(&p);
            let mass_change = theta_new
                .iter()
                .zip(&theta_old)
                .map(|(a, b)| (a - b) * h2)
                .sum();
            // Boundary fluxes of the final iterate with the last conductivities.
            let inflow = boundary_inflow_with(&system, &p, problem, grid);
            return Ok((
                p,
                StepStats {
                    picard_iterations: k,
                    cycles,
                    dt,
                    mass_change,
                    boundary_inflow: dt * inflow,
                },
            ));
        }
    }
    Err(Error::NonlinearFailure {
        step,
        iterations: settings.max_picard,
    })
}

/// Boundary inflow of `p` through the boundary face coefficients of `system`.
fn boundary_inflow_with(
    system: &super::system::InnerSystem,
    p: &[f64],
    problem: &FlowProblem,
    grid: CellGrid,
) -> f64 {
    use super::Side;
    let m = grid.m();
    let h = grid.h();
    let lvl = &system.level;
    let b = &problem.boundaries;
    let g = if problem.gravity { 1.0 } else { 0.0 };
    let face = |side: Side, k: f64, pc: f64, outward: f64| match side {
        Side::Dirichlet(v) => k * (2.0 * (v - pc) / h + g * outward) * h,
        Side::NoFlux => 0.0,
    };
    let mut q = 0.0;
    for j in 0..m {
        q += face(b.left, lvl.kx[j * (m + 1)], p[j * m], 0.0);
        q += face(b.right, lvl.kx[j * (m + 1) + m], p[j * m + m - 1], 0.0);
    }
    for i in 0..m {
        q += face(b.bottom, lvl.kz[i], p[i], -1.0);
        q += face(b.top, lvl.kz[m * m + i], p[(m - 1) * m + i], 1.0);
    }
    q
}

/// Accumulated cost and health of one full solve.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SolveStats {
    pub steps: usize,
    /// W-cycles over all steps and Picard iterations.
    pub total_cycles: usize,
    pub picard_iterations: Vec<usize>,
    pub mass_errors: Vec<f64>,
    pub failed: bool,
    pub failure_step: Option<usize>,
    pub failure: Option<String>,
}

impl SolveStats {
    pub fn total_picard(&self) -> usize {
        self.picard_iterations.iter().sum()
    }

    pub fn max_mass_error(&self) -> f64 {
        self.mass_errors.iter().fold(0.0, |a: f64, &b| a.max(b))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    /// Pressure at the final time, or at the last completed step on failure.
    pub pressure: CellField,
    pub time: f64,
    pub stats: SolveStats,
    pub steps: Vec<StepStats>,
}

/// Number of uniform steps and their length: `J = ceil(T/Δt)` steps of `T/J`,
/// so every grid ends exactly at `T` with a step no longer than requested.
pub fn step_plan(dt: f64, t_final: f64) -> (usize, f64) {
    let steps = (t_final / dt - 1e-9).ceil().max(1.0) as usize;
    (steps, t_final / steps as f64)
}

/// March from `p0` to `t_final` with the steps of [`step_plan`].
///
/// Nonlinear failures and inner divergence end the march and are reported in
/// the returned stats rather than as errors.
pub fn solve_richards(
    p0: &CellField,
    medium: &Medium,
    problem: &FlowProblem,
    dt: f64,
    t_final: f64,
    settings: &SolverSettings,
) -> Result<SolveOutcome> {
    settings.validate()?;
    if p0.grid() != medium.grid() {
        return Err(Error::Dimension {
            expected: medium.grid().m(),
            found: p0.grid().m(),
        });
    }
    if !(dt > 0.0 && t_final > 0.0 && dt.is_finite() && t_final.is_finite()) {
        return Err(Error::Config("time step and final time must be positive".into()));
    }
    let (steps, step_dt) = step_plan(dt, t_final);
    let mut p = p0.values().to_vec();
    let mut stats = SolveStats::default();
    let mut step_stats = Vec::with_capacity(steps);
    let mut time = 0.0;
    for j in 0..steps {
        match picard_time_step(&p, medium, problem, step_dt, settings, j) {
            Ok((next, st)) => {
                p = next;
                time = if j + 1 == steps { t_final } else { (j + 1) as f64 * step_dt };
                stats.steps += 1;
                stats.total_cycles += st.cycles;
                stats.picard_iterations.push(st.picard_iterations);
                stats.mass_errors.push(st.mass_balance_error());
                step_stats.push(st);
            }
            Err(e @ (Error::NonlinearFailure { .. } | Error::InnerDivergence { .. })) => {
                stats.failed = true;
                stats.failure_step = Some(j);
                stats.failure = Some(e.to_string());
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(SolveOutcome {
        pressure: CellField::from_vec(medium.grid(), p)?,
        time,
        stats,
        steps: step_stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{Boundaries, Side};

    fn vg() -> VgPoint {
        VgPoint::new(1.0, 2.0, 0.5, 0.05).unwrap()
    }

    fn initial(grid: CellGrid) -> CellField {
        CellField::from_fn(grid, |_, z| -0.4 * (1.0 - (-80.0 * z).exp()))
    }

    #[test]
    fn step_plan_lands_on_final_time() {
        assert_eq!(step_plan(0.1, 0.1), (1, 0.1));
        let (n, dt) = step_plan(1.0 / 64.0, 0.1);
        assert_eq!(n, 7);
        assert!(dt <= 1.0 / 64.0 && (7.0 * dt - 0.1).abs() < 1e-15);
        let (n, dt) = step_plan(0.05, 0.2);
        assert_eq!(n, 4);
        assert!((dt - 0.05).abs() < 1e-15);
    }

    #[test]
    fn saturated_steady_state_is_fixed_point() {
        let grid = CellGrid::new(8).unwrap();
        let problem = FlowProblem {
            boundaries: Boundaries {
                left: Side::NoFlux,
                right: Side::NoFlux,
                bottom: Side::Dirichlet(0.1),
                top: Side::Dirichlet(0.1),
            },
            gravity: false,
            source: 0.0,
        };
        let medium = Medium::homogeneous(grid, 0.2, vg());
        let p0 = vec![0.1; 64];
        let (p, st) =
            picard_time_step(&p0, &medium, &problem, 0.01, &SolverSettings::default(), 0).unwrap();
        assert_eq!(st.picard_iterations, 1);
        assert_eq!(st.cycles, 0);
        assert!(p.iter().all(|v| (v - 0.1).abs() < 1e-12));
    }

    #[test]
    fn single_step_when_final_time_equals_dt() {
        let grid = CellGrid::new(8).unwrap();
        let medium = Medium::homogeneous(grid, 0.2, vg());
        let out = solve_richards(
            &initial(grid),
            &medium,
            &FlowProblem::infiltration(),
            0.05,
            0.05,
            &SolverSettings::default(),
        )
        .unwrap();
        assert_eq!(out.stats.steps, 1, "{:?}", out.stats.failure);
        assert_eq!(out.time, 0.05);
        assert_eq!(out.stats.total_cycles, out.steps[0].cycles);
    }

    #[test]
    fn infiltration_stays_within_boundary_values_and_balances_mass() {
        let grid = CellGrid::new(32).unwrap();
        let medium = Medium::homogeneous(grid, 0.2, vg());
        let out = solve_richards(
            &initial(grid),
            &medium,
            &FlowProblem::infiltration(),
            1.0 / 64.0,
            0.1,
            &SolverSettings::default(),
        )
        .unwrap();
        assert!(!out.stats.failed, "{:?}", out.stats.failure);
        let p = &out.pressure;
        assert!(p.min() >= -0.4 - 1e-8 && p.max() <= 0.1 + 1e-8, "{} {}", p.min(), p.max());
        for e in &out.stats.mass_errors {
            assert!(*e <= 1e-4, "mass error {e}");
        }
        let cycles: usize = out.steps.iter().map(|s| s.cycles).sum();
        assert_eq!(cycles, out.stats.total_cycles);
    }

    #[test]
    fn easy_parameters_converge_quickly() {
        let grid = CellGrid::new(32).unwrap();
        let medium = Medium::homogeneous(grid, 0.2, VgPoint::new(0.2, 4.0, 0.5, 0.05).unwrap());
        let out = solve_richards(
            &initial(grid),
            &medium,
            &FlowProblem::infiltration(),
            1.0 / 64.0,
            0.1,
            &SolverSettings::default(),
        )
        .unwrap();
        assert!(out.stats.picard_iterations.iter().all(|&k| k <= 10));
    }

    #[test]
    fn picard_cap_reports_failure() {
        let grid = CellGrid::new(16).unwrap();
        let medium = Medium::homogeneous(grid, 0.2, VgPoint::new(4.0, 1.1, 0.5, 0.05).unwrap());
        let settings = SolverSettings {
            max_picard: 2,
            ..SolverSettings::default()
        };
        let out = solve_richards(
            &initial(grid),
            &medium,
            &FlowProblem::infiltration(),
            1.0 / 16.0,
            0.1,
            &settings,
        )
        .unwrap();
        assert!(out.stats.failed);
        assert_eq!(out.stats.failure_step, Some(0));
    }
}

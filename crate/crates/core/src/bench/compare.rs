use serde::{Deserialize, Serialize};

use super::problem::Scenario;
use crate::error::Result;
use crate::grid::interpolate_bilinear;
use crate::randfield::SoilModel;
use crate::solver::SolverSettings;
use crate::uq::{build_levels, pc_mlmc, CoupledSampler, HierarchySpec, MlmcConfig, MlmcResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonConfig {
    /// Continuation hierarchy.
    pub pc: HierarchySpec,
    /// Standard hierarchy; its `(α, n)` should be constant.
    pub std: HierarchySpec,
    pub mlmc: MlmcConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonResult {
    pub pc: MlmcResult,
    pub std: MlmcResult,
    /// `‖E_pc - E_std‖` on the finer of the two finest grids.
    pub mean_discrepancy: f64,
    /// Std wall time over PC wall time.
    pub speedup_wall: f64,
    /// Same ratio in deterministic work units.
    pub speedup_work: f64,
}

/// Runs both estimators on the same campaign seed.
pub fn estimator_comparison(
    config: &ComparisonConfig,
    model: &SoilModel,
    scenario: &Scenario,
    settings: &SolverSettings,
    campaign: u64,
) -> Result<ComparisonResult> {
    let run = |spec: &HierarchySpec| -> Result<MlmcResult> {
        let sampler = CoupledSampler::new(
            build_levels(spec)?,
            *model,
            *scenario,
            *settings,
            campaign,
            "mlmc",
        )?;
        pc_mlmc(&sampler, &config.mlmc)
    };
    let std = run(&config.std)?;
    let pc = run(&config.pc)?;
    let (a, b) = (&pc.mean, &std.mean);
    let discrepancy = if a.grid().m() >= b.grid().m() {
        a.sub(&interpolate_bilinear(b, a.grid())?)?.l2_norm()
    } else {
        b.sub(&interpolate_bilinear(a, b.grid())?)?.l2_norm()
    };
    Ok(ComparisonResult {
        speedup_wall: std.total_wall() / pc.total_wall(),
        speedup_work: std.telemetry.total_work / pc.telemetry.total_work,
        mean_discrepancy: discrepancy,
        pc,
        std,
    })
}

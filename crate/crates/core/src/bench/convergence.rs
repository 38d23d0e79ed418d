use serde::{Deserialize, Serialize};

use super::problem::Scenario;
use crate::error::{Error, Result};
use crate::randfield::{Nonlinearity, SoilModel};
use crate::solver::SolverSettings;
use crate::uq::{build_levels, fit_rate, CoupledSampler, HierarchySpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergenceConfig {
    pub coarsest: usize,
    /// Number of grids, so `levels - 1` differences.
    pub levels: usize,
    pub samples: usize,
    pub dt_ratio: f64,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self {
            coarsest: 8,
            levels: 4,
            samples: 32,
            dt_ratio: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub level: usize,
    pub h: f64,
    /// `sqrt(E ‖p_h - I p_{2h}‖²)` estimated over the coupled samples.
    pub diff_norm: f64,
    /// `log2` of the ratio to the previous row; NaN on the first row.
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope over all rows.
    pub fitted_rate: f64,
    pub fitted: bool,
}

/// Refinement study at fixed `(α, n)`, with `model` supplying the noise.
pub fn convergence_study(
    config: &ConvergenceConfig,
    model: &SoilModel,
    scenario: &Scenario,
    settings: &SolverSettings,
    campaign: u64,
) -> Result<ConvergenceStudy> {
    if config.levels < 2 {
        return Err(Error::Config("convergence study needs at least 2 levels".into()));
    }
    if config.samples == 0 {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let theta: Nonlinearity = model.baseline.nonlinearity();
    let spec = HierarchySpec {
        dt_ratio: config.dt_ratio,
        ..HierarchySpec::standard(config.coarsest, config.levels, theta)
    };
    let sampler = CoupledSampler::new(
        build_levels(&spec)?,
        *model,
        *scenario,
        *settings,
        campaign,
        "converge",
    )?;
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for l in 1..config.levels {
        let xs = sampler.samples(l, 0..config.samples)?;
        let mut sq = 0.0;
        for x in &xs {
            sq += x.difference()?.l2_norm().powi(2);
        }
        let diff_norm = (sq / xs.len() as f64).sqrt();
        let rate = rows
            .last()
            .map(|r| (r.diff_norm / diff_norm).log2())
            .unwrap_or(f64::NAN);
        rows.push(ConvergenceRow {
            level: l,
            h: sampler.levels()[l].grid.h(),
            diff_norm,
            rate,
        });
    }
    let h: Vec<f64> = rows.iter().map(|r| r.h).collect();
    let d: Vec<f64> = rows.iter().map(|r| r.diff_norm).collect();
    let fit = fit_rate(&h, &d);
    Ok(ConvergenceStudy {
        rows,
        fitted_rate: fit.rate,
        fitted: fit.fitted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::infiltration_problem;
    use crate::randfield::Randomize;

    #[test]
    fn deterministic_study_has_positive_decreasing_differences() {
        let model = SoilModel {
            randomize: Randomize::None,
            ..SoilModel::default()
        };
        let cfg = ConvergenceConfig {
            coarsest: 4,
            levels: 3,
            samples: 2,
            dt_ratio: 1.0,
        };
        let s = convergence_study(&cfg, &model, &infiltration_problem(0.2), &SolverSettings::default(), 1)
            .unwrap();
        assert_eq!(s.rows.len(), 2);
        assert!(s.rows[0].rate.is_nan());
        assert!(s.rows[1].diff_norm < s.rows[0].diff_norm);
        // Two points are not enough for a fit.
        assert!(!s.fitted);
        assert_eq!(s.fitted_rate, 1.0);
    }
}

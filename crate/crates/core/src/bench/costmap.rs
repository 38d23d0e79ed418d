use serde::{Deserialize, Serialize};

use super::problem::{infiltration_problem, Scenario};
use crate::error::Result;
use crate::grid::CellGrid;
use crate::randfield::{Nonlinearity, Randomize, SoilGenerator, SoilModel};
use crate::seed::SampleKey;
use crate::solver::{solve_richards, Medium, SolverSettings};

/// `α = 0.2, 0.4, …, 4.0`.
pub fn table_alphas() -> Vec<f64> {
    (1..=20).map(|k| k as f64 * 0.2).collect()
}

/// `n = 1.1 … 2.0` in steps of 0.1, then `2.2 … 4.0` in steps of 0.2.
pub fn table_ns() -> Vec<f64> {
    let mut v: Vec<f64> = (11..=20).map(|k| k as f64 / 10.0).collect();
    v.extend((11..=20).map(|k| k as f64 / 5.0));
    v
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CostMapConfig {
    pub alphas: Vec<f64>,
    pub ns: Vec<f64>,
    pub reps: usize,
    /// Cells per side.
    pub m: usize,
    pub dt: f64,
    pub t_final: f64,
}

impl Default for CostMapConfig {
    fn default() -> Self {
        Self {
            alphas: table_alphas(),
            ns: table_ns(),
            reps: 64,
            m: 32,
            dt: 1.0 / 64.0,
            t_final: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostMapCell {
    pub alpha: f64,
    pub n: f64,
    /// Mean W-cycles over the successful runs; NaN if every run failed.
    pub mean_cycles: f64,
    pub std_cycles: f64,
    pub failures: usize,
    pub reps: usize,
}

/// Average solver cost over `reps` conductivity realizations for every
/// `(α, n)` pair, row-major in `alphas`.
///
/// Only `K_s` is random here, whatever `model.randomize` says. Repetition `r`
/// uses the same conductivity field in every cell, so differences between
/// cells reflect `(α, n)` and not the draw.
pub fn cost_map(
    config: &CostMapConfig,
    model: &SoilModel,
    settings: &SolverSettings,
    campaign: u64,
) -> Result<Vec<CostMapCell>> {
    let grid = CellGrid::new(config.m)?;
    let model = SoilModel {
        randomize: Randomize::Conductivity,
        ..*model
    };
    model.validate()?;
    settings.validate()?;
    let generator = SoilGenerator::new(grid, model)?;
    let scenario = Scenario {
        t_final: config.t_final,
        ..infiltration_problem(config.t_final)
    };
    let pairs: Vec<(f64, f64)> = config
        .alphas
        .iter()
        .flat_map(|&a| config.ns.iter().map(move |&n| (a, n)))
        .collect();
    let reps = config.reps;
    let p0 = scenario.initial.field(grid);

    let runs = crate::par::map_indices(0..pairs.len() * reps, |k| {
        let (alpha, n) = pairs[k / reps];
        let theta = Nonlinearity { alpha, n };
        theta.validate()?;
        let key = SampleKey::new("costmap", 0, k % reps);
        let noise = generator.draw_noise(&key, campaign);
        let soil = generator.realize(&noise, theta)?;
        let out = solve_richards(
            &p0,
            &Medium::from_soil(&soil),
            &scenario.flow,
            config.dt,
            scenario.t_final,
            settings,
        )?;
        Ok((out.stats.total_cycles, out.stats.failed))
    })?;

    Ok(pairs
        .iter()
        .enumerate()
        .map(|(c, &(alpha, n))| {
            let cell = &runs[c * reps..(c + 1) * reps];
            let ok: Vec<f64> = cell.iter().filter(|r| !r.1).map(|r| r.0 as f64).collect();
            let failures = reps - ok.len();
            let (mean, std) = match ok.len() {
                0 => (f64::NAN, f64::NAN),
                1 => (ok[0], 0.0),
                k => {
                    let m = ok.iter().sum::<f64>() / k as f64;
                    let v = ok.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (k - 1) as f64;
                    (m, v.sqrt())
                }
            };
            CostMapCell {
                alpha,
                n,
                mean_cycles: mean,
                std_cycles: std,
                failures,
                reps,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_lists() {
        let a = table_alphas();
        assert_eq!(a.len(), 20);
        assert!((a[0] - 0.2).abs() < 1e-12 && (a[19] - 4.0).abs() < 1e-12);
        let n = table_ns();
        assert_eq!(n.len(), 20);
        assert!((n[0] - 1.1).abs() < 1e-12);
        assert!((n[9] - 2.0).abs() < 1e-12);
        assert!((n[10] - 2.2).abs() < 1e-12);
        assert!((n[19] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn small_map_accounting_and_reproducibility() {
        let cfg = CostMapConfig {
            alphas: vec![1.0],
            ns: vec![2.0, 3.0],
            reps: 2,
            m: 8,
            dt: 1.0 / 16.0,
            t_final: 0.1,
        };
        let a = cost_map(&cfg, &SoilModel::default(), &SolverSettings::default(), 5).unwrap();
        assert_eq!(a.len(), 2);
        assert!(a.iter().all(|c| c.failures == 0 && c.reps == 2 && c.mean_cycles > 0.0));
        let b = cost_map(&cfg, &SoilModel::default(), &SolverSettings::default(), 5).unwrap();
        assert_eq!(a, b);
    }
}

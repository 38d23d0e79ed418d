use serde::{Deserialize, Serialize};

use super::sampling::{CoupledSample, CoupledSampler};
use super::stats::{level_variance, mean_field, optimal_samples, variance_field};
use crate::error::{Error, Result};
use crate::grid::{interpolate_bilinear, CellField};

/// What the allocation formula treats as the cost of one sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CostModel {
    /// W-cycles times cells, summed over both members. Machine independent,
    /// so the allocation is reproducible.
    #[default]
    Work,
    /// Raw W-cycle count.
    Cycles,
    /// Measured wall time. Allocation then depends on the machine and load.
    WallTime,
}

impl CostModel {
    fn of(&self, s: &CoupledSample) -> f64 {
        match self {
            CostModel::Work => s.cost.work,
            CostModel::Cycles => s.cost.cycles as f64,
            CostModel::WallTime => s.cost.wall,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MlmcConfig {
    /// Target root sampling error `ε`.
    pub eps: f64,
    pub cost_model: CostModel,
    /// Upper bound on allocation rounds.
    pub max_rounds: usize,
}

impl Default for MlmcConfig {
    fn default() -> Self {
        Self {
            eps: 0.02,
            cost_model: CostModel::Work,
            max_rounds: 20,
        }
    }
}

/// Per-level bookkeeping. Everything here is reproducible from the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelTelemetry {
    pub level: usize,
    pub m: usize,
    pub h: f64,
    pub dt: f64,
    pub alpha: f64,
    pub n: f64,
    pub warmup: usize,
    pub samples: usize,
    pub failures: usize,
    pub clamped: usize,
    /// `‖𝒱_ℓ‖`.
    pub level_variance: f64,
    /// Mean cost per sample in the configured model.
    pub mean_cost: f64,
    pub total_cycles: usize,
    pub total_work: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlmcTelemetry {
    pub eps: f64,
    pub cost_model: CostModel,
    pub rounds: usize,
    /// `false` if `max_rounds` ran out before the allocation settled.
    pub converged: bool,
    pub levels: Vec<LevelTelemetry>,
    /// `Σ_ℓ N_ℓ 𝒲_ℓ` in the configured model.
    pub total_cost: f64,
    pub total_cycles: usize,
    pub total_work: f64,
    /// `Σ_ℓ ‖𝒱_ℓ‖ / N_ℓ`.
    pub sampling_variance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlmcResult {
    pub mean: CellField,
    pub variance: CellField,
    pub telemetry: MlmcTelemetry,
    /// Wall-clock seconds per level; kept out of the telemetry.
    pub wall_seconds: Vec<f64>,
    pub samples: Vec<Vec<CoupledSample>>,
}

impl MlmcResult {
    pub fn sample_counts(&self) -> Vec<usize> {
        self.telemetry.levels.iter().map(|l| l.samples).collect()
    }

    pub fn total_wall(&self) -> f64 {
        self.wall_seconds.iter().sum()
    }
}

/// Telescoped mean: the coarsest mean interpolated up the chain with the
/// per-level corrections added on each grid.
fn telescoped_mean(samples: &[Vec<CoupledSample>]) -> Result<CellField> {
    let mut acc: Option<CellField> = None;
    for level in samples {
        let grid = level[0].fine.grid();
        let diffs = level
            .iter()
            .map(|s| s.difference())
            .collect::<Result<Vec<_>>>()?;
        let refs: Vec<&CellField> = diffs.iter().collect();
        let correction = mean_field(grid, &refs)?;
        acc = Some(match acc {
            None => correction,
            Some(prev) => {
                let mut up = interpolate_bilinear(&prev, grid)?;
                up.add_assign(&correction)?;
                up
            }
        });
    }
    acc.ok_or(Error::InsufficientData { needed: 1, got: 0 })
}

/// Multilevel variance `Σ_ℓ (Var[p_ℓ] - I Var[p_{ℓ-1}])`, both terms per level
/// from the same sample set, interpolated up the chain like the mean.
pub fn mlmc_variance_field(samples: &[Vec<CoupledSample>]) -> Result<CellField> {
    let mut acc: Option<CellField> = None;
    for level in samples {
        let grid = level[0].fine.grid();
        let fine: Vec<&CellField> = level.iter().map(|s| &s.fine).collect();
        let mut term = variance_field(grid, &fine)?;
        let coarse: Vec<&CellField> = level.iter().filter_map(|s| s.coarse.as_ref()).collect();
        if !coarse.is_empty() {
            let cgrid = coarse[0].grid();
            let cvar = variance_field(cgrid, &coarse)?;
            let up = interpolate_bilinear(&cvar, grid)?;
            term = term.sub(&up)?;
        }
        acc = Some(match acc {
            None => term,
            Some(prev) => {
                let mut up = interpolate_bilinear(&prev, grid)?;
                up.add_assign(&term)?;
                up
            }
        });
    }
    acc.ok_or(Error::InsufficientData { needed: 1, got: 0 })
}

fn level_stats(level: &[CoupledSample], model: CostModel) -> Result<(f64, f64)> {
    let diffs = level
        .iter()
        .map(|s| s.difference())
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&CellField> = diffs.iter().collect();
    let v = level_variance(&refs)?;
    let w = level.iter().map(|s| model.of(s)).sum::<f64>() / level.len() as f64;
    Ok((v, w))
}

/// Adaptive multilevel estimator: warm-up, estimate `‖𝒱_ℓ‖` and `𝒲_ℓ`,
/// allocate, top up, repeat until no level needs more samples.
///
/// With all levels sharing `(α, n)` this is standard MLMC; with a single level
/// it is plain Monte Carlo with `N = max(N*, ceil(ε⁻² ‖𝒱_0‖))`.
pub fn pc_mlmc(sampler: &CoupledSampler, config: &MlmcConfig) -> Result<MlmcResult> {
    if !(config.eps > 0.0) {
        return Err(Error::Config("eps must be positive".into()));
    }
    let specs = sampler.levels();
    let nl = specs.len();
    let mut samples: Vec<Vec<CoupledSample>> = vec![Vec::new(); nl];
    let mut wall = vec![0.0; nl];
    let mut target: Vec<usize> = specs.iter().map(|s| s.warmup.max(2)).collect();
    let mut rounds = 0;
    let mut converged = false;
    let mut stats = vec![(0.0, 0.0); nl];
    while rounds < config.max_rounds {
        rounds += 1;
        for l in 0..nl {
            let have = samples[l].len();
            if target[l] > have {
                let start = std::time::Instant::now();
                let new = sampler.samples(l, have..target[l])?;
                wall[l] += start.elapsed().as_secs_f64();
                samples[l].extend(new);
            }
        }
        for l in 0..nl {
            stats[l] = level_stats(&samples[l], config.cost_model)?;
        }
        let v: Vec<f64> = stats.iter().map(|s| s.0).collect();
        // Guard against a zero measured cost (e.g. converged on entry).
        let w: Vec<f64> = stats.iter().map(|s| s.1.max(f64::MIN_POSITIVE)).collect();
        let n = optimal_samples(&v, &w, config.eps)?;
        let mut more = false;
        for l in 0..nl {
            if n[l] > samples[l].len() {
                target[l] = n[l];
                more = true;
            }
        }
        if !more {
            converged = true;
            break;
        }
    }

    let mean = telescoped_mean(&samples)?;
    let variance = mlmc_variance_field(&samples)?;
    let mut levels = Vec::with_capacity(nl);
    let mut total_cost = 0.0;
    let mut sampling_variance = 0.0;
    for l in 0..nl {
        let s = &specs[l];
        let lv = &samples[l];
        let (v, w) = stats[l];
        total_cost += w * lv.len() as f64;
        sampling_variance += v / lv.len() as f64;
        levels.push(LevelTelemetry {
            level: l,
            m: s.grid.m(),
            h: s.grid.h(),
            dt: s.dt,
            alpha: s.theta.alpha,
            n: s.theta.n,
            warmup: s.warmup,
            samples: lv.len(),
            failures: lv.iter().map(|x| x.failures).sum(),
            clamped: lv.iter().map(|x| x.clamped).sum(),
            level_variance: v,
            mean_cost: w,
            total_cycles: lv.iter().map(|x| x.cost.cycles).sum(),
            total_work: lv.iter().map(|x| x.cost.work).sum(),
        });
    }
    let telemetry = MlmcTelemetry {
        eps: config.eps,
        cost_model: config.cost_model,
        rounds,
        converged,
        total_cost,
        total_cycles: levels.iter().map(|l| l.total_cycles).sum(),
        total_work: levels.iter().map(|l| l.total_work).sum(),
        sampling_variance,
        levels,
    };
    Ok(MlmcResult {
        mean,
        variance,
        telemetry,
        wall_seconds: wall,
        samples,
    })
}

/// Plain Monte Carlo with a fixed sample count on one level of `sampler`,
/// using only the fine members.
pub fn monte_carlo(sampler: &CoupledSampler, level: usize, n: usize) -> Result<(CellField, CellField, Vec<CoupledSample>)> {
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let xs = sampler.samples(level, 0..n)?;
    let grid = xs[0].fine.grid();
    let refs: Vec<&CellField> = xs.iter().map(|s| &s.fine).collect();
    let mean = mean_field(grid, &refs)?;
    let var = variance_field(grid, &refs)?;
    Ok((mean, var, xs))
}

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::levels::LevelSpec;
use crate::bench::Scenario;
use crate::error::{Error, Result};
use crate::grid::{interpolate_bilinear, CellField};
use crate::randfield::{Nonlinearity, SoilGenerator, SoilModel, SoilNoise};
use crate::seed::SampleKey;
use crate::solver::{solve_richards, Medium, SolveOutcome, SolverSettings};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SampleCost {
    /// W-cycles over both solves.
    pub cycles: usize,
    /// W-cycles weighted by the cell count of the grid they ran on.
    pub work: f64,
    /// Wall-clock seconds over both solves, including field generation.
    pub wall: f64,
}

/// Fine and coarse solutions driven by the same event `ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledSample {
    pub level: usize,
    pub index: usize,
    pub fine: CellField,
    /// `None` on level 0, where the coarse member is zero.
    pub coarse: Option<CellField>,
    pub cost: SampleCost,
    /// Discarded attempts before this one succeeded.
    pub failures: usize,
    /// Cells clamped back into range when building the soil fields.
    pub clamped: usize,
}

impl CoupledSample {
    /// `p_fine - I p_coarse` on the fine grid.
    pub fn difference(&self) -> Result<CellField> {
        match &self.coarse {
            None => Ok(self.fine.clone()),
            Some(c) => self.fine.sub(&interpolate_bilinear(c, self.fine.grid())?),
        }
    }
}

/// Draws coupled samples on a fixed level hierarchy.
#[derive(Debug)]
pub struct CoupledSampler {
    levels: Vec<LevelSpec>,
    generators: Vec<SoilGenerator>,
    scenario: Scenario,
    settings: SolverSettings,
    campaign: u64,
    stream: String,
    max_attempts: usize,
}

impl CoupledSampler {
    pub fn new(
        levels: Vec<LevelSpec>,
        model: SoilModel,
        scenario: Scenario,
        settings: SolverSettings,
        campaign: u64,
        stream: &str,
    ) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Config("no levels".into()));
        }
        for w in levels.windows(2) {
            if w[1].grid.m() != 2 * w[0].grid.m() {
                return Err(Error::Config(
                    "consecutive levels must differ by a refinement factor of 2".into(),
                ));
            }
        }
        settings.validate()?;
        let generators = levels
            .iter()
            .map(|l| SoilGenerator::new(l.grid, model))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            levels,
            generators,
            scenario,
            settings,
            campaign,
            stream: stream.to_string(),
            max_attempts: 25,
        })
    }

    pub fn with_max_attempts(mut self, attempts: usize) -> Self {
        self.max_attempts = attempts.max(1);
        self
    }

    pub fn levels(&self) -> &[LevelSpec] {
        &self.levels
    }

    pub fn campaign(&self) -> u64 {
        self.campaign
    }

    fn solve(&self, level: usize, noise: &SoilNoise, theta: Nonlinearity) -> Result<(SolveOutcome, usize)> {
        let spec = &self.levels[level];
        let soil = self.generators[level].realize(noise, theta)?;
        let medium = Medium::from_soil(&soil);
        let p0 = self.scenario.initial.field(spec.grid);
        let out = solve_richards(
            &p0,
            &medium,
            &self.scenario.flow,
            spec.dt,
            self.scenario.t_final,
            &self.settings,
        )?;
        Ok((out, soil.clamped))
    }

    /// Sample `index` on `level`. A failed solve (either member) is discarded
    /// and redrawn with the next attempt number; running out of attempts aborts.
    pub fn sample(&self, level: usize, index: usize) -> Result<CoupledSample> {
        let mut failures = 0;
        // Discarded attempts still count towards the cost.
        let start = Instant::now();
        let mut cycles = 0;
        let mut work = 0.0;
        for attempt in 0..self.max_attempts {
            let key = SampleKey::new(&self.stream, level, index).with_attempt(attempt);
            let noise = self.generators[level].draw_noise(&key, self.campaign);
            let spec = &self.levels[level];
            let (fine, mut clamped) = self.solve(level, &noise, spec.theta)?;
            cycles += fine.stats.total_cycles;
            work += (fine.stats.total_cycles * spec.grid.len()) as f64;
            if fine.stats.failed {
                failures += 1;
                continue;
            }
            let coarse = if level > 0 {
                let cspec = &self.levels[level - 1];
                let (c, cl) = self.solve(level - 1, &noise.upscale()?, cspec.theta)?;
                cycles += c.stats.total_cycles;
                work += (c.stats.total_cycles * cspec.grid.len()) as f64;
                if c.stats.failed {
                    failures += 1;
                    continue;
                }
                clamped += cl;
                Some(c.pressure)
            } else {
                None
            };
            return Ok(CoupledSample {
                level,
                index,
                fine: fine.pressure,
                coarse,
                cost: SampleCost {
                    cycles,
                    work,
                    wall: start.elapsed().as_secs_f64(),
                },
                failures,
                clamped,
            });
        }
        Err(Error::CampaignAbort(format!(
            "sample {index} on level {level} failed {} consecutive attempts",
            self.max_attempts
        )))
    }

    /// Samples `range` on `level`, in index order.
    pub fn samples(&self, level: usize, range: std::ops::Range<usize>) -> Result<Vec<CoupledSample>> {
        crate::par::map_indices(range, |i| self.sample(level, i))
    }
}

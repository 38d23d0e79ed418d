//! Soil realizations: lognormal saturated conductivity plus bounded additive
//! perturbations of the van Genuchten parameters, all driven by white noise on
//! the padded sampling grid so coarse levels can reuse upscaled noise.

use serde::{Deserialize, Serialize};

use super::chaos::{Marginal, MarginalSpec};
use super::matern::MaternSpec;
use super::sampler::{FieldSampler, WhiteNoise};
use crate::error::{Error, Result};
use crate::grid::{CellField, CellGrid};
use crate::seed::{rng_from, SampleKey};

/// Order of the five fields inside [`SoilNoise`].
pub const FIELD_NAMES: [&str; 5] = ["ks", "alpha", "n", "theta_s", "theta_r"];

const MIN_ALPHA: f64 = 1e-6;
const MIN_N_EXCESS: f64 = 1e-6;
const MIN_THETA_GAP: f64 = 1e-6;

/// Deterministic baseline soil parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SoilBaseline {
    /// Saturated conductivity baseline [m/h].
    pub ks: f64,
    /// [1/m]
    pub alpha: f64,
    pub n: f64,
    pub theta_s: f64,
    pub theta_r: f64,
}

impl Default for SoilBaseline {
    fn default() -> Self {
        Self {
            ks: 0.2,
            alpha: 1.0,
            n: 2.0,
            theta_s: 0.5,
            theta_r: 0.05,
        }
    }
}

impl SoilBaseline {
    pub fn validate(&self) -> Result<()> {
        if !(self.ks.is_finite() && self.ks > 0.0) {
            return Err(Error::InvalidParameter("ks must be positive".into()));
        }
        Nonlinearity {
            alpha: self.alpha,
            n: self.n,
        }
        .validate()?;
        if !(self.theta_r >= 0.0 && self.theta_r < self.theta_s && self.theta_s <= 1.0) {
            return Err(Error::InvalidParameter(
                "moisture contents must satisfy 0 <= theta_r < theta_s <= 1".into(),
            ));
        }
        Ok(())
    }

    pub fn nonlinearity(&self) -> Nonlinearity {
        Nonlinearity {
            alpha: self.alpha,
            n: self.n,
        }
    }

    pub fn with_nonlinearity(self, theta: Nonlinearity) -> Self {
        Self {
            alpha: theta.alpha,
            n: theta.n,
            ..self
        }
    }
}

/// The parameter pair `(α, n)` steering the strength of the nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Nonlinearity {
    pub alpha: f64,
    pub n: f64,
}

impl Nonlinearity {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::InvalidParameter("alpha must be positive".into()));
        }
        if !(self.n.is_finite() && self.n > 1.0) {
            return Err(Error::InvalidParameter("n must exceed 1".into()));
        }
        Ok(())
    }
}

/// Half-widths `a` of the uniform perturbations `U(-a, a)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseBounds {
    pub alpha: f64,
    pub n: f64,
    pub theta_s: f64,
    pub theta_r: f64,
}

impl Default for NoiseBounds {
    fn default() -> Self {
        Self {
            alpha: 0.2,
            n: 0.05,
            theta_s: 0.05,
            theta_r: 0.005,
        }
    }
}

impl NoiseBounds {
    fn as_array(&self) -> [f64; 4] {
        [self.alpha, self.n, self.theta_s, self.theta_r]
    }
}

/// Which soil parameters carry randomness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Randomize {
    /// Conductivity and all four van Genuchten perturbations.
    #[default]
    All,
    /// Lognormal conductivity only; `α, n, θ_s, θ_r` stay at their baselines.
    Conductivity,
    /// Fully deterministic soil.
    None,
}

impl Randomize {
    fn active(&self, field: usize) -> bool {
        match self {
            Randomize::All => true,
            Randomize::Conductivity => field == 0,
            Randomize::None => false,
        }
    }
}

/// Everything needed to turn white noise into soil fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SoilModel {
    pub baseline: SoilBaseline,
    pub noise: NoiseBounds,
    pub matern: MaternSpec,
    pub chaos_order: usize,
    pub padding: usize,
    pub randomize: Randomize,
}

impl Default for SoilModel {
    fn default() -> Self {
        Self {
            baseline: SoilBaseline::default(),
            noise: NoiseBounds::default(),
            matern: MaternSpec::PHI1,
            chaos_order: 6,
            padding: 2,
            randomize: Randomize::All,
        }
    }
}

impl SoilModel {
    pub fn validate(&self) -> Result<()> {
        self.baseline.validate()?;
        self.matern.validate()?;
        for a in self.noise.as_array() {
            if !(a.is_finite() && a >= 0.0) {
                return Err(Error::InvalidParameter(
                    "noise half-widths must be non-negative".into(),
                ));
            }
        }
        if self.chaos_order == 0 {
            return Err(Error::InvalidParameter("chaos order must be at least 1".into()));
        }
        Ok(())
    }
}

/// White-noise draws behind one event `ω`; `None` marks a field that is not
/// randomized.
#[derive(Debug, Clone, PartialEq)]
pub struct SoilNoise {
    pub fields: [Option<WhiteNoise>; 5],
}

impl SoilNoise {
    pub fn none() -> Self {
        Self {
            fields: Default::default(),
        }
    }

    /// Draw each active field from its own seed `(key, field name)`.
    pub fn draw(side: usize, randomize: Randomize, key: &SampleKey, campaign: u64) -> Self {
        let mut fields: [Option<WhiteNoise>; 5] = Default::default();
        for (k, slot) in fields.iter_mut().enumerate() {
            if randomize.active(k) {
                let mut rng = rng_from(key.field_seed(campaign, FIELD_NAMES[k]));
                *slot = Some(WhiteNoise::draw(side, &mut rng));
            }
        }
        Self { fields }
    }

    /// Noise for the next coarser level.
    pub fn upscale(&self) -> Result<Self> {
        let mut fields: [Option<WhiteNoise>; 5] = Default::default();
        for (dst, src) in fields.iter_mut().zip(&self.fields) {
            if let Some(y) = src {
                *dst = Some(y.upscale()?);
            }
        }
        Ok(Self { fields })
    }
}

/// Per-cell soil parameters for one event on one grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoilRealization {
    pub ks: CellField,
    pub alpha: CellField,
    pub n: CellField,
    pub theta_s: CellField,
    pub theta_r: CellField,
    /// Cells whose values had to be clamped back into the admissible range.
    pub clamped: usize,
}

impl SoilRealization {
    pub fn homogeneous(grid: CellGrid, baseline: &SoilBaseline) -> Self {
        Self {
            ks: CellField::constant(grid, baseline.ks),
            alpha: CellField::constant(grid, baseline.alpha),
            n: CellField::constant(grid, baseline.n),
            theta_s: CellField::constant(grid, baseline.theta_s),
            theta_r: CellField::constant(grid, baseline.theta_r),
            clamped: 0,
        }
    }

    pub fn grid(&self) -> CellGrid {
        self.ks.grid()
    }

    pub fn check_invariants(&self) -> bool {
        let n = self.grid().len();
        (0..n).all(|c| {
            self.ks.values()[c] > 0.0
                && self.alpha.values()[c] > 0.0
                && self.n.values()[c] > 1.0
                && self.theta_r.values()[c] < self.theta_s.values()[c]
        })
    }
}

/// Sampler plus chaos weights for one grid; immutable and shareable.
#[derive(Debug)]
pub struct SoilGenerator {
    model: SoilModel,
    sampler: FieldSampler,
    /// `None` where the half-width is zero.
    marginals: [Option<MarginalSpec>; 4],
}

impl SoilGenerator {
    pub fn new(grid: CellGrid, model: SoilModel) -> Result<Self> {
        model.validate()?;
        let sampler = FieldSampler::with_padding(grid, model.matern, model.padding)?;
        let mut marginals: [Option<MarginalSpec>; 4] = Default::default();
        for (slot, a) in marginals.iter_mut().zip(model.noise.as_array()) {
            if a > 0.0 {
                *slot = Some(MarginalSpec::new(
                    Marginal::Uniform { a: -a, b: a },
                    model.chaos_order,
                )?);
            }
        }
        Ok(Self {
            model,
            sampler,
            marginals,
        })
    }

    pub fn grid(&self) -> CellGrid {
        self.sampler.grid()
    }

    pub fn model(&self) -> &SoilModel {
        &self.model
    }

    pub fn sampler(&self) -> &FieldSampler {
        &self.sampler
    }

    pub fn noise_side(&self) -> usize {
        self.sampler.padded_side()
    }

    pub fn draw_noise(&self, key: &SampleKey, campaign: u64) -> SoilNoise {
        SoilNoise::draw(self.noise_side(), self.model.randomize, key, campaign)
    }

    /// Build the soil fields for `noise` with the baseline `(α, n)` replaced
    /// by `theta`.
    pub fn realize(&self, noise: &SoilNoise, theta: Nonlinearity) -> Result<SoilRealization> {
        let grid = self.grid();
        let base = self.model.baseline.with_nonlinearity(theta);
        let mut soil = SoilRealization::homogeneous(grid, &base);
        let mut clamped = 0usize;

        if let Some(y) = &noise.fields[0] {
            let z = self.sampler.sample_gaussian(y)?;
            for (k, zv) in soil.ks.values_mut().iter_mut().zip(z.values()) {
                *k = base.ks * zv.exp();
            }
        }

        let half_widths = self.model.noise.as_array();
        let targets: [&mut CellField; 4] = [
            &mut soil.alpha,
            &mut soil.n,
            &mut soil.theta_s,
            &mut soil.theta_r,
        ];
        for (k, target) in targets.into_iter().enumerate() {
            let Some(y) = &noise.fields[k + 1] else {
                continue;
            };
            let Some(spec) = &self.marginals[k] else {
                continue;
            };
            let a = half_widths[k];
            let z = self.sampler.sample_gaussian(y)?;
            for (v, zv) in target.values_mut().iter_mut().zip(z.values()) {
                let mut eps = spec.transform(*zv);
                if eps.abs() > a {
                    eps = eps.clamp(-a, a);
                    clamped += 1;
                }
                *v += eps;
            }
        }

        for c in 0..grid.len() {
            let alpha = &mut soil.alpha.values_mut()[c];
            if *alpha < MIN_ALPHA {
                *alpha = MIN_ALPHA;
                clamped += 1;
            }
            let n = &mut soil.n.values_mut()[c];
            if *n < 1.0 + MIN_N_EXCESS {
                *n = 1.0 + MIN_N_EXCESS;
                clamped += 1;
            }
            let theta_s = soil.theta_s.values()[c];
            let theta_r = &mut soil.theta_r.values_mut()[c];
            if *theta_r < 0.0 {
                *theta_r = 0.0;
                clamped += 1;
            }
            if *theta_r > theta_s - MIN_THETA_GAP {
                *theta_r = theta_s - MIN_THETA_GAP;
                clamped += 1;
            }
        }
        soil.clamped = clamped;
        Ok(soil)
    }
}

/// One soil realization at the model's own baseline, keyed by `seed`.
pub fn sample_soil(grid: CellGrid, model: &SoilModel, seed: u64) -> Result<SoilRealization> {
    let generator = SoilGenerator::new(grid, *model)?;
    let key = SampleKey::new("soil", 0, 0);
    let noise = generator.draw_noise(&key, seed);
    generator.realize(&noise, model.baseline.nonlinearity())
}

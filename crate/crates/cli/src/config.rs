//! Campaign configuration: a TOML file with one table per concern. Every key
//! is optional; an empty file is a valid configuration.

use std::path::{Path, PathBuf};

use richards_uq::bench::{infiltration_problem, ComparisonConfig, ConvergenceConfig, CostMapConfig, Scenario};
use richards_uq::randfield::{
    MaternSpec, NoiseBounds, Nonlinearity, Randomize, SoilBaseline, SoilModel,
};
use richards_uq::solver::SolverSettings;
use richards_uq::uq::{build_levels, CostModel, HierarchySpec, MlmcConfig};
use richards_uq::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    /// Campaign seed.
    pub seed: u64,
    pub out: PathBuf,
    /// Worker threads; 0 means all available cores.
    pub threads: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            seed: 1,
            out: PathBuf::from("out"),
            threads: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SoilSection {
    pub ks: f64,
    pub alpha: f64,
    pub n: f64,
    pub theta_s: f64,
    pub theta_r: f64,
    /// `all`, `conductivity` or `none`.
    pub randomize: Randomize,
    pub chaos_order: usize,
    /// Periodic embedding factor for the FFT sampler.
    pub padding: usize,
}

impl Default for SoilSection {
    fn default() -> Self {
        let b = SoilBaseline::default();
        let m = SoilModel::default();
        Self {
            ks: b.ks,
            alpha: b.alpha,
            n: b.n,
            theta_s: b.theta_s,
            theta_r: b.theta_r,
            randomize: m.randomize,
            chaos_order: m.chaos_order,
            padding: m.padding,
        }
    }
}

/// Half-widths of the uniform perturbations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSection {
    pub alpha: f64,
    pub n: f64,
    pub theta_s: f64,
    pub theta_r: f64,
}

impl Default for NoiseSection {
    fn default() -> Self {
        let b = NoiseBounds::default();
        Self {
            alpha: b.alpha,
            n: b.n,
            theta_s: b.theta_s,
            theta_r: b.theta_r,
        }
    }
}

/// A preset name, optionally with individual parameters overridden.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MaternSection {
    pub preset: String,
    pub nu: Option<f64>,
    pub lambda_x: Option<f64>,
    pub lambda_z: Option<f64>,
    pub variance: Option<f64>,
}

impl Default for MaternSection {
    fn default() -> Self {
        Self {
            preset: "phi1".into(),
            nu: None,
            lambda_x: None,
            lambda_z: None,
            variance: None,
        }
    }
}

impl MaternSection {
    pub fn spec(&self) -> Result<MaternSpec> {
        let base = MaternSpec::preset(&self.preset).ok_or_else(|| {
            Error::Config(format!("unknown Matérn preset {:?} (expected phi1 or phi2)", self.preset))
        })?;
        Ok(MaternSpec {
            nu: self.nu.unwrap_or(base.nu),
            lambda_x: self.lambda_x.unwrap_or(base.lambda_x),
            lambda_z: self.lambda_z.unwrap_or(base.lambda_z),
            variance: self.variance.unwrap_or(base.variance),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveSection {
    pub m: usize,
    pub dt: f64,
    pub t_final: f64,
}

impl Default for SolveSection {
    fn default() -> Self {
        Self {
            m: 32,
            dt: 1.0 / 64.0,
            t_final: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldsSection {
    pub m: usize,
    /// Realization index within the campaign.
    pub index: usize,
}

impl Default for FieldsSection {
    fn default() -> Self {
        Self { m: 64, index: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McSection {
    pub m: usize,
    pub dt_ratio: f64,
    pub samples: usize,
    pub t_final: f64,
}

impl Default for McSection {
    fn default() -> Self {
        Self {
            m: 32,
            dt_ratio: 1.0,
            samples: 64,
            t_final: 0.2,
        }
    }
}

/// Shared by the `mlmc`, `pcmlmc` and `compare` subcommands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimatorSection {
    pub eps: f64,
    /// `work`, `cycles` or `wall_time`.
    pub cost_model: CostModel,
    pub max_rounds: usize,
    pub t_final: f64,
    pub max_attempts: usize,
}

impl Default for EstimatorSection {
    fn default() -> Self {
        let m = MlmcConfig::default();
        Self {
            eps: m.eps,
            cost_model: m.cost_model,
            max_rounds: m.max_rounds,
            t_final: 0.2,
            max_attempts: 25,
        }
    }
}

/// Standard hierarchy: every level uses the soil baseline `(α, n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MlmcSection {
    pub coarsest: usize,
    pub levels: usize,
    pub dt_ratio: f64,
    pub warmup: Option<Vec<usize>>,
}

impl Default for MlmcSection {
    fn default() -> Self {
        Self {
            coarsest: 32,
            levels: 2,
            dt_ratio: 1.0,
            warmup: None,
        }
    }
}

/// Continuation hierarchy ending at the soil baseline `(α, n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PcMlmcSection {
    pub coarsest: usize,
    pub levels: usize,
    pub dt_ratio: f64,
    pub grad_alpha: f64,
    pub grad_n: f64,
    pub pin_finest_two: bool,
    /// Explicit `[[alpha, n], ...]` per level, coarsest first.
    pub theta: Option<Vec<[f64; 2]>>,
    pub warmup: Option<Vec<usize>>,
}

impl Default for PcMlmcSection {
    fn default() -> Self {
        Self {
            coarsest: 16,
            levels: 3,
            dt_ratio: 1.0,
            grad_alpha: 0.05,
            grad_n: 0.1,
            pin_finest_two: false,
            theta: None,
            warmup: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergeSection {
    pub coarsest: usize,
    pub levels: usize,
    pub samples: usize,
    pub dt_ratio: f64,
    pub t_final: f64,
}

impl Default for ConvergeSection {
    fn default() -> Self {
        let c = ConvergenceConfig::default();
        Self {
            coarsest: c.coarsest,
            levels: c.levels,
            samples: c.samples,
            dt_ratio: c.dt_ratio,
            t_final: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CampaignConfig {
    pub run: RunSection,
    pub soil: SoilSection,
    pub noise: NoiseSection,
    pub matern: MaternSection,
    pub solver: SolverSettings,
    pub solve: SolveSection,
    pub fields: FieldsSection,
    pub costmap: CostMapConfig,
    pub converge: ConvergeSection,
    pub mc: McSection,
    pub estimator: EstimatorSection,
    pub mlmc: MlmcSection,
    pub pcmlmc: PcMlmcSection,
}

impl CampaignConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: CampaignConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn baseline(&self) -> SoilBaseline {
        SoilBaseline {
            ks: self.soil.ks,
            alpha: self.soil.alpha,
            n: self.soil.n,
            theta_s: self.soil.theta_s,
            theta_r: self.soil.theta_r,
        }
    }

    pub fn soil_model(&self) -> Result<SoilModel> {
        Ok(SoilModel {
            baseline: self.baseline(),
            noise: NoiseBounds {
                alpha: self.noise.alpha,
                n: self.noise.n,
                theta_s: self.noise.theta_s,
                theta_r: self.noise.theta_r,
            },
            matern: self.matern.spec()?,
            chaos_order: self.soil.chaos_order,
            padding: self.soil.padding,
            randomize: self.soil.randomize,
        })
    }

    pub fn scenario(&self, t_final: f64) -> Scenario {
        infiltration_problem(t_final)
    }

    pub fn mlmc_config(&self) -> MlmcConfig {
        MlmcConfig {
            eps: self.estimator.eps,
            cost_model: self.estimator.cost_model,
            max_rounds: self.estimator.max_rounds,
        }
    }

    pub fn std_hierarchy(&self) -> HierarchySpec {
        HierarchySpec {
            dt_ratio: self.mlmc.dt_ratio,
            warmup: self.mlmc.warmup.clone(),
            ..HierarchySpec::standard(self.mlmc.coarsest, self.mlmc.levels, self.baseline().nonlinearity())
        }
    }

    pub fn pc_hierarchy(&self) -> HierarchySpec {
        let p = &self.pcmlmc;
        HierarchySpec {
            coarsest: p.coarsest,
            levels: p.levels,
            dt_ratio: p.dt_ratio,
            theta_finest: self.baseline().nonlinearity(),
            grad_alpha: p.grad_alpha,
            grad_n: p.grad_n,
            pin_finest_two: p.pin_finest_two,
            theta_override: p
                .theta
                .as_ref()
                .map(|v| v.iter().map(|&[alpha, n]| Nonlinearity { alpha, n }).collect()),
            warmup: p.warmup.clone(),
        }
    }

    pub fn comparison(&self) -> ComparisonConfig {
        ComparisonConfig {
            pc: self.pc_hierarchy(),
            std: self.std_hierarchy(),
            mlmc: self.mlmc_config(),
        }
    }

    pub fn convergence(&self) -> ConvergenceConfig {
        ConvergenceConfig {
            coarsest: self.converge.coarsest,
            levels: self.converge.levels,
            samples: self.converge.samples,
            dt_ratio: self.converge.dt_ratio,
        }
    }

    /// Checks every section up front so no subcommand starts computing on a
    /// bad configuration.
    pub fn validate(&self) -> Result<()> {
        let cfg_err = |e: Error| match e {
            Error::Config(_) => e,
            other => Error::Config(other.to_string()),
        };
        self.soil_model().and_then(|m| m.validate()).map_err(cfg_err)?;
        self.solver.validate().map_err(cfg_err)?;
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive")))
            }
        };
        positive("solve.dt", self.solve.dt)?;
        positive("solve.t_final", self.solve.t_final)?;
        positive("costmap.dt", self.costmap.dt)?;
        positive("costmap.t_final", self.costmap.t_final)?;
        positive("converge.t_final", self.converge.t_final)?;
        positive("mc.t_final", self.mc.t_final)?;
        positive("mc.dt_ratio", self.mc.dt_ratio)?;
        positive("estimator.eps", self.estimator.eps)?;
        positive("estimator.t_final", self.estimator.t_final)?;
        for (name, m) in [
            ("solve.m", self.solve.m),
            ("fields.m", self.fields.m),
            ("costmap.m", self.costmap.m),
            ("converge.coarsest", self.converge.coarsest),
            ("mc.m", self.mc.m),
            ("mlmc.coarsest", self.mlmc.coarsest),
            ("pcmlmc.coarsest", self.pcmlmc.coarsest),
        ] {
            if m < 2 {
                return Err(Error::Config(format!("{name} must be at least 2")));
            }
        }
        if self.costmap.reps == 0 {
            return Err(Error::Config("costmap.reps must be positive".into()));
        }
        if self.mc.samples < 2 {
            return Err(Error::Config("mc.samples must be at least 2".into()));
        }
        if self.estimator.max_attempts == 0 || self.estimator.max_rounds == 0 {
            return Err(Error::Config("estimator caps must be positive".into()));
        }
        if self.converge.levels < 2 || self.converge.samples == 0 {
            return Err(Error::Config(
                "converge needs at least 2 levels and 1 sample".into(),
            ));
        }
        build_levels(&self.std_hierarchy()).map_err(cfg_err)?;
        build_levels(&self.pc_hierarchy()).map_err(cfg_err)?;
        for (a, n) in self.costmap.alphas.iter().flat_map(|a| self.costmap.ns.iter().map(move |n| (*a, *n))) {
            Nonlinearity { alpha: a, n }.validate().map_err(cfg_err)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = CampaignConfig::from_toml("").unwrap();
        assert_eq!(c, CampaignConfig::default());
        assert_eq!(c.solver.eps_picard, 1e-5);
        assert_eq!(c.solver.eps_mg, 1e-5);
        assert_eq!(c.soil.chaos_order, 6);
        assert_eq!(c.matern.spec().unwrap(), MaternSpec::PHI1);
    }

    #[test]
    fn invalid_n_is_rejected_by_name() {
        let e = CampaignConfig::from_toml("[soil]\nn = 0.9\n").unwrap_err();
        assert!(e.to_string().contains("n must exceed 1"), "{e}");
    }

    #[test]
    fn phi2_preset() {
        let c = CampaignConfig::from_toml("[matern]\npreset = \"phi2\"\n").unwrap();
        let s = c.matern.spec().unwrap();
        assert_eq!((s.nu, s.lambda_x, s.lambda_z, s.variance), (0.5, 0.1, 0.01, 1.0));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(CampaignConfig::from_toml("[soil]\nbogus = 1\n").is_err());
        assert!(CampaignConfig::from_toml("[nope]\n").is_err());
    }

    #[test]
    fn parse_errors_carry_position() {
        let e = CampaignConfig::from_toml("[soil]\nn = \n").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
    }

    #[test]
    fn explicit_theta_list() {
        let c = CampaignConfig::from_toml(
            "[pcmlmc]\nlevels = 2\ntheta = [[1.5, 2.5], [1.0, 2.0]]\n",
        )
        .unwrap();
        let l = build_levels(&c.pc_hierarchy()).unwrap();
        assert_eq!(l[0].theta, Nonlinearity { alpha: 1.5, n: 2.5 });
    }
}

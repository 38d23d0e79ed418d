//! Subcommand dispatch and artifact writing.

use std::path::{Path, PathBuf};
use std::time::Instant;

use richards_uq::bench::{convergence_study, cost_map, estimator_comparison, ConvergenceStudy, CostMapCell};
use richards_uq::grid::CellGrid;
use richards_uq::io::{to_file, write_convergence_csv, write_costmap_csv, write_field_csv, write_json};
use richards_uq::randfield::{SoilGenerator, FIELD_NAMES};
use richards_uq::seed::SampleKey;
use richards_uq::solver::{solve_richards, step_plan, Medium, SolveStats, StepStats};
use richards_uq::uq::{build_levels, monte_carlo, pc_mlmc, CoupledSampler, HierarchySpec, MlmcTelemetry};
use richards_uq::{CellField, Error, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::CampaignConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// One forward solve on one soil realization.
    Solve,
    /// Dump one soil realization.
    Fields,
    /// Solver cost over a grid of `(α, n)` pairs.
    Costmap,
    /// Stochastic refinement study.
    Converge,
    /// Plain Monte Carlo with a fixed sample count.
    Mc,
    /// Standard multilevel Monte Carlo.
    Mlmc,
    /// Multilevel Monte Carlo with parametric continuation.
    Pcmlmc,
    /// `mlmc` and `pcmlmc` on the same seed.
    Compare,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Fields => "fields",
            Command::Costmap => "costmap",
            Command::Converge => "converge",
            Command::Mc => "mc",
            Command::Mlmc => "mlmc",
            Command::Pcmlmc => "pcmlmc",
            Command::Compare => "compare",
        }
    }
}

/// What a run produced.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: Command,
    pub hash: String,
    pub artifacts: Vec<PathBuf>,
    /// The deterministic summary, also written as `<cmd>-<hash>-telemetry.json`.
    pub telemetry: serde_json::Value,
    pub wall_seconds: f64,
}

impl RunReport {
    pub fn telemetry_path(&self) -> &Path {
        self.artifacts
            .iter()
            .find(|p| p.to_string_lossy().ends_with("-telemetry.json"))
            .expect("every run writes telemetry")
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: Command,
    version: &'static str,
    config_hash: &'a str,
    seed: u64,
    threads: usize,
    config: &'a CampaignConfig,
    artifacts: Vec<String>,
    wall_seconds: f64,
    /// Timing-dependent numbers that are kept out of the telemetry.
    timing: serde_json::Value,
}

/// First 12 hex digits of the SHA-256 of the configuration, ignoring where
/// the output goes and how many threads compute it.
pub fn config_hash(cfg: &CampaignConfig) -> String {
    let mut c = cfg.clone();
    c.run.out = PathBuf::new();
    c.run.threads = 0;
    let json = serde_json::to_string(&c).expect("config serializes");
    let digest = Sha256::digest(json.as_bytes());
    digest.iter().take(6).map(|b| format!("{b:02x}")).collect()
}

struct Writer {
    dir: PathBuf,
    prefix: String,
    written: Vec<PathBuf>,
}

impl Writer {
    fn path(&mut self, suffix: &str) -> PathBuf {
        let p = self.dir.join(format!("{}-{suffix}", self.prefix));
        self.written.push(p.clone());
        p
    }

    fn field(&mut self, suffix: &str, f: &CellField) -> Result<()> {
        let p = self.path(&format!("{suffix}.csv"));
        to_file(&p, |w| write_field_csv(w, f))
    }

    fn json<T: Serialize + ?Sized>(&mut self, suffix: &str, v: &T) -> Result<()> {
        let p = self.path(&format!("{suffix}.json"));
        to_file(&p, |w| write_json(w, v))
    }
}

#[derive(Serialize)]
struct SolveTelemetry {
    m: usize,
    dt_requested: f64,
    dt: f64,
    t_final: f64,
    clamped: usize,
    stats: SolveStats,
    steps: Vec<StepStats>,
}

#[derive(Serialize)]
struct FieldSummary {
    name: &'static str,
    min: f64,
    max: f64,
    mean: f64,
}

#[derive(Serialize)]
struct FieldsTelemetry {
    m: usize,
    index: usize,
    clamped: usize,
    fields: Vec<FieldSummary>,
}

#[derive(Serialize)]
struct CostmapTelemetry<'a> {
    cells: &'a [CostMapCell],
}

#[derive(Serialize)]
struct McTelemetry {
    m: usize,
    dt: f64,
    samples: usize,
    failures: usize,
    clamped: usize,
    total_cycles: usize,
    total_work: f64,
    /// `‖Var‖ / N`, the sampling variance of the mean.
    sampling_variance: f64,
}

#[derive(Serialize)]
struct CompareTelemetry<'a> {
    pc: &'a MlmcTelemetry,
    std: &'a MlmcTelemetry,
    mean_discrepancy: f64,
    speedup_work: f64,
}

fn sampler(cfg: &CampaignConfig, spec: &HierarchySpec, stream: &str) -> Result<CoupledSampler> {
    Ok(CoupledSampler::new(
        build_levels(spec)?,
        cfg.soil_model()?,
        cfg.scenario(cfg.estimator.t_final),
        cfg.solver,
        cfg.run.seed,
        stream,
    )?
    .with_max_attempts(cfg.estimator.max_attempts))
}

/// Runs `command` and writes its artifacts under `cfg.run.out`.
pub fn run(command: Command, cfg: &CampaignConfig) -> Result<RunReport> {
    cfg.validate()?;
    let start = Instant::now();
    let hash = config_hash(cfg);
    std::fs::create_dir_all(&cfg.run.out)?;
    let mut w = Writer {
        dir: cfg.run.out.clone(),
        prefix: format!("{}-{hash}", command.name()),
        written: Vec::new(),
    };
    let seed = cfg.run.seed;
    let model = cfg.soil_model()?;
    let mut timing = serde_json::Value::Null;

    let telemetry: serde_json::Value = match command {
        Command::Solve => {
            let grid = CellGrid::new(cfg.solve.m)?;
            let generator = SoilGenerator::new(grid, model)?;
            let noise = generator.draw_noise(&SampleKey::new("solve", 0, 0), seed);
            let soil = generator.realize(&noise, model.baseline.nonlinearity())?;
            let scenario = cfg.scenario(cfg.solve.t_final);
            let out = solve_richards(
                &scenario.initial.field(grid),
                &Medium::from_soil(&soil),
                &scenario.flow,
                cfg.solve.dt,
                scenario.t_final,
                &cfg.solver,
            )?;
            w.field("pressure", &out.pressure)?;
            let t = SolveTelemetry {
                m: grid.m(),
                dt_requested: cfg.solve.dt,
                dt: step_plan(cfg.solve.dt, scenario.t_final).1,
                t_final: out.time,
                clamped: soil.clamped,
                stats: out.stats.clone(),
                steps: out.steps,
            };
            let v = serde_json::to_value(&t)?;
            if let Some(msg) = &out.stats.failure {
                w.json("telemetry", &v)?;
                write_manifest(&mut w, command, cfg, &hash, start, timing)?;
                return Err(Error::CampaignAbort(format!("solve failed: {msg}")));
            }
            v
        }
        Command::Fields => {
            let grid = CellGrid::new(cfg.fields.m)?;
            let generator = SoilGenerator::new(grid, model)?;
            let noise = generator.draw_noise(&SampleKey::new("fields", 0, cfg.fields.index), seed);
            let soil = generator.realize(&noise, model.baseline.nonlinearity())?;
            let fields = [&soil.ks, &soil.alpha, &soil.n, &soil.theta_s, &soil.theta_r];
            let mut summary = Vec::new();
            for (name, f) in FIELD_NAMES.iter().zip(fields) {
                w.field(name, f)?;
                summary.push(FieldSummary {
                    name,
                    min: f.min(),
                    max: f.max(),
                    mean: f.values().iter().sum::<f64>() / f.values().len() as f64,
                });
            }
            serde_json::to_value(FieldsTelemetry {
                m: grid.m(),
                index: cfg.fields.index,
                clamped: soil.clamped,
                fields: summary,
            })?
        }
        Command::Costmap => {
            let cells = cost_map(&cfg.costmap, &model, &cfg.solver, seed)?;
            let p = w.path("costmap.csv");
            to_file(&p, |f| write_costmap_csv(f, &cells))?;
            serde_json::to_value(CostmapTelemetry { cells: &cells })?
        }
        Command::Converge => {
            let study: ConvergenceStudy = convergence_study(
                &cfg.convergence(),
                &model,
                &cfg.scenario(cfg.converge.t_final),
                &cfg.solver,
                seed,
            )?;
            let p = w.path("convergence.csv");
            to_file(&p, |f| write_convergence_csv(f, &study.rows))?;
            serde_json::to_value(&study)?
        }
        Command::Mc => {
            let spec = HierarchySpec {
                dt_ratio: cfg.mc.dt_ratio,
                ..HierarchySpec::standard(cfg.mc.m, 1, model.baseline.nonlinearity())
            };
            let s = CoupledSampler::new(
                build_levels(&spec)?,
                model,
                cfg.scenario(cfg.mc.t_final),
                cfg.solver,
                seed,
                "mc",
            )?
            .with_max_attempts(cfg.estimator.max_attempts);
            let (mean, var, xs) = monte_carlo(&s, 0, cfg.mc.samples)?;
            w.field("mean", &mean)?;
            w.field("variance", &var)?;
            let h = mean.grid().h();
            serde_json::to_value(McTelemetry {
                m: cfg.mc.m,
                dt: s.levels()[0].dt,
                samples: xs.len(),
                failures: xs.iter().map(|x| x.failures).sum(),
                clamped: xs.iter().map(|x| x.clamped).sum(),
                total_cycles: xs.iter().map(|x| x.cost.cycles).sum(),
                total_work: xs.iter().map(|x| x.cost.work).sum(),
                sampling_variance: var.values().iter().sum::<f64>() * h * h / xs.len() as f64,
            })?
        }
        Command::Mlmc | Command::Pcmlmc => {
            let spec = if command == Command::Mlmc {
                cfg.std_hierarchy()
            } else {
                cfg.pc_hierarchy()
            };
            let r = pc_mlmc(&sampler(cfg, &spec, "mlmc")?, &cfg.mlmc_config())?;
            w.field("mean", &r.mean)?;
            w.field("variance", &r.variance)?;
            timing = serde_json::json!({ "level_wall_seconds": r.wall_seconds });
            serde_json::to_value(&r.telemetry)?
        }
        Command::Compare => {
            let r = estimator_comparison(
                &cfg.comparison(),
                &model,
                &cfg.scenario(cfg.estimator.t_final),
                &cfg.solver,
                seed,
            )?;
            w.field("pc-mean", &r.pc.mean)?;
            w.field("pc-variance", &r.pc.variance)?;
            w.field("std-mean", &r.std.mean)?;
            w.field("std-variance", &r.std.variance)?;
            timing = serde_json::json!({
                "pc_level_wall_seconds": r.pc.wall_seconds,
                "std_level_wall_seconds": r.std.wall_seconds,
                "speedup_wall": r.speedup_wall,
            });
            serde_json::to_value(CompareTelemetry {
                pc: &r.pc.telemetry,
                std: &r.std.telemetry,
                mean_discrepancy: r.mean_discrepancy,
                speedup_work: r.speedup_work,
            })?
        }
    };
    w.json("telemetry", &telemetry)?;
    let wall = write_manifest(&mut w, command, cfg, &hash, start, timing)?;
    Ok(RunReport {
        command,
        hash,
        artifacts: w.written,
        telemetry,
        wall_seconds: wall,
    })
}

fn write_manifest(
    w: &mut Writer,
    command: Command,
    cfg: &CampaignConfig,
    hash: &str,
    start: Instant,
    timing: serde_json::Value,
) -> Result<f64> {
    let wall = start.elapsed().as_secs_f64();
    let manifest_path = w.dir.join(format!("{}-manifest.json", w.prefix));
    let mut artifacts: Vec<String> = w
        .written
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    artifacts.push(manifest_path.file_name().unwrap().to_string_lossy().into_owned());
    let m = Manifest {
        command,
        version: env!("CARGO_PKG_VERSION"),
        config_hash: hash,
        seed: cfg.run.seed,
        threads: cfg.run.threads,
        config: cfg,
        artifacts,
        wall_seconds: wall,
        timing,
    };
    to_file(&manifest_path, |f| write_json(f, &m))?;
    w.written.push(manifest_path);
    Ok(wall)
}

/// Process exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::InvalidParameter(_) => 2,
        Error::NonlinearFailure { .. }
        | Error::InnerDivergence { .. }
        | Error::SingularSystem { .. }
        | Error::CampaignAbort(_) => 3,
        Error::Embedding { .. } => 4,
        _ => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_ignores_output_location() {
        let a = CampaignConfig::default();
        let mut b = a.clone();
        b.run.out = PathBuf::from("/elsewhere");
        b.run.threads = 3;
        assert_eq!(config_hash(&a), config_hash(&b));
        b.run.seed = 99;
        assert_ne!(config_hash(&a), config_hash(&b));
        assert_eq!(config_hash(&a).len(), 12);
    }

    #[test]
    fn exit_codes_are_distinct() {
        assert_eq!(exit_code(&Error::Config("x".into())), 2);
        assert_eq!(exit_code(&Error::NonlinearFailure { step: 0, iterations: 50 }), 3);
        assert_eq!(
            exit_code(&Error::Embedding {
                fraction: 0.1,
                tolerance: 0.01,
                padding: 2
            }),
            4
        );
        assert_eq!(exit_code(&Error::InsufficientData { needed: 2, got: 0 }), 1);
    }
}

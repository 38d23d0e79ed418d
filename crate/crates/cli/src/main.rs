use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use richards_uq_cli::{exit_code, run, set_threads, CampaignConfig, Command};

/// Forward uncertainty quantification for the stochastic Richards equation.
///
/// Every flag can also be set through the environment variable shown in its
/// help; flags override the config file.
#[derive(Debug, Parser)]
#[command(name = "richards-uq", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,

    /// TOML configuration; all keys optional.
    #[arg(long, env = "RICHARDS_UQ_CONFIG")]
    config: Option<PathBuf>,

    /// Campaign seed.
    #[arg(long, env = "RICHARDS_UQ_SEED")]
    seed: Option<u64>,

    /// Output directory.
    #[arg(long, env = "RICHARDS_UQ_OUT")]
    out: Option<PathBuf>,

    /// Worker threads, 0 for all cores.
    #[arg(long, env = "RICHARDS_UQ_THREADS")]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cfg = match &cli.config {
        Some(p) => match CampaignConfig::load(p) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(exit_code(&e) as u8);
            }
        },
        None => CampaignConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.run.seed = s;
    }
    if let Some(o) = cli.out {
        cfg.run.out = o;
    }
    if let Some(t) = cli.threads {
        cfg.run.threads = t;
    }
    set_threads(cfg.run.threads);
    match run(cli.command, &cfg) {
        Ok(report) => {
            for a in &report.artifacts {
                println!("{}", a.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}

//! `qnd-filter`: runs photon-box filtering experiments from a JSON config.
//!
//! Exit status: 0 success, 1 config error, 2 runtime error, 3 validation failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use commands::Outcome;
use config::{Experiment, ExperimentConfig};

#[derive(Debug, Parser)]
#[command(name = "qnd-filter", version, about = "Imperfect QND measurement filtering experiments")]
struct Cli {
    /// Experiment to run.
    #[arg(value_enum)]
    command: Experiment,
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output_dir` in the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write into a non-empty output directory.
    #[arg(long)]
    force: bool,
    /// Override `trajectory.seed`.
    #[arg(long)]
    seed: Option<u64>,
}

const EXIT_CONFIG: u8 = 1;
const EXIT_RUNTIME: u8 = 2;
const EXIT_VALIDATION: u8 = 3;

fn load(cli: &Cli) -> anyhow::Result<ExperimentConfig> {
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", cli.config.display()))?;
    let mut cfg = ExperimentConfig::parse(&text)?;
    if let Some(seed) = cli.seed {
        cfg.trajectory.seed = seed;
    }
    cfg.check(cli.command)?;
    Ok(cfg)
}

fn output_dir(cli: &Cli, cfg: &ExperimentConfig) -> anyhow::Result<PathBuf> {
    let dir = cli
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .ok_or_else(|| anyhow::anyhow!("no output directory: pass --out or set output_dir"))?;
    commands::prepare_output(&dir, cli.force)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cfg = match load(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("config error: {e:#}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };

    let result = match cli.command {
        Experiment::Validate => commands::validate(&cfg),
        kind => match output_dir(&cli, &cfg) {
            Err(e) => {
                eprintln!("config error: {e:#}");
                return ExitCode::from(EXIT_CONFIG);
            }
            Ok(out) => match kind {
                Experiment::Simulate => commands::simulate(&cfg, &out),
                Experiment::RegionScan => commands::region(&cfg, &out),
                Experiment::DecoherenceRun => commands::decoherence(&cfg, &out),
                Experiment::Validate => unreachable!(),
            },
        },
    };

    match result {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::ValidationFailed) => ExitCode::from(EXIT_VALIDATION),
        Err(e) => {
            // parameters are validated up front, so anything left is a run or I/O failure
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

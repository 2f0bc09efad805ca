mod config;
mod pipeline;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use jostfit::fitting::ModelKind;

use crate::config::{ConfigError, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "jostfit", version, about = "Jost-function and R-matrix fits of Coulomb scattering cross sections")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Pipeline configuration (TOML).
    #[arg(long, global = true, default_value = "configs/reference.toml")]
    config: PathBuf,
    /// Overrides the multistart seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the fitted model.
    #[arg(long, global = true, value_parser = parse_model)]
    model: Option<ModelKind>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Generate the synthetic cross-section dataset from the exact potential.
    Generate,
    /// Fit the configured model to the dataset.
    Fit,
    /// Fit the R-matrix model (same as `fit --model rmatrix`).
    Rfit,
    /// Locate resonances of the fitted model (and optionally the exact ones).
    Poles,
    /// Write figure data, parameter tables and the resonance summary.
    Report,
    /// generate → fit → poles → report.
    All,
}

fn parse_model(s: &str) -> Result<ModelKind, String> {
    s.parse().map_err(|e: jostfit::Error| e.to_string())
}

/// Outcome of a stage that finished but whose fit did not converge.
pub struct NotConverged;

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.chain().any(|e| e.downcast_ref::<ConfigError>().is_some()) {
        2
    } else {
        3
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = || -> anyhow::Result<Result<(), NotConverged>> {
        let mut cfg = RunConfig::load(&cli.config)?;
        if let Some(seed) = cli.seed {
            cfg.fit.seed = seed;
        }
        if let Some(out) = &cli.out {
            cfg.output_dir = out.clone();
        }
        if let Some(model) = cli.model {
            cfg.fit.model = model;
        }
        if cli.command == Command::Rfit {
            cfg.fit.model = ModelKind::Rmatrix;
        }
        cfg.validate()?;
        std::fs::create_dir_all(&cfg.output_dir)
            .map_err(|e| config::config_err(format!("cannot create {}: {e}", cfg.output_dir.display())))?;
        match cli.command {
            Command::Generate => pipeline::generate(&cfg).map(Ok),
            Command::Fit | Command::Rfit => pipeline::fit(&cfg),
            Command::Poles => pipeline::poles(&cfg).map(Ok),
            Command::Report => pipeline::report(&cfg).map(Ok),
            Command::All => {
                pipeline::generate(&cfg)?;
                let fitted = pipeline::fit(&cfg)?;
                pipeline::poles(&cfg)?;
                pipeline::report(&cfg)?;
                Ok(fitted)
            }
        }
    };
    match run() {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(NotConverged)) => {
            eprintln!("warning: fit did not converge; best-effort result written");
            ExitCode::from(4)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

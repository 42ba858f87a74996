//! `occml` command line: runs the occupancy-prediction pipeline stage by
//! stage against a JSON config. Exit codes: 0 success, 2 input error,
//! 3 tuning failure, 4 evaluation/explanation failure, 5 incomplete report.

mod commands;
mod config;
mod store;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;
use occml::models::ModelKind;
use occml::tuning::GridProfile;

#[derive(Parser)]
#[command(name = "occml", version, about = "Room-occupancy classification pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Path to the JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Use the fast (desk-scale) grid profile.
    #[arg(long, conflicts_with = "full")]
    fast: bool,
    /// Use the full benchmark-scale grid profile.
    #[arg(long)]
    full: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Summary statistics, autocorrelations, correlation matrix, series
    /// exports, and the occupancy-on-CO2-slope fit.
    Eda {
        #[command(flatten)]
        common: Common,
    },
    /// Grid-search cross-validation; writes one tuning artifact per model.
    Tune {
        #[command(flatten)]
        common: Common,
        /// Tune a single model kind instead of every configured one.
        #[arg(long)]
        model: Option<String>,
    },
    /// Test-set evaluation of tuned models plus the results table.
    Evaluate {
        #[command(flatten)]
        common: Common,
        /// Evaluate a single model kind.
        #[arg(long)]
        model: Option<String>,
        /// Tune any model whose artifact is missing instead of failing.
        #[arg(long)]
        tune_missing: bool,
    },
    /// Shapley attributions for one tuned model over test samples.
    Explain {
        #[command(flatten)]
        common: Common,
        /// Model kind to explain.
        #[arg(long)]
        model: String,
        /// Number of test samples to explain (default from config).
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Consolidated markdown report joining the result, timing, and
    /// autocorrelation tables.
    Report {
        #[command(flatten)]
        common: Common,
    },
}

fn effective_config(common: &Common) -> Result<RunConfig, commands::CmdError> {
    let mut config = RunConfig::load(&common.config)
        .map_err(|e| commands::CmdError { code: 2, error: e })?;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(out) = &common.out {
        config.out_dir = out.clone();
    }
    if common.fast {
        config.grid_profile = GridProfile::Fast;
    }
    if common.full {
        config.grid_profile = GridProfile::Full;
    }
    Ok(config)
}

fn parse_kind(id: &str) -> Result<ModelKind, commands::CmdError> {
    ModelKind::from_id(id).ok_or_else(|| commands::CmdError {
        code: 2,
        error: anyhow::anyhow!(
            "unknown model kind {id:?}; expected one of {}",
            ModelKind::ALL.map(|k| k.id()).join(", ")
        ),
    })
}

fn init_thread_pool() {
    if let Ok(raw) = std::env::var("OCCML_THREADS") {
        match raw.parse::<usize>() {
            Ok(n) if n >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => eprintln!("warning: ignoring invalid OCCML_THREADS={raw:?}"),
        }
    }
}

fn run() -> commands::CmdResult {
    let cli = Cli::parse();
    init_thread_pool();
    match &cli.command {
        Command::Eda { common } => commands::cmd_eda(&effective_config(common)?),
        Command::Tune { common, model } => {
            let config = effective_config(common)?;
            let only = model.as_deref().map(parse_kind).transpose()?;
            commands::cmd_tune(&config, only)
        }
        Command::Evaluate { common, model, tune_missing } => {
            let config = effective_config(common)?;
            let only = model.as_deref().map(parse_kind).transpose()?;
            commands::cmd_evaluate(&config, only, *tune_missing)
        }
        Command::Explain { common, model, samples } => {
            let config = effective_config(common)?;
            let kind = parse_kind(model)?;
            commands::cmd_explain(&config, kind, *samples)
        }
        Command::Report { common } => commands::cmd_report(&effective_config(common)?),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {:#}", e.error);
            ExitCode::from(e.code as u8)
        }
    }
}

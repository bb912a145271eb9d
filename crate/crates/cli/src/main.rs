//! Command-line orchestrator for surface-state density experiments.
//!
//! Every run is a pure function of (config, seed): outputs land under
//! `out/<digest>/` where the digest hashes the resolved configuration, and
//! repeated runs are byte-identical.
//!
//! Exit codes: 0 pass, 1 study failure, 2 configuration error, 3 numeric
//! failure.

mod commands;
mod config;
mod output;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use commands::Outcome;
use config::ExperimentConfig;
use output::{OutDir, OutputFormat};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "idss",
    about = "Finite-volume laboratory for densities of surface states"
)]
struct Cli {
    /// Experiment configuration (TOML). Required by every command except
    /// selftest.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory root.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads for realization fan-out (0 = automatic).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Output format for tables.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Wall-clock guard: abort with exit code 3 after this many seconds.
    #[arg(long, global = true, default_value_t = 1800)]
    max_seconds: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form free density and the Landau ladder.
    FreeIds,
    /// Transverse ground-energy study over the window ladder.
    TransverseGap {
        /// Also dump the first window's operator in coordinate-list form.
        #[arg(long)]
        dump_operator: bool,
    },
    /// Finite-volume estimator of the surface-state density.
    Idss,
    /// Reduced-operator density curves (scales 1 and 1 ± δ).
    ReducedIds,
    /// Two-sided estimate reports (global, ground-edge, internal-edge).
    Sandwich,
    /// Double-log exponent fit of a stored curve.
    LifshitsFit,
    /// Run the example and invariant battery.
    Selftest,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if cli.max_seconds > 0 {
        let limit = cli.max_seconds;
        std::thread::spawn(move || {
            std::thread::sleep(std::time::Duration::from_secs(limit));
            eprintln!("error: wall-clock guard hit after {limit}s");
            std::process::exit(3);
        });
    }
    if cli.threads > 0 {
        // Never changes any emitted byte: the reduction order is fixed.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    match run(&cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::StudyFailure) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(classify(&err))
        }
    }
}

fn run(cli: &Cli) -> Result<Outcome> {
    if matches!(cli.command, Command::Selftest) {
        return commands::cmd_selftest();
    }
    let path = cli
        .config
        .as_ref()
        .context("--config is required for this command")?;
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let cfg = ExperimentConfig::parse(&text)?;
    let seed = cfg.seed(cli.seed);
    // Validate before creating any output.
    cfg.resolve()?;
    let format = match cli.format {
        Format::Csv => OutputFormat::Csv,
        Format::Json => OutputFormat::Json,
    };
    let out = OutDir::create(&cli.out, &cfg.canonical(seed), format)?;
    log::info!("run {} writing to {}", out.digest, out.root().display());
    let outcome = match &cli.command {
        Command::FreeIds => commands::cmd_free_ids(&cfg, seed, &out)?,
        Command::TransverseGap { dump_operator } => {
            commands::cmd_transverse_gap(&cfg, seed, &out, *dump_operator)?
        }
        Command::Idss => commands::cmd_idss(&cfg, seed, &out)?,
        Command::ReducedIds => commands::cmd_reduced_ids(&cfg, seed, &out)?,
        Command::Sandwich => commands::cmd_sandwich(&cfg, seed, &out)?,
        Command::LifshitsFit => commands::cmd_lifshits_fit(&cfg, &out)?,
        Command::Selftest => unreachable!(),
    };
    println!("{}", out.root().display());
    Ok(outcome)
}

/// Exit code for failed runs: 2 for configuration and parameter-domain
/// problems, 3 for numeric failures inside a valid study.
fn classify(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(c) = cause.downcast_ref::<idss_core::error::CountingError>() {
            return match c {
                idss_core::error::CountingError::FactorizationBreakdown { .. } => 3,
                idss_core::error::CountingError::BudgetExceeded { .. } => 3,
                idss_core::error::CountingError::Build(_) => 3,
                idss_core::error::CountingError::AboveEssentialFloor { .. } => 2,
            };
        }
        if let Some(b) = cause.downcast_ref::<idss_core::error::BuildError>() {
            return match b {
                idss_core::error::BuildError::SolverFailure { .. } => 3,
                idss_core::error::BuildError::BudgetExceeded { .. } => 3,
                _ => 2,
            };
        }
        if cause
            .downcast_ref::<idss_core::error::AnalysisError>()
            .is_some()
            || cause
                .downcast_ref::<idss_core::error::MagneticError>()
                .is_some()
            || cause
                .downcast_ref::<idss_core::error::DisorderError>()
                .is_some()
        {
            return 2;
        }
    }
    2
}

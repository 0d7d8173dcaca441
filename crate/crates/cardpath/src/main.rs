use std::path::PathBuf;
use std::process::ExitCode as ProcessExit;

use cardpath::parallel::Workers;
use cardpath::{run_experiment, write_report, CliError, ExitCode, ExperimentConfig};
use clap::Parser;

/// Runs a lattice path-integral experiment described by a config file.
#[derive(Debug, Parser)]
#[command(name = "cardpath", version)]
struct Args {
    /// Experiment configuration (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to `output_path` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Suppresses the summary line.
    #[arg(long)]
    quiet: bool,
}

fn run(args: &Args) -> Result<String, CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|source| CliError::Io { path: args.config.display().to_string(), source })?;
    let mut cfg = ExperimentConfig::parse(&text)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let dir = args.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.output_path));
    let report = Workers::from_env().install(|| run_experiment(&cfg))?;
    write_report(&report, &dir)?;
    Ok(report.summary)
}

fn main() -> ProcessExit {
    let args = Args::parse();
    match run(&args) {
        Ok(summary) => {
            if !args.quiet {
                println!("{summary}");
            }
            ProcessExit::from(ExitCode::Success as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ProcessExit::from(e.exit_code() as u8)
        }
    }
}

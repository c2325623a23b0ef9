use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use contestlab_cli::config::Format;
use contestlab_cli::{emit_report, load_config, run, CliError};

/// Solve, analyze and verify contest equilibria described by a config file.
#[derive(Debug, Parser)]
#[command(name = "contestlab", version)]
struct Args {
    /// Config file (sectioned key-value text, or JSON with a `.json` extension).
    config: PathBuf,
    /// Worker threads for sweeps, restarts and Monte Carlo blocks.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Report format, overriding `[output] format`.
    #[arg(long, value_parser = ["json", "csv"])]
    format: Option<String>,
    /// Report path, overriding `[output] path`; `-` writes to standard output.
    #[arg(long)]
    out: Option<String>,
    /// Random seed, overriding `[output] seed`.
    #[arg(long)]
    seed: Option<u64>,
}

fn execute(args: &Args) -> Result<bool, CliError> {
    let start = Instant::now();
    let mut config = load_config(&args.config)?;
    if let Some(format) = args.format.as_deref().and_then(Format::parse) {
        config.output.format = format;
    }
    if let Some(out) = &args.out {
        config.output.path = (out != "-").then(|| out.clone());
    }
    if let Some(seed) = args.seed {
        config.output.seed = seed;
    }
    let outcome = run(&config, args.jobs)?;
    emit_report(&outcome.report, config.output.format, config.output.path.as_deref().map(Path::new))?;
    eprintln!("{}: {} [{:.3?}]", outcome.report.command, outcome.summary, start.elapsed());
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(5),
        Err(e) => {
            eprintln!("contestlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use driven_oscillator_cli::{run, Command};

/// Exact solution of the driven harmonic oscillator, with numerical oracles.
#[derive(Parser)]
#[command(name = "dho", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// JSON run configuration; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override one config key, e.g. `--set grid.n_points=4096`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(
        args.command,
        args.config.as_deref(),
        args.out.as_deref(),
        &args.set,
    ) {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            println!("wrote {}", outcome.manifest.display());
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use twofluid_cli::config::RunConfig;
use twofluid_cli::{run, CliError, Command, THREADS_ENV};

/// Instability laboratory for a compressible two-fluid model.
#[derive(Debug, Parser)]
#[command(name = "twofluid", version)]
struct Args {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration.
    #[arg(global = true)]
    config: Option<PathBuf>,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

fn main_inner(args: &Args) -> Result<String, CliError> {
    configure_threads()?;
    let path = args
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("missing configuration file argument".into()))?;
    let cfg = RunConfig::load(path)?;
    let out = run(&args.command, &cfg)?;
    // Stdout carries only the command's payload so it can be piped.
    for a in &out.artifacts {
        eprintln!("wrote {}", a.display());
    }
    Ok(out.stdout)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match main_inner(&args) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            if let CliError::VerifyFailed { report, .. } = &e {
                print!("{report}");
            }
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

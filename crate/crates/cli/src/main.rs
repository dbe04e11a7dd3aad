use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use heatkernel_cli::commands::{self, Context};
use heatkernel_cli::config::load_config;
use heatkernel_cli::{CliError, EXIT_CHECK_FAILED, EXIT_ERROR, EXIT_OK};

/// Rational pricing models driven by Lévy random bridges.
#[derive(Debug, Parser)]
#[command(name = "heatkernel", version)]
struct Cli {
    /// TOML configuration (schema = 1).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed of every random stream.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of Monte Carlo paths.
    #[arg(long, global = true)]
    paths: Option<usize>,
    /// Output directory [default: $HEATKERNEL_OUT or the current directory].
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Tolerance override, e.g. `--tol n_se=4`.
    #[arg(long = "tol", global = true, value_parser = parse_tol)]
    tol: Vec<(String, f64)>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Initial discount curve, coefficient and forward rates.
    Curve,
    /// Closed-form and Monte Carlo option prices.
    Price,
    /// Real-world paths of the state, bond price and short rate.
    Simulate,
    /// Sovereign contagion scenario.
    Contagion,
    /// Acceptance checks; exit code 1 when any fails.
    Verify {
        /// Comma-separated criterion numbers; all when omitted.
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<usize>,
    },
    /// SVG charts of a contagion CSV.
    Plot {
        csv: PathBuf,
        /// Path index to draw.
        #[arg(long = "path-id", default_value_t = 0)]
        path_id: u64,
    },
}

fn parse_tol(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got {s:?}"))?;
    let value = value.trim().parse().map_err(|_| format!("bad tolerance value {value:?}"))?;
    Ok((name.trim().to_string(), value))
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let config = cli.config.as_deref().map(load_config).transpose()?;
    let out = cli
        .out
        .or_else(|| std::env::var_os("HEATKERNEL_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let ctx = Context { config, seed: cli.seed, paths: cli.paths, out, tolerances: cli.tol };
    if ctx.paths == Some(0) {
        return Err(CliError::Config("--paths: must be at least 1".into()));
    }
    let written = match cli.command {
        Command::Curve => vec![commands::curve(&ctx)?],
        Command::Price => vec![commands::price(&ctx)?],
        Command::Simulate => vec![commands::simulate(&ctx)?],
        Command::Contagion => vec![commands::contagion(&ctx)?],
        Command::Verify { criteria } => return commands::verify(&ctx, &criteria),
        Command::Plot { csv, path_id } => commands::plot(&ctx, &csv, path_id)?,
    };
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::from(EXIT_OK),
        Ok(false) => ExitCode::from(EXIT_CHECK_FAILED),
        Err(e) => {
            eprintln!("heatkernel: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

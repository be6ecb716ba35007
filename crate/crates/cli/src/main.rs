use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand as ClapSubcommand};

mod config;
mod export;
mod run;

use config::Subcommand;

/// Disk harmonic-map solver and distortion diagnostics.
#[derive(Parser)]
#[command(name = "harmap", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Flat key = value configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(ClapSubcommand)]
enum Command {
    /// Solve the boundary problem and export the map.
    Solve(CommonArgs),
    /// Run the full estimate battery on a solved map or a fixture.
    Diagnose(CommonArgs),
    /// Build the recentered family and check its interior bounds.
    Rescale(CommonArgs),
    /// Verify the kernel identities on fixed sample points.
    Kernels(CommonArgs),
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let (subcommand, args) = match &cli.command {
        Command::Solve(a) => (Subcommand::Solve, a),
        Command::Diagnose(a) => (Subcommand::Diagnose, a),
        Command::Rescale(a) => (Subcommand::Rescale, a),
        Command::Kernels(a) => (Subcommand::Kernels, a),
    };
    let text = match fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read config {}: {e}", args.config.display());
            return ExitCode::from(run::EXIT_INPUT);
        }
    };
    let parsed = match config::parse_config(subcommand, &text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(run::EXIT_INPUT);
        }
    };
    ExitCode::from(run::execute(&parsed, &args.out))
}

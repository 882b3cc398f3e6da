use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use iac_cli::commands::{cmd_eigen, cmd_equilibrium, cmd_run, cmd_sweep, cmd_verify};
use iac_cli::{CliError, Context, Job};

/// Solver and verifier for the irreversible Allen-Cahn equation.
#[derive(Debug, Parser)]
#[command(name = "iac", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON job description.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `outputs.directory`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Suppress progress output.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate the flow and write the trajectory.
    Run,
    /// Run the configured checks on a fresh or stored trajectory.
    Verify,
    /// Smallest eigenvalue of `−Δ + V`.
    Eigen,
    /// Solve the stationary obstacle problem.
    Equilibrium,
    /// Run several members concurrently and compare them.
    Sweep,
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Config("--config <path> is required".into()))?;
    let job = Job::load(path)?;
    let ctx = Context { out: cli.out.clone(), quiet: cli.quiet };
    match cli.command {
        Command::Run => cmd_run(&job, &ctx),
        Command::Verify => cmd_verify(&job, &ctx),
        Command::Eigen => cmd_eigen(&job, &ctx),
        Command::Equilibrium => cmd_equilibrium(&job, &ctx),
        Command::Sweep => cmd_sweep(&job, &ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("iac: {e}");
            e.exit_code()
        }
    }
}

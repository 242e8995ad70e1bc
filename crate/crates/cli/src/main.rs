//! Command-line front end for the hypersew library.
//!
//! Every command reads its parameters from flags, optionally backed by a
//! JSON `--config` file whose keys are the flag names with `-` replaced by
//! `_`. Flags win over the file.

mod commands;
mod config;
mod error;
mod fieldspec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::ConfigFile;
use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "hypersew", version, about = "Multiparameter sewing, Young integrals and field equations on [0,1]^k")]
struct Cli {
    /// Worker threads for parallel sums (default 1, for reproducible timing).
    #[arg(long, global = true, env = "HYPERSEW_THREADS")]
    threads: Option<usize>,

    /// JSON file with default values for the command's flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a field on a uniform grid and write it as CSV.
    GenField(commands::GenFieldArgs),
    /// Young integral of Y against X over a rectangle, as JSON.
    Integrate(commands::IntegrateArgs),
    /// Solve Y = ξ + ∫ f(Y) dX on a uniform grid.
    Solve(commands::SolveArgs),
    /// Riemann sums of the Young germ over dyadic levels, with fitted order.
    Convergence(commands::ConvergenceArgs),
    /// Check the δ-operator identities on random inputs.
    DeltaCheck(commands::DeltaCheckArgs),
    /// Perturbation sweep of the solution map.
    Stability(commands::StabilityArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = cli.config.as_deref().map(ConfigFile::load).transpose()?;
    let threads = cli.threads.or(file.as_ref().and_then(|f| f.threads)).unwrap_or(1);
    if threads == 0 {
        return Err(CliError::config("threads", "must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::config("threads", e))?;

    let file = file.as_ref();
    match cli.command {
        Command::GenField(a) => commands::gen_field(a, file),
        Command::Integrate(a) => commands::integrate(a, file),
        Command::Solve(a) => commands::solve(a, file),
        Command::Convergence(a) => commands::convergence(a, file),
        Command::DeltaCheck(a) => commands::delta_check(a, file),
        Command::Stability(a) => commands::stability(a, file),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}

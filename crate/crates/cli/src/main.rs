use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use distid_cli::{parse_config, run, Command, Format, RunConfig, RunError};

/// Identification of many distributions from permuted sequences:
/// error bounds, Monte Carlo simulation and combinatorial checks.
///
/// Every flag can also be set in the TOML file given by --config; flags win.
/// Exit codes: 2 config error, 3 precondition violation, 4 I/O failure.
#[derive(Parser)]
#[command(name = "distid", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Criterion sum S and the upper/lower error bounds over n_grid.
    Bounds(Common),
    /// Monte Carlo ML error probability per n, with bounds alongside
    /// (default trials: 10000).
    Simulate(Common),
    /// Cycle-gain inequality over (k, r, trial); counting facts with
    /// `facts = true` (default trials: 1).
    Lemma(Common),
    /// Fit of the pairwise error exponent against 2B(p, q)
    /// (default trials: 100000).
    Exponent(Common),
    /// Identifiability trend of a growing family sequence.
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    /// TOML run config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// RNG seed [default: 24301 = 0x5EED].
    #[arg(long)]
    seed: Option<u64>,
    /// Output file [default: standard output].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format [default: csv].
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Monte Carlo threads, 0 = one per core [default: 0].
    #[arg(long)]
    workers: Option<usize>,
    /// Trials per point (graphs per (k, r) for `lemma`).
    #[arg(long)]
    trials: Option<u64>,
}

fn load(command: Command, flags: Common) -> Result<RunConfig, RunError> {
    let mut config = match &flags.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?;
            parse_config(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(file_command) = config.command {
        if file_command != command {
            return Err(RunError::Config(format!(
                "config is for `{file_command}` but `{command}` was requested"
            )));
        }
    }
    config.command = Some(command);
    config.seed = flags.seed.unwrap_or(config.seed);
    config.out = flags.out.or(config.out);
    config.format = flags.format.unwrap_or(config.format);
    config.workers = flags.workers.unwrap_or(config.workers);
    config.trials = flags.trials.or(config.trials);
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, flags) = match cli.command {
        Cmd::Bounds(f) => (Command::Bounds, f),
        Cmd::Simulate(f) => (Command::Simulate, f),
        Cmd::Lemma(f) => (Command::Lemma, f),
        Cmd::Exponent(f) => (Command::Exponent, f),
        Cmd::Sweep(f) => (Command::Sweep, f),
    };
    match load(command, flags).and_then(|config| run(&config)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("distid: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

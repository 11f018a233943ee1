use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rhpe_cli::{execute, CliError, Config, Mode, JOBS_ENV};

#[derive(Parser)]
#[command(name = "rhpe", version, about = "Randomized-Hamiltonian phase estimation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ground-energy statistics of sampled Hamiltonians over (rho, N).
    Sweep(Common),
    /// Ensemble of adaptive phase-estimation sessions.
    Pe(Common),
    /// Random-instance checks of the perturbation bounds.
    BoundsAudit(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, env = JOBS_ENV, default_value_t = 1)]
    jobs: usize,
    /// Overrides the config's output directory.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (args, mode) = match cli.command {
        Command::Sweep(a) => (a, Mode::Sweep),
        Command::Pe(a) => (a, Mode::PeSession),
        Command::BoundsAudit(a) => (a, Mode::BoundsAudit),
    };
    let mut cfg = Config::load(&args.config)?;
    if cfg.mode != mode {
        return Err(CliError::Config(format!(
            "{}: mode is {}, not {}",
            args.config.display(),
            cfg.mode.name(),
            mode.name()
        )));
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(o) = args.output {
        cfg.output = o;
    }
    let report = execute(&cfg, args.jobs)?;
    for f in &report.files {
        println!("wrote {}", f.display());
    }
    if report.strict_violations > 0 {
        return Err(CliError::Violation(report.strict_violations));
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

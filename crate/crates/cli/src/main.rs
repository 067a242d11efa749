use std::path::PathBuf;
use std::process::ExitCode;

use cascade_lab::{parse_config, run, CliError, Command};
use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "cascade-lab",
    version,
    about = "Null-control experiments for cascade systems of backward stochastic heat equations"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Adjoint trajectory energies and the Gronwall check.
    SolveAdjoint(Args),
    /// Penalized HUM control for every configured epsilon.
    Synthesize(Args),
    /// Gramian spectrum and observability constant.
    Observability(Args),
    /// Kernel probe of the observation Gramian.
    UcProbe(Args),
    /// Carleman ratio tables over the lambda sweep.
    Carleman(Args),
    /// Observability constant against the horizon.
    CostSweep(Args),
}

#[derive(clap::Args, Debug)]
struct Args {
    /// Experiment configuration (TOML).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
}

impl Cmd {
    fn split(self) -> (Command, Args) {
        match self {
            Cmd::SolveAdjoint(a) => (Command::SolveAdjoint, a),
            Cmd::Synthesize(a) => (Command::Synthesize, a),
            Cmd::Observability(a) => (Command::Observability, a),
            Cmd::UcProbe(a) => (Command::UcProbe, a),
            Cmd::Carleman(a) => (Command::Carleman, a),
            Cmd::CostSweep(a) => (Command::CostSweep, a),
        }
    }
}

fn execute(command: Command, args: Args) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| CliError::io(&args.config, e))?;
    let mut cfg = parse_config(&text)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let out = args.out.unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    let summary = run(command, &cfg, &out)?;
    println!("{}: {}", command.name(), summary.headline);
    for name in &summary.artifacts {
        println!("  wrote {}", out.join(name).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let (command, args) = Cli::parse().command.split();
    match execute(command, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use relaxns::app::{execute, exit_code, Command, Options, EXIT_INVALID};

#[derive(Parser)]
#[command(
    name = "relaxns",
    version,
    about = "Radial relaxed compressible Navier-Stokes simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Configuration file, or `default` for the built-in defaults.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,

    /// Comma-separated relaxation times for sweep-tau.
    #[arg(long, global = true, value_delimiter = ',', value_name = "TAUS")]
    tau_list: Option<Vec<f64>>,

    /// Seed for the random states of check-structure.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Suppress the summary on stdout.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Integrate the relaxed system (tau > 0).
    Run,
    /// Integrate classical Navier-Stokes (tau = 0).
    RunClassical,
    /// Compare relaxed runs over several tau against the classical baseline.
    SweepTau,
    /// Audit the symmetric hyperbolic structure and the wall determinant.
    CheckStructure,
    /// Run and report energy, dissipation and the a priori bound.
    EnergyReport,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INVALID } else { 0 });
        }
    };
    let opts = Options {
        command: match cli.command {
            Cmd::Run => Command::Run,
            Cmd::RunClassical => Command::RunClassical,
            Cmd::SweepTau => Command::SweepTau,
            Cmd::CheckStructure => Command::CheckStructure,
            Cmd::EnergyReport => Command::EnergyReport,
        },
        config: cli.config,
        out: cli.out,
        tau_list: cli.tau_list,
        seed: cli.seed,
        quiet: cli.quiet,
    };
    match execute(&opts) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

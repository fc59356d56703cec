mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use csext::{Complex64, Tolerance};

use crate::commands::Options;
use crate::io::{parse_lambda, render, CliError};

/// Extensions of C-symmetric contractions and dissipative operators.
#[derive(Parser)]
#[command(name = "csext", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Instance file (JSON).
    #[arg(long, global = true)]
    input: Option<PathBuf>,

    /// Parameter matrix file (JSON).
    #[arg(long, global = true)]
    param: Option<PathBuf>,

    /// Residual tolerance.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,

    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[arg(long, global = true, default_value_t = 1000)]
    trials: usize,

    /// Spectral parameter as RE,IM (defaults to the instance value, then 0,1).
    #[arg(long, global = true, value_parser = parse_lambda, allow_hyphen_values = true)]
    lambda: Option<Complex64>,

    /// Grid step for the 2x2 exhaustive enumeration in `fuzz`.
    #[arg(long, global = true)]
    grid_step: Option<f64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Check that the instance is a C-symmetric contraction (or the declared kind).
    Validate,
    /// Bounded C-self-adjoint extension from a parameter.
    ExtendBounded,
    /// C-self-adjoint contractive extension from a parameter.
    ExtendContractive,
    /// Center of the set of C-self-adjoint contractive extensions.
    Center,
    /// Center and radii of the operator ball of extensions.
    Ball,
    /// Uniqueness criteria and probes.
    Unique,
    /// Cayley transform of a dissipative operator.
    Cayley,
    /// C-self-adjoint maximal dissipative extension.
    Glazman,
    /// Randomized coverage search, plus grid enumeration with --grid-step.
    Fuzz,
}

fn run(cli: &Cli) -> Result<serde_json::Value, CliError> {
    let input = cli
        .input
        .clone()
        .ok_or_else(|| CliError::Parse("--input is required".into()))?;
    let tol = Tolerance::new(Tolerance::default().rank_tol, cli.tol).map_err(|e| CliError::Parse(e.to_string()))?;
    let opts = Options {
        input,
        param: cli.param.clone(),
        tol,
        seed: cli.seed,
        trials: cli.trials,
        lambda: cli.lambda,
        grid_step: cli.grid_step,
    };
    match cli.command {
        Command::Validate => commands::validate(&opts),
        Command::ExtendBounded => commands::extend_bounded(&opts),
        Command::ExtendContractive => commands::extend_contractive(&opts),
        Command::Center => commands::center(&opts),
        Command::Ball => commands::ball(&opts),
        Command::Unique => commands::unique(&opts),
        Command::Cayley => commands::cayley(&opts),
        Command::Glazman => commands::glazman(&opts),
        Command::Fuzz => commands::fuzz(&opts),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            println!("{}", render(&report));
            ExitCode::SUCCESS
        }
        Err(e) => {
            println!("{}", render(&e.to_json()));
            eprintln!("csext: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

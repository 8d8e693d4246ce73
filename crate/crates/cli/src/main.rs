use std::process::ExitCode;

use clap::{Parser, Subcommand};

use subsphere_cli::commands;
use subsphere_cli::config::{Command, Flags, RunConfig, Settings};
use subsphere_cli::error::{exit, CliResult};

/// Reconstruction from integrals over subspheres tangent to a spheroid.
#[derive(Parser)]
#[command(name = "subsphere", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Write a phantom and its exact radial profiles
    Phantom(Flags),
    /// Sample the spherical transform of a phantom into a sinogram
    Forward(Flags),
    /// Recover the harmonic profiles from a sinogram
    Invert(Flags),
    /// Run the property suites
    Verify(Flags),
}

fn execute(command: Command, flags: &Flags) -> CliResult<()> {
    let settings = Settings::from_flags(flags)?;
    let cfg = RunConfig::resolve(command, &settings)?;
    for w in commands::run(&cfg)? {
        eprintln!("warning: {w}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, flags) = match &cli.command {
        Sub::Phantom(f) => (Command::Phantom, f),
        Sub::Forward(f) => (Command::Forward, f),
        Sub::Invert(f) => (Command::Invert, f),
        Sub::Verify(f) => (Command::Verify, f),
    };
    match execute(command, flags) {
        Ok(()) => ExitCode::from(exit::OK),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

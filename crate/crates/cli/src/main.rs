use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;

use commands::{exit_code, Options};

/// Two-phase Stokes flow with surface tension on a moving fitted mesh.
#[derive(Parser)]
#[command(name = "twophase", version)]
struct Cli {
    /// Configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override a configuration entry, e.g. `--set discretization.h=0.05`.
    #[arg(long = "set", global = true, value_name = "SECTION.KEY=VALUE")]
    set: Vec<String>,

    /// Output directory, overriding `output.dir`.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Number of refinement levels for `converge`.
    #[arg(long, global = true, default_value_t = 3)]
    levels: usize,

    /// Suppress progress output.
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the time-stepping scheme and write diagnostics and snapshots.
    Run,
    /// Measure errors and convergence rates over successive mesh halvings.
    Converge,
    /// Report shape metrics of a mesh file (or of the configured mesh) and
    /// check that it re-exports unchanged.
    CheckMesh {
        /// Mesh file in the text format written by `run`.
        mesh_file: Option<PathBuf>,
    },
    /// Run the transport and integration-by-parts identity checks.
    Identities,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = Options { config: cli.config, set: cli.set, out: cli.out, levels: cli.levels, quiet: cli.quiet };
    let result = match cli.command {
        Command::Run => commands::run(&opts),
        Command::Converge => commands::converge(&opts),
        Command::CheckMesh { mesh_file } => commands::check_mesh(&opts, mesh_file.as_deref()),
        Command::Identities => commands::identities(&opts),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

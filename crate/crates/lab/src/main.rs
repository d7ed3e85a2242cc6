use std::path::PathBuf;
use std::process::ExitCode;

use blowuplab::commands::{self, Common};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "blowuplab", about = "Minimal-mass blow-up lab for the inhomogeneous cubic NLS")]
struct Cli {
    /// Output directory for tables, trajectories, plots and the manifest.
    #[arg(long, global = true, default_value = "blowuplab-out")]
    out: PathBuf,
    /// Seed for the random fields of the property suites.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Golden constants file.
    #[arg(long, global = true, default_value = concat!(env!("CARGO_MANIFEST_DIR"), "/goldens.txt"))]
    goldens: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite: spectral, profile, energy, ode, lyapunov or all.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Simulate from a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Repeat a run or profile evaluation along one axis: t0, k1 or P_scale.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        axis: String,
        /// Comma-separated values, at least three.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
    },
    /// Recompute the golden constants and overwrite the goldens file.
    RegenGoldens,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = Common { out: cli.out, seed: cli.seed, goldens: cli.goldens };
    let code = match &cli.command {
        Command::Verify { suite } => commands::verify(suite, &common),
        Command::Run { config } => commands::run(config, &common),
        Command::Sweep { config, axis, values } => {
            commands::sweep(config.as_deref(), axis, values, &common)
        }
        Command::RegenGoldens => commands::regen_goldens(&common),
    };
    ExitCode::from(code as u8)
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use liebundle_cli::{execute, Command};

#[derive(Parser)]
#[command(name = "liebundle", version, about = "Deformed Lie algebras, their Lie-Poisson pencils and flows")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(clap::Args)]
struct Common {
    /// JSON run configuration
    #[arg(long)]
    config: PathBuf,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the seed in the config
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the algebraic property suites
    Verify(Common),
    /// Signature or semidirect decomposition
    Classify(Common),
    /// Integrate a Hamiltonian system
    Simulate(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, args) = match cli.command {
        Cmd::Verify(a) => (Command::Verify, a),
        Cmd::Classify(a) => (Command::Classify, a),
        Cmd::Simulate(a) => (Command::Simulate, a),
    };
    let code = match execute(cmd, &args.config, args.out.as_deref(), args.seed) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}

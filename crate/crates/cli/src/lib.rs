//! Batch front end: JSON config in, reports, CSV trajectories and JSON
//! summaries out.

pub mod classify;
pub mod config;
pub mod error;
pub mod simulate;
pub mod verify;

use std::path::Path;

pub use config::RunConfig;
pub use error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Verify,
    Classify,
    Simulate,
}

/// Loads the config, applies the seed override and runs `cmd`, printing a
/// report to stdout. Returns the process exit code.
pub fn execute(cmd: Command, config: &Path, out: Option<&Path>, seed: Option<u64>) -> Result<i32, CliError> {
    let mut cfg = RunConfig::load(config)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    match cmd {
        Command::Verify => {
            let report = verify::run(&verify::VerifyInput::from_config(&cfg)?)?;
            print!("{}", report.render());
            if let Some(dir) = out {
                std::fs::create_dir_all(dir)?;
                std::fs::write(dir.join("verify.json"), serde_json::to_string_pretty(&report)? + "\n")?;
            }
            Ok(report.exit_code())
        }
        Command::Classify => {
            let c = classify::run(&cfg)?;
            print!("{}", c.render());
            if let Some(dir) = out {
                std::fs::create_dir_all(dir)?;
                std::fs::write(dir.join("classify.json"), serde_json::to_string_pretty(&c)? + "\n")?;
            }
            Ok(0)
        }
        Command::Simulate => {
            let outcome = simulate::run(&cfg)?;
            let dir = out.unwrap_or(Path::new("out"));
            simulate::write_outputs(&outcome, dir)?;
            let s = &outcome.summary;
            println!("{} t_last={} steps={} rejected={}", s.status, s.t_last, s.steps, s.rejected_steps);
            for m in &s.monitors {
                println!("  {:<4} drift {:.3e}", m.name, m.max_relative_drift);
            }
            println!("wrote {}", dir.display());
            if let liebundle::dynamics::RunStatus::BlowUp { t_last } = outcome.trajectory.status {
                eprintln!("error: {}", CliError::BlowUp { t_last });
            }
            Ok(outcome.exit_code())
        }
    }
}

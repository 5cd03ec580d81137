//! Command-line driver for the spin-chain similarity studies.

pub mod commands;
pub mod config;
pub mod error;

use std::fs;

pub use commands::{CheckResult, Outcome};
pub use config::{parse_config_file, Cli, Command, ConfigFile, RunConfig, SharedArgs};
pub use error::CliError;

/// Resolves the configuration, runs the command and applies `--check`.
/// Summary and check lines go to `log`.
pub fn execute(
    cli: &Cli,
    threads_env: Option<&str>,
    log: &mut dyn FnMut(&str),
) -> Result<(), CliError> {
    let file = match &cli.shared.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.display().to_string(),
                source,
            })?;
            Some(parse_config_file(&text)?)
        }
        None => None,
    };
    let cfg = RunConfig::resolve(cli.command, &cli.shared, file.as_ref(), threads_env)?;
    let outcome = commands::run(&cfg)?;
    for line in &outcome.summary {
        log(line);
    }
    for check in &outcome.checks {
        log(&check.to_string());
    }
    let failed = outcome.checks.iter().filter(|c| !c.passed).count();
    if cfg.check && failed > 0 {
        return Err(CliError::Check { failed });
    }
    Ok(())
}

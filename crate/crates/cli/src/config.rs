//! Run configuration: command-line flags over a flat JSON config file over
//! built-in defaults.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use quizsim::chain::{ChainSpec, ParameterGrid, DEFAULT_SWEEP_BUDGET};
use quizsim::hilbert::DEFAULT_MAX_SITES;

use crate::error::CliError;

/// Environment variable consulted for the thread count when neither a flag
/// nor the config file sets one.
pub const THREADS_ENV: &str = "QUIZSIM_THREADS";

pub const DEFAULT_NOISE_TRIALS: usize = 200;
pub const DEFAULT_MEASURE_TRIALS: usize = 10_000;
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "quizsim",
    version,
    about = "Spin-chain similarity protocol studies"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub shared: SharedArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Optimal rotation angle for every target (fig2.csv)
    Table,
    /// Similarity gain of the single-query protocol per target (fig3.csv)
    Sweep,
    /// Angle error and gain under a noisy oracle (noise.csv)
    Noise,
    /// Statistics of the projective-measurement oracle (measure.csv)
    Measure,
}

impl Command {
    pub fn output_name(self) -> &'static str {
        match self {
            Command::Table => "fig2.csv",
            Command::Sweep => "fig3.csv",
            Command::Noise => "noise.csv",
            Command::Measure => "measure.csv",
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct SharedArgs {
    /// Number of sites
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Nearest-neighbour ZZ coupling
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub j: Option<f64>,
    /// Smallest field value; also the candidate's uniform field
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub bmin: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub bmax: Option<f64>,
    /// Number of field levels
    #[arg(long, global = true)]
    pub d: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Comma-separated noise bounds
    #[arg(long, global = true, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    /// Trials per target (noise and measure)
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Output directory
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads, 0 for all cores
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// JSON file with any of the flag names as keys
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Turn reference-value comparisons into pass/fail gates (exit code 3)
    #[arg(long, global = true)]
    pub check: bool,
}

/// Flat key-value config file; keys mirror the long flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub n: Option<usize>,
    pub j: Option<f64>,
    pub bmin: Option<f64>,
    pub bmax: Option<f64>,
    pub d: Option<usize>,
    pub seed: Option<u64>,
    pub eps: Option<Vec<f64>>,
    pub trials: Option<usize>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub check: Option<bool>,
}

pub fn parse_config_file(text: &str) -> Result<ConfigFile, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Validation(format!("config file: {e}")))
}

/// Fully resolved and validated settings for one command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub n: usize,
    pub j: f64,
    pub bmin: f64,
    pub bmax: f64,
    pub d: usize,
    pub seed: u64,
    pub eps: Vec<f64>,
    pub trials: usize,
    #[serde(skip)]
    pub out: PathBuf,
    #[serde(skip)]
    pub threads: usize,
    #[serde(skip)]
    pub check: bool,
}

impl RunConfig {
    /// `flags > file > env (threads only) > defaults`, then validation.
    pub fn resolve(
        command: Command,
        flags: &SharedArgs,
        file: Option<&ConfigFile>,
        threads_env: Option<&str>,
    ) -> Result<Self, CliError> {
        let file = file.cloned().unwrap_or_default();
        let threads = match (flags.threads.or(file.threads), threads_env) {
            (Some(t), _) => t,
            (None, Some(v)) => v.trim().parse::<usize>().map_err(|_| {
                CliError::Validation(format!("{THREADS_ENV}={v:?} is not a thread count"))
            })?,
            (None, None) => 0,
        };
        let default_trials = match command {
            Command::Measure => DEFAULT_MEASURE_TRIALS,
            _ => DEFAULT_NOISE_TRIALS,
        };
        let cfg = RunConfig {
            command,
            n: flags.n.or(file.n).unwrap_or(4),
            j: flags.j.or(file.j).unwrap_or(1.0),
            bmin: flags.bmin.or(file.bmin).unwrap_or(-0.5),
            bmax: flags.bmax.or(file.bmax).unwrap_or(0.5),
            d: flags.d.or(file.d).unwrap_or(5),
            seed: flags.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            eps: flags
                .eps
                .clone()
                .or(file.eps)
                .unwrap_or_else(|| vec![0.0, 0.05, 0.1]),
            trials: flags.trials.or(file.trials).unwrap_or(default_trials),
            out: flags
                .out
                .clone()
                .or(file.out)
                .unwrap_or_else(|| PathBuf::from(".")),
            threads,
            check: flags.check || file.check.unwrap_or(false),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Validation(msg));
        if !(2..=DEFAULT_MAX_SITES).contains(&self.n) {
            return bad(format!(
                "--n must be in 2..={DEFAULT_MAX_SITES}, got {}",
                self.n
            ));
        }
        if !self.j.is_finite() {
            return bad("--j must be finite".into());
        }
        if self.eps.is_empty() {
            return bad("--eps needs at least one value".into());
        }
        if let Some(e) = self.eps.iter().find(|e| !(e.is_finite() && **e >= 0.0)) {
            return bad(format!("noise bound {e} must be finite and >= 0"));
        }
        if self.trials == 0 {
            return bad("--trials must be at least 1".into());
        }
        self.grid()?.target_count(self.n, DEFAULT_SWEEP_BUDGET)?;
        self.candidate()?;
        Ok(())
    }

    pub fn grid(&self) -> Result<ParameterGrid, CliError> {
        Ok(ParameterGrid::new(self.bmin, self.bmax, self.d)?)
    }

    /// Uniform chain at the smallest field value.
    pub fn candidate(&self) -> Result<ChainSpec, CliError> {
        Ok(ChainSpec::uniform(self.n, self.bmin, self.j)?)
    }
}

//! Configuration-driven experiment runner for the `replicalab` library.
//!
//! `replicalab run <config>` validates a flat `key = value` file, runs the
//! named experiment on a rayon pool of the requested size and writes
//! `report.json` plus experiment-specific CSVs.
//!
//! Exit codes: 0 success, 1 I/O or internal failure, 2 invalid
//! configuration, 3 scale error.

pub mod config;
pub mod experiments;
pub mod output;

use std::path::{Path, PathBuf};
use std::time::Instant;

use config::{validate_config, ExperimentConfig};
use experiments::RunOptions;

pub const THREADS_ENV: &str = "REPLICALAB_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),
    #[error("scale error: {0}")]
    Scale(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Scale(_) => 3,
            CliError::Io(_) | CliError::Failed(_) => 1,
        }
    }
}

impl From<replicalab::Error> for CliError {
    fn from(e: replicalab::Error) -> Self {
        use replicalab::Error as E;
        match e {
            E::Scale(_) => CliError::Scale(e.to_string()),
            E::Internal(_) => CliError::Failed(e.to_string()),
            _ => CliError::Validation(vec![e.to_string()]),
        }
    }
}

/// `threads` from the config, else from the environment.
pub fn resolve_threads(cfg: &ExperimentConfig, env: Option<&str>) -> Result<Option<usize>, CliError> {
    if cfg.threads.is_some() {
        return Ok(cfg.threads);
    }
    match env {
        None => Ok(None),
        Some(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(CliError::Validation(vec![format!("{THREADS_ENV} = {v:?} must be a positive integer")])),
        },
    }
}

#[derive(Debug)]
pub struct RunSummary {
    pub config: ExperimentConfig,
    pub warnings: Vec<String>,
    pub files: Vec<PathBuf>,
}

/// Runs an already validated configuration and writes its outputs.
pub fn run_config(cfg: &ExperimentConfig, opts: RunOptions, threads: Option<usize>) -> Result<Vec<PathBuf>, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Failed(format!("thread pool: {e}")))?;
    let start = Instant::now();
    let outcome = pool.install(|| experiments::run(cfg, opts))?;
    let wall = start.elapsed().as_secs_f64();
    output::write_outputs(cfg, &outcome, pool.current_num_threads(), wall)
}

/// The `run` subcommand: read, validate, execute, write.
pub fn run_file(path: &Path, overrides: &[String], opts: RunOptions) -> Result<RunSummary, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let validated = validate_config(&text, overrides).map_err(CliError::Validation)?;
    for w in &validated.warnings {
        eprintln!("{w}");
    }
    let env = std::env::var(THREADS_ENV).ok();
    let threads = resolve_threads(&validated.config, env.as_deref())?;
    let files = run_config(&validated.config, opts, threads)?;
    Ok(RunSummary { config: validated.config, warnings: validated.warnings, files })
}

//! Result files: one CSV per table plus `report.json`.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;

use crate::config::ExperimentConfig;
use crate::experiments::Outcome;
use crate::CliError;

pub const REPORT_FILE: &str = "report.json";

fn io(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Writes the CSVs and the report into the configured output directory and
/// returns the written paths. Only the report carries the wall time.
pub fn write_outputs(cfg: &ExperimentConfig, outcome: &Outcome, threads: usize, wall_seconds: f64) -> Result<Vec<PathBuf>, CliError> {
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let mut written = Vec::new();
    for t in &outcome.tables {
        let path = dir.join(t.file);
        fs::write(&path, t.text()).map_err(|e| io(&path, e))?;
        written.push(path);
    }
    let config: serde_json::Map<String, serde_json::Value> =
        cfg.params.iter().map(|(k, v)| (k.clone(), json!(v.to_string()))).collect();
    let report = json!({
        "experiment": cfg.experiment.name(),
        "root_seed": cfg.root_seed,
        "threads": threads,
        "config": config,
        "config_text": cfg.to_text(),
        "files": outcome.tables.iter().map(|t| t.file).collect::<Vec<_>>(),
        "wall_time_seconds": wall_seconds,
        "results": outcome.results,
    });
    let path = dir.join(REPORT_FILE);
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    fs::write(&path, text + "\n").map_err(|e| io(&path, e))?;
    written.push(path);
    Ok(written)
}

//! Config-driven front end: parse a scenario, run one mode, write CSV/JSON.

pub mod config;
pub mod error;
pub mod plot;
pub mod run;
pub mod verify;

pub use config::{parse_config, Mode, PipelineChoice, ScenarioConfig};
pub use error::CliError;
pub use run::{config_hash, execute, resolve, Overrides, RunOutput, RunReport, Settings};

use std::path::Path;

/// Reads, validates and runs a scenario file, returning the in-memory
/// outputs and the resolved settings. Nothing is written.
pub fn run_file(path: &Path, ov: &Overrides, env_out: Option<&str>) -> Result<(RunOutput, Settings), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
    run_text(&text, ov, env_out)
}

pub fn run_text(text: &str, ov: &Overrides, env_out: Option<&str>) -> Result<(RunOutput, Settings), CliError> {
    let cfg = parse_config(text)?;
    let settings = resolve(&cfg, ov, env_out)?;
    let out = execute(&cfg, &settings, &config_hash(text))?;
    Ok((out, settings))
}

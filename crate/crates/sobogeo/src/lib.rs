//! Command-line runner and file formats for `sobogeo-core`.
//!
//! A run reads a JSON config, resolves defaults for its task, writes
//! `manifest.json` (the resolved config, itself a valid config) and the task's
//! artifacts into the output directory.

pub mod config;
pub mod error;
pub mod formats;
pub mod parallel;
pub mod tasks;

use std::fs;
use std::path::{Path, PathBuf};

pub use config::{Config, RawConfig, Task};
pub use error::{Result, RunError};

use formats::{write_json, write_plots};
use parallel::Pool;

/// Loads and resolves a config file. Relative paths in it are taken against
/// the file's directory.
pub fn load_config(task: Task, path: &Path, out: Option<&Path>) -> Result<Config> {
    let text = fs::read_to_string(path).map_err(|e| RunError::io(path, e))?;
    let path = fs::canonicalize(path).map_err(|e| RunError::io(path, e))?;
    let base = path.parent().map_or_else(|| PathBuf::from("/"), Path::to_path_buf);
    RawConfig::parse(&text)?.resolve(task, &base, out)
}

/// Executes a resolved config.
pub fn run(cfg: &Config, pool: &Pool, emit_plots: bool) -> Result<()> {
    fs::create_dir_all(&cfg.output_dir).map_err(|e| RunError::io(&cfg.output_dir, e))?;
    let manifest = serde_json::to_value(cfg).map_err(|e| RunError::io(&cfg.output_dir, e))?;
    write_json(&cfg.output_dir.join("manifest.json"), &manifest)?;
    let series = tasks::run_task(cfg, pool)?;
    if emit_plots {
        write_plots(&cfg.output_dir.join("plots.csv"), &series)?;
    }
    Ok(())
}

/// Full invocation: config file to artifacts, with threads from the environment.
pub fn run_file(task: Task, config: &Path, out: Option<&Path>, emit_plots: bool) -> Result<Config> {
    let cfg = load_config(task, config, out)?;
    let pool = Pool::from_env()?;
    run(&cfg, &pool, emit_plots)?;
    Ok(cfg)
}

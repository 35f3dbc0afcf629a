//! Scenario runner behind the `sselab` binary.

pub mod config;
pub mod presets;
pub mod runner;

use std::path::Path;

use config::{ConfigError, RunConfig};

/// Resolves a command-line target: a preset name, a TOML config, or a
/// `run.json` written by an earlier run (whose `config` field is reused).
pub fn load_target(target: &str) -> Result<RunConfig, ConfigError> {
    if let Some(p) = presets::find(target) {
        return RunConfig::from_toml(p.toml);
    }
    let path = Path::new(target);
    if !path.is_file() {
        return Err(ConfigError::NotFound(target.to_string()));
    }
    if path.extension().is_some_and(|e| e == "json") {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: target.to_string(),
            source,
        })?;
        let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| ConfigError::Invalid {
            scenario: target.to_string(),
            message: e.to_string(),
        })?;
        let inner = value.get("config").cloned().unwrap_or(value);
        let cfg: RunConfig = serde_json::from_value(inner).map_err(|e| ConfigError::Invalid {
            scenario: target.to_string(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        return Ok(cfg);
    }
    RunConfig::from_file(path)
}

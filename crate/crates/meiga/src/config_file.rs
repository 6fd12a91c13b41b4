//! Flat `key = value` config files.
//!
//! Keys are the [`PipelineConfig`] field names (`A` for the complementary
//! weight). Missing keys take their defaults; unknown keys are rejected.
//!
//! ```text
//! A = 0.95
//! t_right_ms = 1000
//! accel_gate = [0.5, 1.5]
//! middle_click_enabled = false
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use meiga_core::PipelineConfig;

use crate::{Error, Result};

/// Environment variable naming the default config file.
pub const CONFIG_ENV: &str = "MEIGA_CONFIG";

pub fn parse_config(text: &str) -> Result<PipelineConfig> {
    let cfg: PipelineConfig =
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_owned()))?;
    cfg.validate().map_err(|errs| {
        let msgs: Vec<String> = errs.iter().map(ToString::to_string).collect();
        Error::Config(msgs.join("; "))
    })
}

pub fn render_config(cfg: &PipelineConfig) -> String {
    toml::to_string(cfg).expect("config serializes to a flat table")
}

pub fn load_config(path: &Path) -> Result<PipelineConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn save_config(path: &Path, cfg: &PipelineConfig) -> Result<()> {
    fs::write(path, render_config(cfg)).map_err(|e| Error::io(path, e))
}

/// Explicit path, else `$MEIGA_CONFIG`, else built-in defaults.
pub fn resolve_config(explicit: Option<&Path>) -> Result<PipelineConfig> {
    let from_env = std::env::var_os(CONFIG_ENV).map(PathBuf::from);
    match explicit.map(Path::to_path_buf).or(from_env) {
        Some(p) => load_config(&p),
        None => Ok(PipelineConfig::default()),
    }
}

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use swipt_core::SimConfig;

/// Parses a flat `key = value` configuration. Missing keys keep their
/// defaults; unknown keys are rejected.
pub fn parse_config(text: &str) -> Result<SimConfig> {
    let cfg: SimConfig = toml::from_str(text).context("malformed configuration")?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<SimConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
    parse_config(&text).with_context(|| format!("in {}", path.display()))
}

/// Renders a configuration that [`parse_config`] reads back unchanged.
pub fn render_config(cfg: &SimConfig) -> Result<String> {
    Ok(toml::to_string(cfg)?)
}

//! Training configuration files: flat `key = value` lines named after
//! `PpoConfig` fields. Unknown keys are errors; absent keys take defaults.

use std::path::Path;

use isbjssp_core::PpoConfig;

use crate::error::CliError;

pub fn parse_config(text: &str) -> Result<PpoConfig, CliError> {
    let config: PpoConfig = toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string()))?;
    config.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<PpoConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    parse_config(&text).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// The full effective configuration as `# key = value` comment lines.
pub fn config_echo(config: &PpoConfig) -> String {
    let body = toml::to_string(config).expect("config serializes");
    body.lines().filter(|l| !l.trim().is_empty()).map(|l| format!("# {l}\n")).collect()
}

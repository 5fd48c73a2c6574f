//! Robot configuration files (TOML).

use std::fs;
use std::path::Path;

use hexwall_core::RobotModel;
use thiserror::Error;

/// Robot configuration as stored on disk; angles in radians, lengths in meters.
pub type RobotConfig = RobotModel<f64>;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("cannot serialize config: {0}")]
    Serialize(#[from] toml::ser::Error),
    #[error("invariant violated: {name}: {detail}")]
    InvariantViolation { name: String, detail: String },
}

impl ConfigError {
    pub fn invariant_name(&self) -> Option<&str> {
        match self {
            ConfigError::InvariantViolation { name, .. } => Some(name),
            _ => None,
        }
    }
}

pub fn default_config() -> RobotConfig {
    RobotModel::desk_scale()
}

pub fn parse_config(text: &str) -> Result<RobotConfig, ConfigError> {
    let config: RobotConfig = toml::from_str(text)?;
    validate_config(&config)?;
    Ok(config)
}

pub fn validate_config(config: &RobotConfig) -> Result<(), ConfigError> {
    config.validate().map_err(|e| ConfigError::InvariantViolation {
        name: e.invariant_name().unwrap_or("geometry").to_string(),
        detail: e.to_string(),
    })
}

pub fn load_config(path: impl AsRef<Path>) -> Result<RobotConfig, ConfigError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
    parse_config(&text)
}

pub fn config_to_string(config: &RobotConfig) -> Result<String, ConfigError> {
    Ok(toml::to_string(config)?)
}

pub fn save_config(config: &RobotConfig, path: impl AsRef<Path>) -> Result<(), ConfigError> {
    let path = path.as_ref();
    fs::write(path, config_to_string(config)?).map_err(|source| ConfigError::Io { path: path.display().to_string(), source })
}

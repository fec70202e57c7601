//! Strict TOML configuration loading.

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;
use unruh_core::scenarios::ScenarioConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read config {path}: {source}")]
    ConfigIo {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error(transparent)]
    Compute(unruh_core::Error),

    #[error("output error: {0:#}")]
    Output(#[from] anyhow::Error),
}

impl From<unruh_core::Error> for CliError {
    fn from(e: unruh_core::Error) -> Self {
        match e {
            unruh_core::Error::Validation(msg) => Self::Validation(msg),
            other => Self::Compute(other),
        }
    }
}

impl CliError {
    /// 2 for usage and configuration problems, 1 for failed computations.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::ConfigIo { .. } | Self::Parse { .. } | Self::Validation(_) | Self::Usage(_) => 2,
            Self::Compute(_) | Self::Output(_) => 1,
        }
    }
}

/// Parses TOML text; unknown keys are errors.
pub fn parse_config_str(text: &str, origin: &Path) -> Result<ScenarioConfig, CliError> {
    let config: ScenarioConfig = toml::from_str(text).map_err(|e| CliError::Parse {
        path: origin.to_path_buf(),
        message: e.to_string().trim_end().to_string(),
    })?;
    config.validate()?;
    Ok(config)
}

/// Reads, parses and validates a configuration file. Relative table paths
/// are resolved against the file's directory.
pub fn parse_config(path: &Path) -> Result<ScenarioConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::ConfigIo {
        path: path.to_path_buf(),
        source,
    })?;
    let mut config = parse_config_str(&text, path)?;
    if let Some(dir) = path.parent() {
        config.resolve_paths(dir);
    }
    Ok(config)
}

pub fn to_toml(config: &ScenarioConfig) -> anyhow::Result<String> {
    Ok(toml::to_string(config)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ScenarioConfig, CliError> {
        parse_config_str(text, Path::new("test.toml"))
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse("a = 2.5e20\n[potential]\nkind = \"infinite_well\"\nL = 1e-7\n").unwrap();
        assert_eq!(c.levels, 4);
        assert_eq!(c.grid.points, 20_001);
        assert!(c.relaxation.enabled);
        assert_eq!(c.field, None);
    }

    #[test]
    fn negative_acceleration_names_invariant() {
        let e = parse("a = -1.0\n[potential]\nkind = \"infinite_well\"\nL = 1e-7\n").unwrap_err();
        assert!(matches!(&e, CliError::Validation(m) if m == "a > 0"), "{e}");
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn unknown_key_is_named() {
        let e = parse("a = 2.5e20\nomega_typo = 1.0\n[potential]\nkind = \"infinite_well\"\nL = 1e-7\n").unwrap_err();
        let msg = e.to_string();
        assert!(matches!(e, CliError::Parse { .. }));
        assert!(msg.contains("omega_typo"), "{msg}");
        assert!(msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn nested_unknown_key_is_rejected() {
        let e = parse("a = 2.5e20\n[potential]\nkind = \"infinite_well\"\nL = 1e-7\nwidth = 3\n").unwrap_err();
        assert!(e.to_string().contains("width"));
    }

    #[test]
    fn round_trip_is_identity() {
        let text = r#"
a = 2.5e20
B = 0.5
levels = 3
recenter = 5e-8

[potential]
kind = "double_well"
L = 1e-7
l = 1e-6
cancel_tilt = true

[grid]
points = 4001
padding = 6.0

[relaxation]
model = "heat_bath"
gamma0 = 1e8
initial_level = 2

[regime]
extent = 0.5
strict = true

[double_well]
degeneracy_threshold = 1e-4
solver = "single_grid"

[output]
format = "json"
states = true
"#;
        let c = parse(text).unwrap();
        let again = parse(&to_toml(&c).unwrap()).unwrap();
        assert_eq!(c, again);
        assert_eq!(again.mass, 9.109_383_701_5e-31);
        assert_eq!(to_toml(&again).unwrap(), to_toml(&c).unwrap());
    }
}

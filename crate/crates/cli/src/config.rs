//! Scenario files: TOML documents mirroring [`ScenarioConfig`]. Every key
//! is optional; unknown keys are errors.

use std::fs;
use std::path::Path;

use vcache::sim::ScenarioConfig;

use crate::error::{CliError, Result};

/// Reads, parses and validates a scenario file.
pub fn parse_config(path: &Path) -> Result<ScenarioConfig> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let config = parse_config_str(&text, path)?;
    config.validate().map_err(|source| CliError::Invalid {
        origin: path.display().to_string(),
        source,
    })?;
    Ok(config)
}

/// Parses without validating. `path` only labels diagnostics.
pub fn parse_config_str(text: &str, path: &Path) -> Result<ScenarioConfig> {
    let de = toml::Deserializer::new(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = match e.path().to_string() {
            p if p == "." => "(document)".to_string(),
            p => p,
        };
        let inner = e.inner();
        let (line, column) = inner
            .span()
            .map_or((1, 1), |span| line_column(text, span.start));
        CliError::Parse {
            path: path.to_path_buf(),
            line,
            column,
            field,
            message: inner.message().to_string(),
        }
    })
}

/// One-based line and column of a byte offset.
fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

/// The default scenario as a commented TOML document.
pub fn default_config_toml() -> String {
    toml::to_string_pretty(&ScenarioConfig::default()).expect("the default config serializes")
}

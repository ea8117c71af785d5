//! Declarative experiment descriptions read from JSON.

use crate::error::{Result, WickError};
use crate::stats::Workers;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use std::path::{Path, PathBuf};

/// Worker count as it appears in a config: a number or `"auto"`.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum WorkersField {
    Count(usize),
    Named(String),
}

impl WorkersField {
    pub fn resolve(&self) -> Result<Workers> {
        match self {
            WorkersField::Count(0) => Err(WickError::Config("workers must be positive".into())),
            WorkersField::Count(n) => Ok(Workers::Count(*n)),
            WorkersField::Named(s) => s.parse().map_err(WickError::Config),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub reps: Option<usize>,
    #[serde(default)]
    pub workers: Option<WorkersField>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Record wall times; when false the `wall_time_ms` column is zero so
    /// that reruns produce byte-identical files.
    #[serde(default = "default_timing")]
    pub timing: bool,
    #[serde(default)]
    pub params: serde_json::Value,
}

fn default_timing() -> bool {
    true
}

pub const DEFAULT_SEED: u64 = 20_240_601;

impl ExperimentConfig {
    pub fn named(experiment: &str) -> Self {
        Self {
            experiment: experiment.to_string(),
            seed: None,
            reps: None,
            workers: None,
            out: None,
            timing: true,
            params: serde_json::Value::Null,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| WickError::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| WickError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    /// Decodes the experiment parameters, with defaults for an absent record.
    pub fn params<T: DeserializeOwned + Default>(&self) -> Result<T> {
        match &self.params {
            serde_json::Value::Null => Ok(T::default()),
            v => serde_json::from_value(v.clone())
                .map_err(|e| WickError::Config(format!("params of {}: {e}", self.experiment))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_top_level_key_rejected() {
        let err = ExperimentConfig::from_json(r#"{"experiment":"gram","sed":1}"#).unwrap_err();
        assert!(matches!(err, WickError::Config(_)));
    }

    #[test]
    fn workers_forms() {
        let c = ExperimentConfig::from_json(r#"{"experiment":"gram","workers":"auto"}"#).unwrap();
        assert_eq!(c.workers.unwrap().resolve().unwrap(), Workers::Auto);
        let c = ExperimentConfig::from_json(r#"{"experiment":"gram","workers":4}"#).unwrap();
        assert_eq!(c.workers.unwrap().resolve().unwrap(), Workers::Count(4));
    }

    #[test]
    fn malformed_json_is_config_error() {
        assert!(matches!(
            ExperimentConfig::from_json("{\"experiment\": "),
            Err(WickError::Config(_))
        ));
    }
}

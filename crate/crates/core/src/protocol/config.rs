use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attacks::AttackConfig;
use crate::devices::ReceiverConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid configuration: {0}")]
    Parse(String),
    #[error("{0}")]
    Range(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvalidPolicy {
    /// A double click becomes a random key bit counted as an error.
    #[default]
    AsError,
    /// A double click is discarded like a lost photon.
    AsLoss,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    /// Probability that a pulse carries two photons instead of one.
    #[serde(default)]
    pub multi_photon_prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_rounds")]
    pub rounds: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub invalid_policy: InvalidPolicy,
    /// Fraction of the sifted key revealed to estimate the error rate.
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
    #[serde(default = "default_abort_qber")]
    pub abort_qber: f64,
    /// Per-photon loss probability between Alice and Eve.
    #[serde(default)]
    pub channel_loss: f64,
    #[serde(default)]
    pub attack: AttackConfig,
    #[serde(default)]
    pub source: SourceConfig,
    #[serde(default)]
    pub receiver: ReceiverConfig,
}

fn default_rounds() -> u64 {
    100_000
}

fn default_seed() -> u64 {
    1
}

fn default_test_fraction() -> f64 {
    0.5
}

fn default_abort_qber() -> f64 {
    0.10
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            rounds: default_rounds(),
            seed: default_seed(),
            invalid_policy: InvalidPolicy::default(),
            test_fraction: default_test_fraction(),
            abort_qber: default_abort_qber(),
            channel_loss: 0.0,
            attack: AttackConfig::default(),
            source: SourceConfig::default(),
            receiver: ReceiverConfig::default(),
        }
    }
}

impl RunConfig {
    /// Checks every numeric range. Attack/receiver compatibility is checked
    /// when the strategy is built.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let range = |msg: String| Err(ConfigError::Range(msg));
        if self.rounds == 0 {
            return range("rounds must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.abort_qber) {
            return range(format!("abort_qber must lie in [0,1], got {}", self.abort_qber));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return range(format!("test_fraction must lie in (0,1), got {}", self.test_fraction));
        }
        if !(0.0..1.0).contains(&self.channel_loss) {
            return range(format!("channel_loss must lie in [0,1), got {}", self.channel_loss));
        }
        let p2 = self.source.multi_photon_prob;
        if !(0.0..1.0).contains(&p2) {
            return range(format!("source.multi_photon_prob must lie in [0,1), got {p2}"));
        }
        Ok(())
    }

    /// Parses and validates TOML text. Unknown keys are rejected.
    pub fn from_toml(text: &str) -> Result<RunConfig, ConfigError> {
        let config: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configuration always serializes")
    }

    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        RunConfig::from_toml(&text)
    }
}

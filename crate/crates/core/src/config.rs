//! Run configuration shared by every subcommand.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classifier::{Optimizer, ReferenceEncoder, RemoteConfig, TrainConfig};
use crate::context::{BoundaryPolicy, Budget};
use crate::error::{Error, Result};
use crate::pipeline::{ContextOptions, WidthMode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Token window of the classifier input.
    pub window: usize,
    pub max_width: usize,
    pub max_message_size: usize,
    pub boundary_policy: BoundaryPolicy,
    /// Fixed hunk context instead of the adaptive search.
    pub constant_width: Option<usize>,
    pub positive_weight: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: Optimizer,
    pub encoder_dim: usize,
    /// Single source of randomness: training order and encoder hashing.
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    pub threads: usize,
    pub remote: Option<RemoteConfig>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            window: 2048,
            max_width: 5,
            max_message_size: 256,
            boundary_policy: BoundaryPolicy::Argmax,
            constant_width: None,
            positive_weight: 10.0,
            learning_rate: 1e-4,
            epochs: 10,
            batch_size: 4,
            optimizer: Optimizer::Sgd,
            encoder_dim: 4096,
            seed: 0,
            threads: 0,
            remote: None,
        }
    }
}

impl Config {
    /// Parse a `.json` file as JSON and anything else as TOML.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: Config = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        } else {
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_message_size > self.window {
            return Err(Error::Config(format!(
                "max_message_size {} exceeds window {}",
                self.max_message_size, self.window
            )));
        }
        if !(self.learning_rate > 0.0) || !(self.positive_weight > 0.0) {
            return Err(Error::Config("learning_rate and positive_weight must be positive".into()));
        }
        if self.batch_size == 0 || self.encoder_dim == 0 {
            return Err(Error::Config("batch_size and encoder_dim must be positive".into()));
        }
        Ok(())
    }

    pub fn context_options(&self) -> ContextOptions {
        ContextOptions {
            max_width: self.max_width,
            budget: Budget::from_window(self.window, self.max_message_size),
            policy: self.boundary_policy,
            width_mode: self.constant_width.map_or(WidthMode::Adaptive, WidthMode::Constant),
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            positive_weight: self.positive_weight,
            epochs: self.epochs,
            batch_size: self.batch_size,
            seed: self.seed,
            optimizer: self.optimizer,
        }
    }

    pub fn encoder(&self) -> ReferenceEncoder {
        ReferenceEncoder { dim: self.encoder_dim, orders: vec![1, 2, 3], seed: self.seed }
    }
}

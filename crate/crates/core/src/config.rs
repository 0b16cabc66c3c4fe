//! Run configuration: one TOML document naming the data files, the prior
//! parameters, the training hyperparameters and the sweep. Two presets ship
//! with the crate, `paper` (full scale) and `desk` (scaled down).
//!
//! Relative paths are taken relative to the working directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::SweepConfig;
use crate::rbm::TrainSpec;
use crate::rng::derive_seed;

const PAPER: &str = include_str!("../presets/paper.toml");
const DESK: &str = include_str!("../presets/desk.toml");

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    Paper,
    Desk,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Paper => "paper",
            Preset::Desk => "desk",
        }
    }

    pub fn source(self) -> &'static str {
        match self {
            Preset::Paper => PAPER,
            Preset::Desk => DESK,
        }
    }

    pub fn load(self) -> Result<RunConfig> {
        RunConfig::from_toml(self.source())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub mnist_train: PathBuf,
    pub mnist_test: PathBuf,
    /// Leading training images used for the RBM and the empirical baseline.
    pub n_train: usize,
    #[serde(default)]
    pub binarize_threshold: f64,
}

/// Slab mean and variance of the Gauss-Bernoulli prior.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlabConfig {
    pub mu: f64,
    pub sigma2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub n_hidden: usize,
    pub epochs: usize,
    pub lr: f64,
    pub weight_decay: f64,
    pub batch_size: usize,
    /// Images from the end of the test file used for per-epoch diagnostics.
    #[serde(default = "default_holdout")]
    pub holdout: usize,
}

fn default_holdout() -> usize {
    500
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsConfig {
    /// Model written by `train`.
    pub model_out: PathBuf,
    /// Model read by `sweep`.
    pub model_in: PathBuf,
    pub results_dir: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub data: DataConfig,
    pub slab: SlabConfig,
    pub train: TrainConfig,
    pub paths: PathsConfig,
    pub sweep: SweepConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::invalid("config", e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::invalid("config", e.to_string()))
    }

    /// Training hyperparameters with the seed derived from the run seed.
    pub fn train_spec(&self) -> TrainSpec {
        TrainSpec {
            n_hidden: self.train.n_hidden,
            epochs: self.train.epochs,
            lr: self.train.lr,
            weight_decay: self.train.weight_decay,
            batch_size: self.train.batch_size,
            seed: derive_seed(self.seed, "train"),
        }
    }

    /// The sweep with its seed taken from the run seed.
    pub fn sweep_config(&self) -> SweepConfig {
        SweepConfig {
            seed: derive_seed(self.seed, "sweep"),
            ..self.sweep.clone()
        }
    }

    /// Value checks that need no file access.
    pub fn validate(&self) -> Result<()> {
        if self.data.n_train == 0 {
            return Err(Error::invalid("data.n_train", "must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.data.binarize_threshold) {
            return Err(Error::invalid("data.binarize_threshold", "outside [0, 1)"));
        }
        if !self.slab.mu.is_finite() {
            return Err(Error::NonFinite { what: "slab.mu" });
        }
        if !(self.slab.sigma2 > 0.0 && self.slab.sigma2.is_finite()) {
            return Err(Error::invalid("slab.sigma2", "must be a positive variance"));
        }
        if self.train.holdout == 0 {
            return Err(Error::invalid("train.holdout", "must be at least 1"));
        }
        self.train_spec().validate()?;
        self.sweep_config().validate()
    }
}

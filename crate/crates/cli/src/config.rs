//! Flat key-value run configuration: CLI flags override the config file,
//! which overrides built-in defaults.

use std::path::Path;

use hnn_core::bench::TabularConfig;
use hnn_core::timeseries::ForecastConfig;
use hnn_core::{Error, Result};
use serde::Deserialize;

use crate::args::TrainFlags;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub architecture: Option<String>,
    pub similarity: Option<String>,
    pub learning_rate: Option<f64>,
    pub optimizer: Option<String>,
    pub batch_size: Option<usize>,
    pub max_epochs: Option<usize>,
    pub patience: Option<usize>,
    pub seed: Option<u64>,
    pub init: Option<String>,
    pub l2: Option<f64>,
    pub activation: Option<String>,
    pub channels: Option<usize>,
    pub valid_fraction: Option<f64>,
    pub test_fraction: Option<f64>,
    pub split_seed: Option<u64>,
    pub train_fraction: Option<f64>,
    pub lookback: Option<usize>,
    pub horizon: Option<usize>,
    pub hidden: Option<usize>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {}", path.display(), e.message())))
    }
}

fn parse<T: std::str::FromStr<Err = Error>>(v: Option<&String>) -> Result<Option<T>> {
    v.map(|s| s.parse()).transpose()
}

/// Fills the shared training fields of both run configs.
macro_rules! pick {
    ($flag:expr, $file:expr, $target:expr) => {
        if let Some(v) = $flag.clone().or($file.clone()) {
            $target = v;
        }
    };
}

fn apply_train(flags: &TrainFlags, file: &FileConfig, t: &mut hnn_core::hnn::TrainConfig) -> Result<()> {
    pick!(flags.learning_rate, file.learning_rate, t.learning_rate);
    pick!(flags.batch_size, file.batch_size, t.batch_size);
    pick!(flags.max_epochs, file.max_epochs, t.max_epochs);
    pick!(flags.patience, file.patience, t.patience);
    pick!(flags.seed, file.seed, t.seed);
    pick!(flags.l2, file.l2, t.l2);
    pick!(flags.channels, file.channels, t.channels);
    if let Some(v) = parse(flags.optimizer.as_ref().or(file.optimizer.as_ref()))? {
        t.optimizer = v;
    }
    if let Some(v) = parse(flags.init.as_ref().or(file.init.as_ref()))? {
        t.init = v;
    }
    if let Some(v) = parse(flags.activation.as_ref().or(file.activation.as_ref()))? {
        t.activation = v;
    }
    t.validate()
}

pub fn tabular_config(
    flags: &TrainFlags,
    test_fraction: Option<f64>,
    split_seed: Option<u64>,
) -> Result<(TabularConfig, hnn_core::hnn::Architecture)> {
    let file = FileConfig::load(flags.config.as_deref())?;
    for (key, set) in [("train_fraction", file.train_fraction.is_some()), ("lookback", file.lookback.is_some()), ("horizon", file.horizon.is_some()), ("hidden", file.hidden.is_some())] {
        if set {
            return Err(Error::Config(format!("{key} does not apply to tabular runs")));
        }
    }
    let mut cfg = TabularConfig::default();
    apply_train(flags, &file, &mut cfg.train)?;
    pick!(test_fraction, file.test_fraction, cfg.test_fraction);
    pick!(split_seed, file.split_seed, cfg.split_seed);
    pick!(flags.valid_fraction, file.valid_fraction, cfg.valid_fraction);
    if let Some(v) = parse(flags.similarity.as_ref().or(file.similarity.as_ref()))? {
        cfg.similarity = v;
    }
    let arch = parse(flags.architecture.as_ref().or(file.architecture.as_ref()))?.unwrap_or(hnn_core::hnn::Architecture::Hnn);
    Ok((cfg, arch))
}

pub struct TsOverrides {
    pub lookback: Option<usize>,
    pub horizon: Option<usize>,
    pub hidden: Option<usize>,
    pub train_fraction: Option<f64>,
}

pub fn forecast_config(flags: &TrainFlags, o: &TsOverrides) -> Result<ForecastConfig> {
    let file = FileConfig::load(flags.config.as_deref())?;
    for (key, set) in [("test_fraction", file.test_fraction.is_some()), ("split_seed", file.split_seed.is_some())] {
        if set {
            return Err(Error::Config(format!("{key} does not apply to forecasting runs")));
        }
    }
    let mut cfg = ForecastConfig::default();
    apply_train(flags, &file, &mut cfg.train)?;
    pick!(o.lookback, file.lookback, cfg.lookback);
    pick!(o.horizon, file.horizon, cfg.horizon);
    pick!(o.hidden, file.hidden, cfg.hidden);
    pick!(o.train_fraction, file.train_fraction, cfg.split.train);
    pick!(flags.valid_fraction, file.valid_fraction, cfg.split.valid);
    if let Some(v) = parse(flags.similarity.as_ref().or(file.similarity.as_ref()))? {
        cfg.similarity = v;
    }
    if let Some(v) = parse(flags.architecture.as_ref().or(file.architecture.as_ref()))? {
        cfg.architecture = v;
    }
    if cfg.hidden == 0 {
        return Err(Error::Config("hidden size must be at least 1".into()));
    }
    Ok(cfg)
}

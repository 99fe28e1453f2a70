//! Tabular ablation: one TMFG per dataset, every variant trained on the
//! same split and scored by test R².

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::baselines::LinearRegression;
use super::metrics::r2_score;
use crate::corr::{mean_std, pearson_similarity, zscore, Dataset, NormalizationStats, SimilarityVariant};
use crate::error::{Error, Result};
use crate::hnn::{train, Architecture, HnnModel, History, Samples, TargetScale, TrainConfig};
use crate::homology::HasseDiagram;
use crate::tmfg::{tmfg_construct, ChordalGraph};

/// Hyperparameter grid searched on the validation split. Empty lists fall
/// back to the base training config.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Grid {
    pub learning_rates: Vec<f64>,
    pub channels: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TabularConfig {
    /// Fraction of rows held out for testing.
    pub test_fraction: f64,
    /// Fraction of the remaining rows used for early stopping.
    pub valid_fraction: f64,
    pub split_seed: u64,
    pub similarity: SimilarityVariant,
    pub train: TrainConfig,
    pub grid: Grid,
}

impl Default for TabularConfig {
    fn default() -> Self {
        TabularConfig {
            test_fraction: 0.3,
            valid_fraction: 0.2,
            split_seed: 0,
            similarity: SimilarityVariant::Absolute,
            train: TrainConfig::default(),
            grid: Grid::default(),
        }
    }
}

/// Models compared on each dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationSpec {
    pub variants: Vec<Architecture>,
    /// Also fit ordinary least squares as a reference row.
    pub include_linear: bool,
}

impl Default for AblationSpec {
    fn default() -> Self {
        AblationSpec {
            variants: Architecture::ALL.to_vec(),
            include_linear: true,
        }
    }
}

/// Standardized splits plus the graph built from the training rows.
#[derive(Debug, Clone)]
pub struct PreparedTabular {
    pub train: Samples,
    pub valid: Samples,
    pub test: Samples,
    /// Test targets on the original scale.
    pub test_target: Vec<f64>,
    pub normalization: NormalizationStats,
    pub target_scale: TargetScale,
    pub graph: ChordalGraph,
    pub diagram: HasseDiagram,
}

impl PreparedTabular {
    pub fn unscale(&self, pred: &[Vec<f64>]) -> Vec<f64> {
        pred.iter().map(|r| r[0] * self.target_scale.std + self.target_scale.mean).collect()
    }
}

/// Shuffles rows with `cfg.split_seed`, holds out the test fraction and
/// fits normalization, target scaling and the TMFG on the remaining rows.
pub fn prepare_tabular(ds: &Dataset, cfg: &TabularConfig) -> Result<PreparedTabular> {
    let y = ds.target().ok_or_else(|| Error::Config("dataset has no target column".into()))?;
    if !(cfg.test_fraction > 0.0 && cfg.test_fraction < 1.0 && (0.0..1.0).contains(&cfg.valid_fraction)) {
        return Err(Error::Config("split fractions must lie in (0, 1)".into()));
    }
    let n = ds.n_rows();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.split_seed));
    let n_test = (n as f64 * cfg.test_fraction).round() as usize;
    let (test_idx, fit_idx) = order.split_at(n_test);
    let n_valid = (fit_idx.len() as f64 * cfg.valid_fraction).round() as usize;
    if n_test == 0 || n_valid == 0 || fit_idx.len() - n_valid < 3 {
        return Err(Error::Degenerate(format!("{n} rows are too few for the requested splits")));
    }

    let fit = ds.select_rows(fit_idx);
    let (fit_z, normalization) = zscore(&fit)?;
    let w = pearson_similarity(&fit_z, cfg.similarity)?;
    let (graph, _) = tmfg_construct(&w)?;
    let diagram = HasseDiagram::from_graph(&graph)?;

    let fit_y: Vec<f64> = fit_idx.iter().map(|&i| y[i]).collect();
    let (mean, std) = mean_std(&fit_y);
    if std == 0.0 {
        return Err(Error::ConstantColumn("target".into()));
    }
    let target_scale = TargetScale { mean, std };
    let scaled = |idx: &[usize]| -> Result<Samples> {
        let part = normalization.apply(&ds.select_rows(idx))?;
        Samples::scalar(part.rows(), &idx.iter().map(|&i| (y[i] - mean) / std).collect::<Vec<_>>())
    };
    let (train_idx, valid_idx) = fit_idx.split_at(fit_idx.len() - n_valid);
    Ok(PreparedTabular {
        train: scaled(train_idx)?,
        valid: scaled(valid_idx)?,
        test: scaled(test_idx)?,
        test_target: test_idx.iter().map(|&i| y[i]).collect(),
        normalization,
        target_scale,
        graph,
        diagram,
    })
}

/// Trains one variant, searching the grid on validation loss.
pub fn fit_variant(prep: &PreparedTabular, arch: Architecture, cfg: &TabularConfig) -> Result<(HnnModel, History, TrainConfig)> {
    let lrs = if cfg.grid.learning_rates.is_empty() { vec![cfg.train.learning_rate] } else { cfg.grid.learning_rates.clone() };
    let chans = if cfg.grid.channels.is_empty() { vec![cfg.train.channels] } else { cfg.grid.channels.clone() };
    let mut best: Option<(HnnModel, History, TrainConfig)> = None;
    for &learning_rate in &lrs {
        for &channels in &chans {
            let tc = TrainConfig {
                learning_rate,
                channels,
                ..cfg.train
            };
            let init = HnnModel::build(&prep.diagram, arch, &tc, 1)?;
            let (m, h) = match train(&init, &prep.train, &prep.valid, &tc) {
                Ok(r) => r,
                Err(e @ Error::Diverged { .. }) if lrs.len() * chans.len() > 1 => {
                    log::warn!("{arch} lr={learning_rate} channels={channels}: {e}");
                    continue;
                }
                Err(e) => return Err(e),
            };
            if best.as_ref().is_none_or(|b| h.best_valid_loss < b.1.best_valid_loss) {
                best = Some((m, h, tc));
            }
        }
    }
    best.ok_or_else(|| Error::Degenerate(format!("every grid point diverged for {arch}")))
}

/// Score of one model on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantResult {
    pub model: String,
    pub r2: f64,
    pub n_params: usize,
    pub learning_rate: Option<f64>,
    pub channels: Option<usize>,
    pub epochs_run: usize,
    pub best_epoch: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabularRun {
    pub dataset_hash: String,
    pub diagram_hash: String,
    pub n_train: usize,
    pub n_valid: usize,
    pub n_test: usize,
    pub results: Vec<VariantResult>,
}

impl TabularRun {
    pub fn r2_of(&self, model: &str) -> Option<f64> {
        self.results.iter().find(|r| r.model == model).map(|r| r.r2)
    }
}

/// Runs every variant of the ablation on one dataset.
pub fn run_tabular_experiment(ds: &Dataset, spec: &AblationSpec, cfg: &TabularConfig) -> Result<TabularRun> {
    let prep = prepare_tabular(ds, cfg)?;
    let mut results = spec
        .variants
        .par_iter()
        .map(|&arch| {
            let (m, h, tc) = fit_variant(&prep, arch, cfg)?;
            let pred = prep.unscale(&m.predict(&prep.test.x)?);
            Ok(VariantResult {
                model: arch.name().to_string(),
                r2: r2_score(&prep.test_target, &pred)?,
                n_params: m.n_params(),
                learning_rate: Some(tc.learning_rate),
                channels: Some(tc.channels),
                epochs_run: h.epochs.len(),
                best_epoch: h.best_epoch,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if spec.include_linear {
        let y: Vec<f64> = prep.train.y.iter().chain(&prep.valid.y).map(|r| r[0]).collect();
        let x: Vec<Vec<f64>> = prep.train.x.iter().chain(&prep.valid.x).cloned().collect();
        let lm = LinearRegression::fit(&x, &y, true)?;
        let pred: Vec<Vec<f64>> = lm.predict(&prep.test.x).into_iter().map(|v| vec![v]).collect();
        results.push(VariantResult {
            model: "linear".into(),
            r2: r2_score(&prep.test_target, &prep.unscale(&pred))?,
            n_params: lm.coefficients.len() + 1,
            learning_rate: None,
            channels: None,
            epochs_run: 0,
            best_epoch: 0,
        });
    }
    Ok(TabularRun {
        dataset_hash: ds.content_hash(),
        diagram_hash: prep.diagram.content_hash(),
        n_train: prep.train.len(),
        n_valid: prep.valid.len(),
        n_test: prep.test.len(),
        results,
    })
}

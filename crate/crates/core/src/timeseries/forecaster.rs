use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lstm::{LstmEncoder, LstmTrace};
use super::series::{MultivariateSeries, SeriesScaler, SplitFractions, WindowSplits, WindowedSeries};
use crate::bench::metrics;
use crate::corr::{pearson_similarity, Column, Dataset, SimilarityVariant};
use crate::error::{Error, Result};
use crate::hnn::{Architecture, EpochRecord, HnnModel, History, Optimizer, TrainConfig};
use crate::homology::HasseDiagram;
use crate::tmfg::{tmfg_construct, ChordalGraph};

/// Settings of the LSTM + sparse-unit forecaster.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ForecastConfig {
    pub lookback: usize,
    pub horizon: usize,
    pub hidden: usize,
    pub split: SplitFractions,
    pub architecture: Architecture,
    pub similarity: SimilarityVariant,
    pub train: TrainConfig,
}

impl Default for ForecastConfig {
    fn default() -> Self {
        ForecastConfig {
            lookback: 24,
            horizon: 3,
            hidden: 64,
            split: SplitFractions::default(),
            architecture: Architecture::Hnn,
            similarity: SimilarityVariant::Absolute,
            train: TrainConfig::default(),
        }
    }
}

/// TMFG and Hasse diagram of the series, estimated from timesteps
/// `< train_end` only.
pub fn build_series_graph(
    s: &MultivariateSeries,
    train_end: usize,
    variant: SimilarityVariant,
) -> Result<(ChordalGraph, HasseDiagram)> {
    let train = s.slice(0..train_end.min(s.len()));
    let columns = (0..train.n_series())
        .map(|k| Column::new(train.names()[k].clone(), train.series(k).to_vec()))
        .collect();
    let w = pearson_similarity(&Dataset::new(columns, None)?, variant)?;
    let (g, _) = tmfg_construct(&w)?;
    let h = HasseDiagram::from_graph(&g)?;
    Ok((g, h))
}

/// Shared LSTM encoder, shared hidden-to-scalar projection, and a sparse
/// aggregation unit with one readout head per series.
#[derive(Debug, Clone, PartialEq)]
pub struct Forecaster {
    pub lstm: LstmEncoder,
    /// `hidden` projection weights followed by one bias.
    pub projection: Vec<f64>,
    pub head: HnnModel,
}

struct SampleTrace {
    lstm: Vec<LstmTrace>,
    pre: Vec<f64>,
    act: Vec<f64>,
    out: Vec<f64>,
}

impl Forecaster {
    pub fn new(diagram: &HasseDiagram, n_series: usize, cfg: &ForecastConfig) -> Result<Self> {
        if diagram.p() != n_series {
            return Err(Error::Dimension(format!(
                "diagram has {} vertices but there are {n_series} series",
                diagram.p()
            )));
        }
        let seed = cfg.train.seed;
        let lstm = LstmEncoder::new(cfg.hidden, seed)?;
        let k = 1.0 / (cfg.hidden as f64).sqrt();
        let dist = Uniform::new_inclusive(-k, k).expect("finite bound");
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
        let mut projection: Vec<f64> = (0..cfg.hidden).map(|_| dist.sample(&mut rng)).collect();
        projection.push(0.0);
        let head_cfg = TrainConfig {
            seed: seed.wrapping_add(2),
            ..cfg.train
        };
        let head = HnnModel::build(diagram, cfg.architecture, &head_cfg, n_series)?;
        Ok(Forecaster { lstm, projection, head })
    }

    pub fn n_series(&self) -> usize {
        self.head.input_width()
    }

    pub fn n_params(&self) -> usize {
        self.lstm.n_params() + self.projection.len() + self.head.n_params()
    }

    /// All parameters as `lstm | projection | head`.
    pub fn params(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.n_params());
        v.extend_from_slice(self.lstm.params());
        v.extend_from_slice(&self.projection);
        v.extend_from_slice(self.head.params());
        v
    }

    pub fn set_params(&mut self, p: &[f64]) -> Result<()> {
        if p.len() != self.n_params() {
            return Err(Error::Dimension(format!("{} parameters for a model of {}", p.len(), self.n_params())));
        }
        let (a, rest) = p.split_at(self.lstm.n_params());
        let (b, c) = rest.split_at(self.projection.len());
        self.lstm.params_mut().copy_from_slice(a);
        self.projection.copy_from_slice(b);
        self.head.params_mut().copy_from_slice(c);
        Ok(())
    }

    fn check_window(&self, window: &[Vec<f64>]) -> Result<()> {
        if window.len() != self.n_series() {
            return Err(Error::Dimension(format!(
                "window has {} series, model expects {}",
                window.len(),
                self.n_series()
            )));
        }
        if window.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("forecast window".into()));
        }
        Ok(())
    }

    fn trace(&self, window: &[Vec<f64>]) -> SampleTrace {
        let h = self.lstm.hidden();
        let lstm: Vec<LstmTrace> = window.iter().map(|w| self.lstm.run(w)).collect();
        let z: Vec<f64> = lstm
            .iter()
            .map(|t| {
                let hs = t.last_hidden();
                self.projection[h] + self.projection[..h].iter().zip(hs).map(|(w, v)| w * v).sum::<f64>()
            })
            .collect();
        let n = self.head.topology().total_neurons();
        let mut st = SampleTrace {
            lstm,
            pre: vec![0.0; n],
            act: vec![0.0; n],
            out: vec![0.0; self.n_series()],
        };
        self.head.forward_sample(&z, &mut st.pre, &mut st.act, &mut st.out);
        st
    }

    /// Forecast of every series for one window (standardized scale).
    pub fn forward(&self, window: &[Vec<f64>]) -> Result<Vec<f64>> {
        self.check_window(window)?;
        Ok(self.trace(window).out)
    }

    /// Standardized forecasts for every sample.
    pub fn predict(&self, ws: &WindowedSeries) -> Result<Vec<Vec<f64>>> {
        for w in &ws.samples {
            self.check_window(&w.window)?;
        }
        Ok(ws.samples.par_iter().map(|w| self.trace(&w.window).out).collect())
    }

    /// MSE over `idx` and its gradient in [`Forecaster::params`] order.
    pub fn mse_grad_on(&self, ws: &WindowedSeries, idx: &[usize]) -> (f64, Vec<f64>) {
        let n_out = self.n_series();
        let (nl, np) = (self.lstm.n_params(), self.projection.len());
        let total = self.n_params();
        let hid = self.lstm.hidden();
        let scale = 1.0 / (idx.len() * n_out) as f64;
        let shards: Vec<(f64, Vec<f64>)> = idx
            .par_chunks(8)
            .map(|chunk| {
                let mut grad = vec![0.0; total];
                let mut dact = vec![0.0; self.head.topology().total_neurons()];
                let mut dout = vec![0.0; n_out];
                let mut loss = 0.0;
                for &s in chunk {
                    let w = &ws.samples[s];
                    let st = self.trace(&w.window);
                    for o in 0..n_out {
                        let r = st.out[o] - w.target[o];
                        loss += r * r;
                        dout[o] = 2.0 * r * scale;
                    }
                    let (g_lstm, rest) = grad.split_at_mut(nl);
                    let (g_proj, g_head) = rest.split_at_mut(np);
                    self.head.backward_sample(&st.pre, &st.act, &dout, g_head, &mut dact);
                    for (k, tr) in st.lstm.iter().enumerate() {
                        let dz = dact[k];
                        if dz == 0.0 {
                            continue;
                        }
                        let hs = tr.last_hidden();
                        for j in 0..hid {
                            g_proj[j] += dz * hs[j];
                        }
                        g_proj[hid] += dz;
                        let dh: Vec<f64> = self.projection[..hid].iter().map(|w| w * dz).collect();
                        self.lstm.backward(tr, &dh, g_lstm);
                    }
                }
                (loss, grad)
            })
            .collect();
        let loss = shards.iter().map(|s| s.0).sum::<f64>() * scale;
        let mut grad = vec![0.0; total];
        for (_, g) in shards {
            for (a, b) in grad.iter_mut().zip(g) {
                *a += b;
            }
        }
        (loss, grad)
    }

    pub fn mse(&self, ws: &WindowedSeries) -> Result<f64> {
        let pred = self.predict(ws)?;
        Ok(crate::hnn::mse(&pred, &ws.targets()))
    }
}

/// Standalone composite forward on one window.
pub fn lstm_hnn_forward(
    encoder: &LstmEncoder,
    head: &HnnModel,
    projection: &[f64],
    window: &[Vec<f64>],
) -> Result<Vec<f64>> {
    if projection.len() != encoder.hidden() + 1 {
        return Err(Error::Dimension(format!(
            "projection has {} entries, expected {}",
            projection.len(),
            encoder.hidden() + 1
        )));
    }
    let f = Forecaster {
        lstm: encoder.clone(),
        projection: projection.to_vec(),
        head: head.clone(),
    };
    f.forward(window)
}

/// RSE and CORR of forecasts on the original scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecastScores {
    pub rse: f64,
    pub corr: f64,
}

/// Forecasts mapped back to the original scale, as `[sample][series]`.
pub fn predict_original(f: &Forecaster, ws: &WindowedSeries, scaler: &SeriesScaler) -> Result<Vec<Vec<f64>>> {
    Ok(f.predict(ws)?.iter().map(|r| scaler.inverse_row(r)).collect())
}

pub fn evaluate(f: &Forecaster, ws: &WindowedSeries, scaler: &SeriesScaler) -> Result<ForecastScores> {
    let pred = predict_original(f, ws, scaler)?;
    let truth: Vec<Vec<f64>> = ws.targets().iter().map(|r| scaler.inverse_row(r)).collect();
    Ok(ForecastScores {
        rse: metrics::rse(&truth, &pred)?,
        corr: metrics::corr_metric(&truth, &pred)?,
    })
}

/// Joint training of encoder, projection and head with Adam (or SGD), early
/// stopping on validation RSE. Returns the best snapshot and the history,
/// whose `valid_loss` column holds validation RSE.
pub fn train_forecaster(f: &Forecaster, splits: &WindowSplits, cfg: &TrainConfig) -> Result<(Forecaster, History)> {
    cfg.validate()?;
    if splits.train.is_empty() || splits.valid.is_empty() {
        return Err(Error::Empty("training and validation windows must be non-empty".into()));
    }
    let mut model = f.clone();
    let mut params = model.params();
    let (nl, np) = (model.lstm.n_params(), model.projection.len());
    let [links, _, readout, _] = model.head.param_groups();
    let decay: Vec<bool> = (0..params.len())
        .map(|i| {
            if i < nl {
                i < model.lstm.bias_index(0)
            } else if i < nl + np {
                i < nl + np - 1
            } else {
                let j = i - nl - np;
                links.contains(&j) || readout.contains(&j)
            }
        })
        .collect();
    let mut opt = Optimizer::new(cfg.optimizer, cfg.learning_rate, cfg.l2, params.len());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x7153_e41e5);
    let mut order: Vec<usize> = (0..splits.train.len()).collect();
    let mut history = History::default();
    let mut best = model.clone();
    let mut stale = 0;

    for epoch in 1..=cfg.max_epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let (loss, grad) = model.mse_grad_on(&splits.train, batch);
            if !loss.is_finite() {
                return Err(Error::Diverged { epoch, loss });
            }
            total += loss * batch.len() as f64;
            opt.step(&mut params, &grad, &decay);
            model.set_params(&params)?;
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Diverged { epoch, loss: f64::NAN });
        }
        let train_loss = total / splits.train.len() as f64;
        let valid_rse = evaluate(&model, &splits.valid, &splits.scaler)?.rse;
        if !valid_rse.is_finite() {
            return Err(Error::Diverged { epoch, loss: valid_rse });
        }
        log::debug!("epoch {epoch}: train mse {train_loss:.5} valid rse {valid_rse:.5}");
        if history.record(EpochRecord {
            epoch,
            train_loss,
            valid_loss: valid_rse,
        }) {
            best = model.clone();
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.patience {
                break;
            }
        }
    }
    Ok((best, history))
}

pub const FORECAST_CHECKPOINT_FORMAT: &str = "hnn-forecaster";

/// Versioned JSON snapshot of a trained forecaster and its scaling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForecastCheckpoint {
    pub format: String,
    pub version: u32,
    pub config: ForecastConfig,
    pub diagram_hash: String,
    pub n_series: usize,
    pub scaler: SeriesScaler,
    pub params: Vec<f64>,
}

impl ForecastCheckpoint {
    pub fn new(f: &Forecaster, diagram: &HasseDiagram, cfg: &ForecastConfig, scaler: &SeriesScaler) -> Self {
        ForecastCheckpoint {
            format: FORECAST_CHECKPOINT_FORMAT.into(),
            version: crate::hnn::CHECKPOINT_VERSION,
            config: *cfg,
            diagram_hash: diagram.content_hash(),
            n_series: f.n_series(),
            scaler: scaler.clone(),
            params: f.params(),
        }
    }

    /// Rebuilds the forecaster; the diagram must be the one it was trained on.
    pub fn restore(&self, diagram: &HasseDiagram) -> Result<Forecaster> {
        if self.format != FORECAST_CHECKPOINT_FORMAT || self.version != crate::hnn::CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!("unsupported format {} v{}", self.format, self.version)));
        }
        if diagram.content_hash() != self.diagram_hash {
            return Err(Error::Checkpoint("diagram hash differs from the one used in training".into()));
        }
        let mut f = Forecaster::new(diagram, self.n_series, &self.config)?;
        f.set_params(&self.params)?;
        Ok(f)
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, serde_json::to_string(self)?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

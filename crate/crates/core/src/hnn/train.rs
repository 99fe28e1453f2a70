use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::{check_targets, Activation, HnnModel};
use crate::error::{Error, Result};

/// Weight initialization. Biases always start at zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitScheme {
    /// Uniform in ±sqrt(6 / (fan_in + fan_out)), fans counted on actual links.
    #[default]
    XavierUniform,
    /// Uniform in ±sqrt(6 / fan_in).
    HeUniform,
    Zeros,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    #[default]
    Adam,
}

impl std::str::FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sgd" => Ok(OptimizerKind::Sgd),
            "adam" => Ok(OptimizerKind::Adam),
            other => Err(Error::Config(format!("unknown optimizer {other:?}"))),
        }
    }
}

impl std::str::FromStr for InitScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "xavier_uniform" => Ok(InitScheme::XavierUniform),
            "he_uniform" => Ok(InitScheme::HeUniform),
            "zeros" => Ok(InitScheme::Zeros),
            other => Err(Error::Config(format!("unknown init scheme {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub optimizer: OptimizerKind,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    pub seed: u64,
    pub init: InitScheme,
    pub l2: f64,
    pub activation: Activation,
    /// Neurons per simplex above the input layer.
    pub channels: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            optimizer: OptimizerKind::Adam,
            batch_size: 32,
            max_epochs: 200,
            patience: 20,
            seed: 42,
            init: InitScheme::XavierUniform,
            l2: 0.0,
            activation: Activation::Relu,
            channels: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!("learning rate must be positive, got {}", self.learning_rate)));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        if self.channels == 0 {
            return Err(Error::Config("channel multiplier must be at least 1".into()));
        }
        if !(self.l2 >= 0.0) {
            return Err(Error::Config("l2 penalty must be non-negative".into()));
        }
        Ok(())
    }
}

/// First-order optimizer over a flat parameter vector.
#[derive(Debug, Clone)]
pub struct Optimizer {
    kind: OptimizerKind,
    lr: f64,
    l2: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, lr: f64, l2: f64, n: usize) -> Self {
        Optimizer {
            kind,
            lr,
            l2,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    /// One update. `decay[i]` selects which parameters receive the L2 term.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64], decay: &[bool]) {
        self.t += 1;
        let (b1, b2) = (self.beta1, self.beta2);
        let c1 = 1.0 - b1.powi(self.t);
        let c2 = 1.0 - b2.powi(self.t);
        for i in 0..params.len() {
            let g = grad[i] + if decay[i] { self.l2 * params[i] } else { 0.0 };
            match self.kind {
                OptimizerKind::Sgd => params[i] -= self.lr * g,
                OptimizerKind::Adam => {
                    self.m[i] = b1 * self.m[i] + (1.0 - b1) * g;
                    self.v[i] = b2 * self.v[i] + (1.0 - b2) * g * g;
                    params[i] -= self.lr * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + self.eps);
                }
            }
        }
    }
}

/// Inputs and targets for supervised training.
#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<Vec<f64>>,
}

impl Samples {
    pub fn new(x: Vec<Vec<f64>>, y: Vec<Vec<f64>>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Dimension(format!("{} inputs but {} targets", x.len(), y.len())));
        }
        Ok(Samples { x, y })
    }

    /// Scalar-target convenience constructor.
    pub fn scalar(x: Vec<Vec<f64>>, y: &[f64]) -> Result<Self> {
        Samples::new(x, y.iter().map(|&v| vec![v]).collect())
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn subset(&self, idx: &[usize]) -> Samples {
        Samples {
            x: idx.iter().map(|&i| self.x[i].clone()).collect(),
            y: idx.iter().map(|&i| self.y[i].clone()).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub valid_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct History {
    pub epochs: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub best_valid_loss: f64,
}

impl History {
    /// Best-so-far bookkeeping; returns true when `r` improves on it.
    pub fn record(&mut self, r: EpochRecord) -> bool {
        let improved = self.epochs.is_empty() || r.valid_loss < self.best_valid_loss;
        if improved {
            self.best_epoch = r.epoch;
            self.best_valid_loss = r.valid_loss;
        }
        self.epochs.push(r);
        improved
    }

    /// `epoch,train_loss,valid_loss` CSV.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["epoch", "train_loss", "valid_loss"])?;
        for r in &self.epochs {
            wtr.write_record([r.epoch.to_string(), r.train_loss.to_string(), r.valid_loss.to_string()])?;
        }
        wtr.flush().map_err(|e| Error::io("<history>", e))?;
        Ok(())
    }
}

/// Mini-batch gradient descent on mean squared error with early stopping.
///
/// Batches are reshuffled every epoch from a generator seeded by
/// `cfg.seed`; the returned model is the snapshot with the lowest
/// validation loss.
pub fn train(model: &HnnModel, train_set: &Samples, valid_set: &Samples, cfg: &TrainConfig) -> Result<(HnnModel, History)> {
    cfg.validate()?;
    if train_set.is_empty() || valid_set.is_empty() {
        return Err(Error::Empty("training and validation sets must be non-empty".into()));
    }
    for set in [train_set, valid_set] {
        check_targets(&set.y, set.x.len(), model.output_dim())?;
        if let Some(s) = set.x.iter().position(|r| r.len() != model.input_width()) {
            return Err(Error::Dimension(format!("sample {s} has width {}, expected {}", set.x[s].len(), model.input_width())));
        }
    }

    let mut m = model.clone();
    let [links, _, readout, _] = m.param_groups();
    let decay: Vec<bool> = (0..m.n_params()).map(|i| links.contains(&i) || readout.contains(&i)).collect();
    let mut opt = Optimizer::new(cfg.optimizer, cfg.learning_rate, cfg.l2, m.n_params());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_0f_ba7c4);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut history = History::default();
    let mut best = m.clone();
    let mut stale = 0usize;

    for epoch in 1..=cfg.max_epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let (loss, grad) = m.mse_grad_on(&train_set.x, &train_set.y, batch);
            if !loss.is_finite() {
                return Err(Error::Diverged { epoch, loss });
            }
            total += loss * batch.len() as f64;
            opt.step(m.params_mut(), &grad.values, &decay);
        }
        let train_loss = total / train_set.len() as f64;
        if m.params().iter().any(|p| !p.is_finite()) {
            return Err(Error::Diverged { epoch, loss: f64::NAN });
        }
        let valid_loss = m.mse(&valid_set.x, &valid_set.y)?;
        if !valid_loss.is_finite() {
            return Err(Error::Diverged { epoch, loss: valid_loss });
        }
        log::debug!("epoch {epoch}: train {train_loss:.6e} valid {valid_loss:.6e}");
        if history.record(EpochRecord {
            epoch,
            train_loss,
            valid_loss,
        }) {
            best = m.clone();
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

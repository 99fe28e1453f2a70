use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::{Activation, HnnModel};
use super::topology::Architecture;
use super::train::TrainConfig;
use crate::corr::NormalizationStats;
use crate::error::{Error, Result};
use crate::homology::HasseDiagram;

pub const CHECKPOINT_FORMAT: &str = "hnn-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Mean and standard deviation used to standardize a scalar target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetScale {
    pub mean: f64,
    pub std: f64,
}

/// Versioned JSON snapshot of a trained model. Parameters are stored with
/// shortest round-trip formatting, so a reload is bit-identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub diagram_hash: String,
    pub architecture: Architecture,
    pub channels: usize,
    pub activation: Activation,
    pub output_dim: usize,
    pub config: TrainConfig,
    pub params: Vec<f64>,
    #[serde(default)]
    pub normalization: Option<NormalizationStats>,
    #[serde(default)]
    pub target_scale: Option<TargetScale>,
}

impl Checkpoint {
    pub fn new(model: &HnnModel, config: &TrainConfig) -> Result<Self> {
        let (Some(architecture), Some(hash)) = (model.architecture(), model.diagram_hash()) else {
            return Err(Error::Checkpoint("only diagram-built models can be checkpointed".into()));
        };
        Ok(Checkpoint {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            diagram_hash: hash.to_string(),
            architecture,
            channels: model.channels(),
            activation: model.activation(),
            output_dim: model.output_dim(),
            config: *config,
            params: model.params().to_vec(),
            normalization: None,
            target_scale: None,
        })
    }

    /// Rebuilds the model against `diagram`, refusing a diagram whose hash
    /// differs from the one the model was trained on.
    pub fn restore(&self, diagram: &HasseDiagram) -> Result<HnnModel> {
        if self.format != CHECKPOINT_FORMAT || self.version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!("unsupported checkpoint {} v{}", self.format, self.version)));
        }
        let hash = diagram.content_hash();
        if hash != self.diagram_hash {
            return Err(Error::Checkpoint(format!(
                "diagram hash {hash} does not match checkpoint {}",
                self.diagram_hash
            )));
        }
        let cfg = TrainConfig {
            channels: self.channels,
            activation: self.activation,
            ..self.config
        };
        let mut m = HnnModel::build(diagram, self.architecture, &cfg, self.output_dim)?;
        if m.n_params() != self.params.len() {
            return Err(Error::Checkpoint(format!(
                "checkpoint has {} parameters, model expects {}",
                self.params.len(),
                m.n_params()
            )));
        }
        m.params_mut().copy_from_slice(&self.params);
        Ok(m)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, serde_json::to_string(self)?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&s)?)
    }
}

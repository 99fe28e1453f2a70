use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homology::HasseDiagram;

/// Which neurons feed the linear readout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReadoutScope {
    /// Residual connections from every neuron of every layer.
    AllLayers,
    /// Only the last layer, as in a plain feed-forward network.
    LastLayer,
}

/// Network family compared in the ablations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Architecture {
    /// Hasse-wired sparse layers with residual readout.
    Hnn,
    /// Hasse-wired sparse layers, readout from the last layer only.
    MlpHnn,
    /// Dense layers of the same sizes, readout from the last layer only.
    Mlp,
    /// Dense layers of the same sizes with residual readout.
    MlpRes,
}

impl Architecture {
    pub const ALL: [Architecture; 4] = [Architecture::Hnn, Architecture::MlpHnn, Architecture::Mlp, Architecture::MlpRes];

    pub fn name(self) -> &'static str {
        match self {
            Architecture::Hnn => "hnn",
            Architecture::MlpHnn => "mlp_hnn",
            Architecture::Mlp => "mlp",
            Architecture::MlpRes => "mlp_res",
        }
    }

    pub fn is_sparse(self) -> bool {
        matches!(self, Architecture::Hnn | Architecture::MlpHnn)
    }

    pub fn readout(self) -> ReadoutScope {
        match self {
            Architecture::Hnn | Architecture::MlpRes => ReadoutScope::AllLayers,
            Architecture::MlpHnn | Architecture::Mlp => ReadoutScope::LastLayer,
        }
    }
}

impl std::fmt::Display for Architecture {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Architecture::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown architecture {s:?}")))
    }
}

/// Neuron-level wiring of a layered feed-forward unit.
///
/// Layer 0 holds the inputs. Each neuron of layer `l ≥ 1` lists the indices
/// of the layer-`l−1` neurons it reads from, in ascending order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    layer_sizes: Vec<usize>,
    inputs: Vec<Vec<Vec<usize>>>,
    readout: ReadoutScope,
}

impl Topology {
    /// Wiring along the Hasse down-links, with `channels` neurons per simplex
    /// in every layer above the input. Neuron `k` of simplex `s` has index
    /// `s * channels + k` and reads every channel of every facet.
    pub fn hasse(diagram: &HasseDiagram, channels: usize, readout: ReadoutScope) -> Result<Self> {
        if channels == 0 {
            return Err(Error::Config("channel multiplier must be at least 1".into()));
        }
        let sizes = diagram.layer_sizes();
        if sizes.is_empty() || sizes[0] == 0 {
            return Err(Error::Empty("diagram has no vertices".into()));
        }
        let width = |d: usize| if d == 0 { 1 } else { channels };
        let mut layer_sizes = vec![sizes[0]];
        let mut inputs = vec![vec![Vec::new(); sizes[0]]];
        for d in 1..sizes.len() {
            let (cin, cout) = (width(d - 1), width(d));
            let mut layer = Vec::with_capacity(sizes[d] * cout);
            for i in 0..sizes[d] {
                let ins: Vec<usize> = diagram
                    .down(d, i)
                    .iter()
                    .flat_map(|&f| (0..cin).map(move |k| f * cin + k))
                    .collect();
                for _ in 0..cout {
                    layer.push(ins.clone());
                }
            }
            layer_sizes.push(sizes[d] * cout);
            inputs.push(layer);
        }
        Ok(Topology {
            layer_sizes,
            inputs,
            readout,
        })
    }

    /// Fully connected layers of the given sizes.
    pub fn dense(layer_sizes: &[usize], readout: ReadoutScope) -> Result<Self> {
        if layer_sizes.is_empty() || layer_sizes.contains(&0) {
            return Err(Error::Empty("dense topology needs non-empty layers".into()));
        }
        let mut inputs = vec![vec![Vec::new(); layer_sizes[0]]];
        for l in 1..layer_sizes.len() {
            let all: Vec<usize> = (0..layer_sizes[l - 1]).collect();
            inputs.push(vec![all; layer_sizes[l]]);
        }
        Ok(Topology {
            layer_sizes: layer_sizes.to_vec(),
            inputs,
            readout,
        })
    }

    /// Topology for an ablation variant, derived from the same diagram.
    pub fn for_architecture(diagram: &HasseDiagram, arch: Architecture, channels: usize) -> Result<Self> {
        let sparse = Topology::hasse(diagram, channels, arch.readout())?;
        if arch.is_sparse() {
            Ok(sparse)
        } else {
            Topology::dense(&sparse.layer_sizes, arch.readout())
        }
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn depth(&self) -> usize {
        self.layer_sizes.len()
    }

    pub fn input_width(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn total_neurons(&self) -> usize {
        self.layer_sizes.iter().sum()
    }

    /// Global index of the first neuron of layer `l`.
    pub fn layer_offset(&self, l: usize) -> usize {
        self.layer_sizes[..l].iter().sum()
    }

    pub fn inputs(&self, l: usize, i: usize) -> &[usize] {
        &self.inputs[l][i]
    }

    pub fn readout(&self) -> ReadoutScope {
        self.readout
    }

    /// Global index range of neurons wired to the readout.
    pub fn readout_range(&self) -> std::ops::Range<usize> {
        match self.readout {
            ReadoutScope::AllLayers => 0..self.total_neurons(),
            ReadoutScope::LastLayer => self.layer_offset(self.depth() - 1)..self.total_neurons(),
        }
    }

    /// Number of inter-layer connections (one weight each).
    pub fn link_count(&self) -> usize {
        self.inputs.iter().flatten().map(Vec::len).sum()
    }

    /// Weight count of a dense network with the same layer sizes.
    pub fn dense_link_count(&self) -> usize {
        self.layer_sizes.windows(2).map(|w| w[0] * w[1]).sum()
    }

    /// Number of neurons carrying a bias (every layer above the input).
    pub fn bias_count(&self) -> usize {
        self.layer_sizes[1..].iter().sum()
    }

    /// Consumers of each neuron in the next layer, indexed like `inputs`.
    pub(crate) fn fan_out(&self) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = self.layer_sizes.iter().map(|&n| vec![0; n]).collect();
        for l in 1..self.depth() {
            for ins in &self.inputs[l] {
                for &j in ins {
                    out[l - 1][j] += 1;
                }
            }
        }
        out
    }

    /// Whether neuron `(l, i)` may depend on input vertex `v`, following links.
    pub fn reachable_from_input(&self, v: usize) -> Vec<Vec<bool>> {
        let mut reach: Vec<Vec<bool>> = self.layer_sizes.iter().map(|&n| vec![false; n]).collect();
        reach[0][v] = true;
        for l in 1..self.depth() {
            for i in 0..self.layer_sizes[l] {
                reach[l][i] = self.inputs[l][i].iter().any(|&j| reach[l - 1][j]);
            }
        }
        reach
    }
}

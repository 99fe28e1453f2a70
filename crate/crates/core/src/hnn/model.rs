use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::topology::{Architecture, ReadoutScope, Topology};
use super::train::{InitScheme, TrainConfig};
use crate::error::{Error, Result};
use crate::homology::HasseDiagram;

/// Pointwise nonlinearity of the hidden layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Relu,
    Tanh,
    Identity,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
            Activation::Identity => z,
        }
    }

    /// Derivative at pre-activation `z` with output `a = apply(z)`.
    #[inline]
    pub fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - a * a,
            Activation::Identity => 1.0,
        }
    }
}

impl std::str::FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "relu" => Ok(Activation::Relu),
            "tanh" => Ok(Activation::Tanh),
            "identity" | "linear" => Ok(Activation::Identity),
            other => Err(Error::Config(format!("unknown activation {other:?}"))),
        }
    }
}

/// Offsets of each parameter group inside the flat parameter vector.
///
/// Order: link weights (layer, neuron, input), biases (layer, neuron),
/// readout weights (output, readout neuron), readout biases (output).
#[derive(Debug, Clone, PartialEq, Eq)]
struct Layout {
    link_off: Vec<Vec<usize>>,
    bias_off: Vec<usize>,
    readout_off: usize,
    n_readout: usize,
    readout_bias_off: usize,
    total: usize,
}

impl Layout {
    fn new(t: &Topology, output_dim: usize) -> Self {
        let mut off = 0;
        let mut link_off = vec![Vec::new()];
        for l in 1..t.depth() {
            let mut layer = Vec::with_capacity(t.layer_sizes()[l]);
            for i in 0..t.layer_sizes()[l] {
                layer.push(off);
                off += t.inputs(l, i).len();
            }
            link_off.push(layer);
        }
        let mut bias_off = vec![0];
        for l in 1..t.depth() {
            bias_off.push(off);
            off += t.layer_sizes()[l];
        }
        let readout_off = off;
        let n_readout = t.readout_range().len();
        off += n_readout * output_dim;
        let readout_bias_off = off;
        off += output_dim;
        Layout {
            link_off,
            bias_off,
            readout_off,
            n_readout,
            readout_bias_off,
            total: off,
        }
    }
}

/// Parameter counts of a model, with the dense comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParameterBreakdown {
    pub link_weights: usize,
    pub biases: usize,
    pub readout_weights: usize,
    pub readout_biases: usize,
    pub total: usize,
    /// Inter-layer weights of a fully connected network with the same sizes.
    pub dense_link_weights: usize,
    /// Total of that dense network, with the same biases and readout.
    pub dense_total: usize,
}

/// A layered feed-forward unit with linear readout. The HNN proper is the
/// Hasse-wired instance with residual readout; the same type carries the
/// dense and readout-restricted ablations.
#[derive(Debug, Clone, PartialEq)]
pub struct HnnModel {
    topology: Topology,
    architecture: Option<Architecture>,
    channels: usize,
    diagram_hash: Option<String>,
    activation: Activation,
    output_dim: usize,
    layout: Layout,
    params: Vec<f64>,
}

/// Per-neuron pre-activations and activations for one batch.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    fingerprint: u64,
    n_neurons: usize,
    batch: usize,
    pre: Vec<f64>,
    act: Vec<f64>,
}

impl ForwardCache {
    pub fn batch_size(&self) -> usize {
        self.batch
    }

    /// Pre-activations of sample `s`, indexed by global neuron index.
    pub fn pre(&self, s: usize) -> &[f64] {
        &self.pre[s * self.n_neurons..(s + 1) * self.n_neurons]
    }

    /// Activations of sample `s`; the first `p` entries are the inputs.
    pub fn act(&self, s: usize) -> &[f64] {
        &self.act[s * self.n_neurons..(s + 1) * self.n_neurons]
    }
}

/// Gradient of a scalar loss, in the model's flat parameter order.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub values: Vec<f64>,
}

/// Fixed number of samples per parallel gradient shard. Shards are reduced
/// in index order, so results do not depend on the thread count.
pub(crate) const SHARD: usize = 32;

impl HnnModel {
    /// Initializes a model over an explicit topology.
    pub fn from_topology(topology: Topology, cfg: &TrainConfig, output_dim: usize) -> Result<Self> {
        if output_dim == 0 {
            return Err(Error::Config("output_dim must be at least 1".into()));
        }
        if topology.total_neurons() == 0 {
            return Err(Error::Empty("topology has no neurons".into()));
        }
        let layout = Layout::new(&topology, output_dim);
        let mut m = HnnModel {
            topology,
            architecture: None,
            channels: 1,
            diagram_hash: None,
            activation: cfg.activation,
            output_dim,
            params: vec![0.0; layout.total],
            layout,
        };
        m.initialize(cfg.init, cfg.seed);
        Ok(m)
    }

    /// Builds the requested architecture from a Hasse diagram.
    pub fn build(diagram: &HasseDiagram, arch: Architecture, cfg: &TrainConfig, output_dim: usize) -> Result<Self> {
        let topology = Topology::for_architecture(diagram, arch, cfg.channels)?;
        let mut m = HnnModel::from_topology(topology, cfg, output_dim)?;
        m.architecture = Some(arch);
        m.channels = cfg.channels;
        m.diagram_hash = Some(diagram.content_hash());
        Ok(m)
    }

    fn initialize(&mut self, scheme: InitScheme, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.params.iter_mut().for_each(|p| *p = 0.0);
        if scheme == InitScheme::Zeros {
            return;
        }
        let fan_out = self.topology.fan_out();
        let ro = self.topology.readout_range();
        let draw = |limit: f64, rng: &mut ChaCha8Rng| -> f64 {
            if limit > 0.0 {
                Uniform::new_inclusive(-limit, limit).expect("finite limit").sample(rng)
            } else {
                0.0
            }
        };
        for l in 1..self.topology.depth() {
            let off = self.topology.layer_offset(l);
            for i in 0..self.topology.layer_sizes()[l] {
                let fan_in = self.topology.inputs(l, i).len();
                let outs = fan_out[l][i] + usize::from(ro.contains(&(off + i))) * self.output_dim;
                let limit = match scheme {
                    InitScheme::XavierUniform => (6.0 / (fan_in + outs).max(1) as f64).sqrt(),
                    InitScheme::HeUniform => (6.0 / fan_in.max(1) as f64).sqrt(),
                    InitScheme::Zeros => 0.0,
                };
                let start = self.layout.link_off[l][i];
                for k in 0..fan_in {
                    self.params[start + k] = draw(limit, &mut rng);
                }
            }
        }
        let n = self.layout.n_readout;
        let limit = match scheme {
            InitScheme::XavierUniform => (6.0 / (n + self.output_dim) as f64).sqrt(),
            InitScheme::HeUniform => (6.0 / n as f64).sqrt(),
            InitScheme::Zeros => 0.0,
        };
        for k in 0..n * self.output_dim {
            self.params[self.layout.readout_off + k] = draw(limit, &mut rng);
        }
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn architecture(&self) -> Option<Architecture> {
        self.architecture
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn diagram_hash(&self) -> Option<&str> {
        self.diagram_hash.as_deref()
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn set_activation(&mut self, a: Activation) {
        self.activation = a;
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn input_width(&self) -> usize {
        self.topology.input_width()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn n_params(&self) -> usize {
        self.layout.total
    }

    /// Flat index of the weight on input `k` of neuron `i` in layer `l ≥ 1`.
    pub fn link_index(&self, l: usize, i: usize, k: usize) -> usize {
        debug_assert!(k < self.topology.inputs(l, i).len());
        self.layout.link_off[l][i] + k
    }

    pub fn bias_index(&self, l: usize, i: usize) -> usize {
        self.layout.bias_off[l] + i
    }

    /// Flat index of the readout weight from global neuron `n` to output `o`.
    pub fn readout_index(&self, o: usize, n: usize) -> Option<usize> {
        let r = self.topology.readout_range();
        r.contains(&n).then(|| self.layout.readout_off + o * self.layout.n_readout + (n - r.start))
    }

    pub fn readout_bias_index(&self, o: usize) -> usize {
        self.layout.readout_bias_off + o
    }

    /// Index ranges of the link weights, biases, readout weights and readout
    /// biases inside the flat parameter vector.
    pub fn param_groups(&self) -> [std::ops::Range<usize>; 4] {
        let link_end = self.layout.bias_off.get(1).copied().unwrap_or(self.layout.readout_off);
        [
            0..link_end,
            link_end..self.layout.readout_off,
            self.layout.readout_off..self.layout.readout_bias_off,
            self.layout.readout_bias_off..self.layout.total,
        ]
    }

    pub(crate) fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ self.layout.total as u64;
        for p in &self.params {
            h = (h ^ p.to_bits()).wrapping_mul(0x0100_0000_01b3);
        }
        h ^ (self.activation as u64)
    }

    /// Evaluates one sample into caller-provided buffers of length
    /// `total_neurons` and `output_dim`.
    pub fn forward_sample(&self, x: &[f64], pre: &mut [f64], act: &mut [f64], out: &mut [f64]) {
        let t = &self.topology;
        let p = t.input_width();
        pre[..p].copy_from_slice(x);
        act[..p].copy_from_slice(x);
        let mut prev = 0;
        let mut off = p;
        for l in 1..t.depth() {
            for i in 0..t.layer_sizes()[l] {
                let ins = t.inputs(l, i);
                let w = &self.params[self.layout.link_off[l][i]..][..ins.len()];
                let mut z = self.params[self.layout.bias_off[l] + i];
                for (wk, &j) in w.iter().zip(ins) {
                    z += wk * act[prev + j];
                }
                pre[off + i] = z;
                act[off + i] = self.activation.apply(z);
            }
            prev = off;
            off += t.layer_sizes()[l];
        }
        let ro = t.readout_range();
        let nr = self.layout.n_readout;
        for (o, y) in out.iter_mut().enumerate() {
            let w = &self.params[self.layout.readout_off + o * nr..][..nr];
            let mut s = self.params[self.layout.readout_bias_off + o];
            for (wk, a) in w.iter().zip(&act[ro.clone()]) {
                s += wk * a;
            }
            *y = s;
        }
    }

    /// Accumulates the gradient of one sample into `grad` given the upstream
    /// output gradient `dout`. `dact` is scratch of length `total_neurons`;
    /// on return its first `p` entries hold the gradient w.r.t. the input.
    pub fn backward_sample(&self, pre: &[f64], act: &[f64], dout: &[f64], grad: &mut [f64], dact: &mut [f64]) {
        let t = &self.topology;
        dact.iter_mut().for_each(|d| *d = 0.0);
        let ro = t.readout_range();
        let nr = self.layout.n_readout;
        for (o, &g) in dout.iter().enumerate() {
            grad[self.layout.readout_bias_off + o] += g;
            let base = self.layout.readout_off + o * nr;
            for (r, n) in ro.clone().enumerate() {
                grad[base + r] += g * act[n];
                dact[n] += g * self.params[base + r];
            }
        }
        for l in (1..t.depth()).rev() {
            let off = t.layer_offset(l);
            let prev = t.layer_offset(l - 1);
            for i in 0..t.layer_sizes()[l] {
                let n = off + i;
                let dz = dact[n] * self.activation.derivative(pre[n], act[n]);
                if dz == 0.0 {
                    continue;
                }
                grad[self.layout.bias_off[l] + i] += dz;
                let start = self.layout.link_off[l][i];
                for (k, &j) in t.inputs(l, i).iter().enumerate() {
                    grad[start + k] += dz * act[prev + j];
                    dact[prev + j] += self.params[start + k] * dz;
                }
            }
        }
    }

    fn check_inputs(&self, x: &[Vec<f64>]) -> Result<()> {
        let p = self.input_width();
        for (s, row) in x.iter().enumerate() {
            if row.len() != p {
                return Err(Error::Dimension(format!("sample {s} has width {}, expected {p}", row.len())));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("input sample {s}")));
            }
        }
        Ok(())
    }

    /// Batch forward pass; returns outputs (one `output_dim` vector per
    /// sample) and the cache needed by [`HnnModel::backward`].
    pub fn forward(&self, x: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, ForwardCache)> {
        self.check_inputs(x)?;
        let n = self.topology.total_neurons();
        let mut pre = vec![0.0; x.len() * n];
        let mut act = vec![0.0; x.len() * n];
        let mut outputs = vec![vec![0.0; self.output_dim]; x.len()];
        pre.par_chunks_mut(n)
            .zip(act.par_chunks_mut(n))
            .zip(outputs.par_iter_mut())
            .zip(x.par_iter())
            .for_each(|(((pre, act), out), xs)| self.forward_sample(xs, pre, act, out));
        Ok((
            outputs,
            ForwardCache {
                fingerprint: self.fingerprint(),
                n_neurons: n,
                batch: x.len(),
                pre,
                act,
            },
        ))
    }

    /// Predictions only.
    pub fn predict(&self, x: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        Ok(self.forward(x)?.0)
    }

    /// Exact reverse-mode gradient of `Σ_s Σ_o d_out[s][o] · output[s][o]`.
    pub fn backward(&self, cache: &ForwardCache, d_out: &[Vec<f64>]) -> Result<Gradients> {
        if cache.fingerprint != self.fingerprint() || cache.n_neurons != self.topology.total_neurons() {
            return Err(Error::Dimension("forward cache was produced by a different model".into()));
        }
        if d_out.len() != cache.batch || d_out.iter().any(|d| d.len() != self.output_dim) {
            return Err(Error::Dimension("output gradient shape does not match the cache".into()));
        }
        let n = cache.n_neurons;
        let shards: Vec<Vec<f64>> = (0..cache.batch)
            .collect::<Vec<_>>()
            .par_chunks(SHARD)
            .map(|idx| {
                let mut grad = vec![0.0; self.layout.total];
                let mut dact = vec![0.0; n];
                for &s in idx {
                    self.backward_sample(cache.pre(s), cache.act(s), &d_out[s], &mut grad, &mut dact);
                }
                grad
            })
            .collect();
        Ok(Gradients {
            values: reduce_in_order(shards, self.layout.total),
        })
    }

    /// Mean squared error over all samples and outputs, with its gradient.
    pub fn mse_and_grad(&self, x: &[Vec<f64>], y: &[Vec<f64>]) -> Result<(f64, Gradients)> {
        self.check_inputs(x)?;
        check_targets(y, x.len(), self.output_dim)?;
        let idx: Vec<usize> = (0..x.len()).collect();
        Ok(self.mse_grad_on(x, y, &idx))
    }

    /// MSE and gradient over the samples `idx` of pre-validated data.
    pub(crate) fn mse_grad_on(&self, x: &[Vec<f64>], y: &[Vec<f64>], idx: &[usize]) -> (f64, Gradients) {
        let n = self.topology.total_neurons();
        let scale = 1.0 / (idx.len() * self.output_dim) as f64;
        let shards: Vec<(f64, Vec<f64>)> = idx
            .par_chunks(SHARD)
            .map(|idx| {
                let mut grad = vec![0.0; self.layout.total];
                let (mut pre, mut act, mut dact) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
                let mut out = vec![0.0; self.output_dim];
                let mut dout = vec![0.0; self.output_dim];
                let mut loss = 0.0;
                for &s in idx {
                    self.forward_sample(&x[s], &mut pre, &mut act, &mut out);
                    for o in 0..self.output_dim {
                        let r = out[o] - y[s][o];
                        loss += r * r;
                        dout[o] = 2.0 * r * scale;
                    }
                    self.backward_sample(&pre, &act, &dout, &mut grad, &mut dact);
                }
                (loss, grad)
            })
            .collect();
        let loss = shards.iter().map(|s| s.0).sum::<f64>() * scale;
        let grad = reduce_in_order(shards.into_iter().map(|s| s.1).collect(), self.layout.total);
        (loss, Gradients { values: grad })
    }

    /// Mean squared error without gradients.
    pub fn mse(&self, x: &[Vec<f64>], y: &[Vec<f64>]) -> Result<f64> {
        let pred = self.predict(x)?;
        check_targets(y, x.len(), self.output_dim)?;
        Ok(mse(&pred, y))
    }

    pub fn param_count(&self) -> ParameterBreakdown {
        param_count(self)
    }
}

pub(crate) fn check_targets(y: &[Vec<f64>], n: usize, output_dim: usize) -> Result<()> {
    if y.len() != n {
        return Err(Error::Dimension(format!("{} targets for {n} samples", y.len())));
    }
    if let Some(s) = y.iter().position(|t| t.len() != output_dim) {
        return Err(Error::Dimension(format!("target {s} has width {}, expected {output_dim}", y[s].len())));
    }
    Ok(())
}

pub(crate) fn mse(pred: &[Vec<f64>], y: &[Vec<f64>]) -> f64 {
    let mut total = 0.0;
    let mut count = 0usize;
    for (p, t) in pred.iter().zip(y) {
        for (a, b) in p.iter().zip(t) {
            total += (a - b) * (a - b);
            count += 1;
        }
    }
    total / count.max(1) as f64
}

pub(crate) fn reduce_in_order(shards: Vec<Vec<f64>>, len: usize) -> Vec<f64> {
    let mut acc = vec![0.0; len];
    for s in shards {
        for (a, b) in acc.iter_mut().zip(s) {
            *a += b;
        }
    }
    acc
}

/// Initializes the default HNN (Hasse wiring, residual readout, scalar
/// output) over a diagram.
pub fn init_model(diagram: &HasseDiagram, cfg: &TrainConfig) -> Result<HnnModel> {
    HnnModel::build(diagram, Architecture::Hnn, cfg, 1)
}

pub fn param_count(m: &HnnModel) -> ParameterBreakdown {
    let t = m.topology();
    let link_weights = t.link_count();
    let biases = t.bias_count();
    let readout_weights = m.layout.n_readout * m.output_dim;
    let readout_biases = m.output_dim;
    let dense_link_weights = t.dense_link_count();
    ParameterBreakdown {
        link_weights,
        biases,
        readout_weights,
        readout_biases,
        total: link_weights + biases + readout_weights + readout_biases,
        dense_link_weights,
        dense_total: dense_link_weights + biases + readout_weights + readout_biases,
    }
}

/// Readout weights that come from layers other than the last: the residual
/// connections that distinguish the HNN from its sparse-MLP ablation.
pub fn residual_readout_count(t: &Topology, output_dim: usize) -> usize {
    match t.readout() {
        ReadoutScope::AllLayers => (t.total_neurons() - t.layer_sizes()[t.depth() - 1]) * output_dim,
        ReadoutScope::LastLayer => 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homology::{build_hasse, SimplexLayers};
    use crate::tmfg::{ChordalGraph, Provenance};

    fn k4() -> HasseDiagram {
        let g = ChordalGraph::new(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)], Provenance::UserSupplied).unwrap();
        HasseDiagram::from_graph(&g).unwrap()
    }

    #[test]
    fn k4_parameter_count() {
        let m = init_model(&k4(), &TrainConfig::default()).unwrap();
        let c = m.param_count();
        assert_eq!((c.link_weights, c.biases, c.readout_weights, c.readout_biases), (28, 11, 15, 1));
        assert_eq!(c.total, 55);
        assert_eq!(m.n_params(), 55);
        assert_eq!(c.dense_link_weights, 52);
        assert!(c.dense_link_weights > c.link_weights);
    }

    #[test]
    fn empty_diagram_is_rejected() {
        assert!(build_hasse(&SimplexLayers { layers: vec![] }).is_err());
        assert!(Topology::dense(&[], ReadoutScope::AllLayers).is_err());
    }

    #[test]
    fn init_is_deterministic_and_biases_start_at_zero() {
        let cfg = TrainConfig::default();
        let a = init_model(&k4(), &cfg).unwrap();
        let b = init_model(&k4(), &cfg).unwrap();
        assert_eq!(a.params(), b.params());
        let [_, biases, _, rb] = a.param_groups();
        assert!(a.params()[biases].iter().all(|&v| v == 0.0));
        assert!(a.params()[rb].iter().all(|&v| v == 0.0));
        let c = init_model(&k4(), &TrainConfig { seed: cfg.seed + 1, ..cfg }).unwrap();
        assert_ne!(a.params(), c.params());
    }

    #[test]
    fn xavier_limits_respected() {
        let m = init_model(&k4(), &TrainConfig::default()).unwrap();
        // Edge neuron: 2 inputs, 2 triangle consumers + 1 readout.
        let lim = (6.0f64 / 5.0).sqrt();
        for k in 0..2 {
            assert!(m.params()[m.link_index(1, 0, k)].abs() <= lim);
        }
    }

    #[test]
    fn zero_network_outputs_readout_bias() {
        let cfg = TrainConfig {
            init: InitScheme::Zeros,
            ..TrainConfig::default()
        };
        let mut m = init_model(&k4(), &cfg).unwrap();
        let rb = m.readout_bias_index(0);
        m.params_mut()[rb] = 0.7;
        let out = m.predict(&[vec![1.0, -2.0, 3.0, 0.5], vec![0.0; 4]]).unwrap();
        assert_eq!(out, vec![vec![0.7], vec![0.7]]);
    }

    #[test]
    fn forward_rejects_bad_input() {
        let m = init_model(&k4(), &TrainConfig::default()).unwrap();
        assert!(matches!(m.forward(&[vec![0.0; 3]]), Err(Error::Dimension(_))));
        assert!(matches!(m.forward(&[vec![0.0, f64::NAN, 0.0, 0.0]]), Err(Error::NonFinite(_))));
    }

    #[test]
    fn null_upstream_gradient_gives_zero() {
        let m = init_model(&k4(), &TrainConfig::default()).unwrap();
        let x = vec![vec![0.3, -0.1, 0.8, 1.2]];
        let (_, cache) = m.forward(&x).unwrap();
        let g = m.backward(&cache, &[vec![0.0]]).unwrap();
        assert!(g.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn readout_gradient_closed_form() {
        let cfg = TrainConfig {
            activation: Activation::Identity,
            ..TrainConfig::default()
        };
        let m = init_model(&k4(), &cfg).unwrap();
        let x = vec![vec![0.3, -0.1, 0.8, 1.2]];
        let y = vec![vec![0.25]];
        let (out, cache) = m.forward(&x).unwrap();
        let (_, g) = m.mse_and_grad(&x, &y).unwrap();
        let resid = out[0][0] - y[0][0];
        for n in 0..15 {
            let want = 2.0 * resid * cache.act(0)[n];
            let got = g.values[m.readout_index(0, n).unwrap()];
            assert!((got - want).abs() < 1e-12, "neuron {n}: {got} vs {want}");
        }
    }

    #[test]
    fn stale_cache_is_rejected() {
        let mut m = init_model(&k4(), &TrainConfig::default()).unwrap();
        let (_, cache) = m.forward(&[vec![1.0; 4]]).unwrap();
        m.params_mut()[0] += 1.0;
        assert!(m.backward(&cache, &[vec![1.0]]).is_err());
    }

    #[test]
    fn ablation_parameter_ordering() {
        let d = k4();
        let cfg = TrainConfig::default();
        let count = |a| HnnModel::build(&d, a, &cfg, 1).unwrap().param_count().total;
        let hnn = HnnModel::build(&d, Architecture::Hnn, &cfg, 1).unwrap();
        assert_eq!(count(Architecture::Hnn), count(Architecture::MlpHnn) + residual_readout_count(hnn.topology(), 1));
        assert!(count(Architecture::MlpHnn) < count(Architecture::Mlp));
        assert!(count(Architecture::Mlp) < count(Architecture::MlpRes));
    }
}

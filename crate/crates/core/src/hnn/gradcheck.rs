//! Central-difference gradient oracle.

use super::model::{Gradients, HnnModel};
use crate::error::{Error, Result};

/// Scalar training objectives understood by the gradient oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Loss {
    /// Mean over samples and outputs of the squared residual.
    #[default]
    Mse,
}

impl Loss {
    pub fn evaluate(self, m: &HnnModel, x: &[Vec<f64>], y: &[Vec<f64>]) -> Result<f64> {
        match self {
            Loss::Mse => m.mse(x, y),
        }
    }
}

/// `(L(θ + eps·e_i) − L(θ − eps·e_i)) / (2·eps)` for every parameter `i`.
pub fn finite_diff_grad(m: &HnnModel, x: &[Vec<f64>], y: &[Vec<f64>], loss: Loss, eps: f64) -> Result<Gradients> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Config(format!("finite-difference step must be positive, got {eps}")));
    }
    let mut probe = m.clone();
    let mut values = Vec::with_capacity(m.n_params());
    for i in 0..m.n_params() {
        let orig = probe.params()[i];
        probe.params_mut()[i] = orig + eps;
        let plus = loss.evaluate(&probe, x, y)?;
        probe.params_mut()[i] = orig - eps;
        let minus = loss.evaluate(&probe, x, y)?;
        probe.params_mut()[i] = orig;
        values.push((plus - minus) / (2.0 * eps));
    }
    Ok(Gradients { values })
}

/// `max_i |a_i − b_i| / max(1, |b_i|)`, with `b` the reference.
pub fn max_relative_error(analytic: &[f64], reference: &[f64]) -> f64 {
    analytic
        .iter()
        .zip(reference)
        .map(|(a, b)| (a - b).abs() / b.abs().max(1.0))
        .fold(0.0, f64::max)
}

/// Smallest |pre-activation| over hidden neurons for a batch; relu gradient
/// checks should only be trusted when this is well above the step size.
pub fn min_kink_distance(m: &HnnModel, x: &[Vec<f64>]) -> Result<f64> {
    let (_, cache) = m.forward(x)?;
    let p = m.input_width();
    Ok((0..cache.batch_size())
        .flat_map(|s| cache.pre(s)[p..].to_vec())
        .map(f64::abs)
        .fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hnn::{Topology, ReadoutScope, TrainConfig, Activation};

    #[test]
    fn quadratic_in_one_parameter() {
        // A single-input identity network: output = w·x + b, loss = (w·x + b − y)².
        let t = Topology::dense(&[1], ReadoutScope::AllLayers).unwrap();
        let cfg = TrainConfig { activation: Activation::Identity, ..TrainConfig::default() };
        let mut m = HnnModel::from_topology(t, &cfg, 1).unwrap();
        m.params_mut().copy_from_slice(&[1.5, 0.25]);
        let (x, y) = (vec![vec![2.0]], vec![vec![1.0]]);
        let g = finite_diff_grad(&m, &x, &y, Loss::Mse, 1e-4).unwrap();
        let r = 1.5 * 2.0 + 0.25 - 1.0;
        assert!((g.values[0] - 2.0 * r * 2.0).abs() < 1e-7);
        assert!((g.values[1] - 2.0 * r).abs() < 1e-7);
    }

    #[test]
    fn zero_step_is_rejected() {
        let t = Topology::dense(&[1], ReadoutScope::AllLayers).unwrap();
        let m = HnnModel::from_topology(t, &TrainConfig::default(), 1).unwrap();
        assert!(finite_diff_grad(&m, &[vec![1.0]], &[vec![0.0]], Loss::Mse, 0.0).is_err());
    }

    #[test]
    fn relative_error_floor() {
        assert_eq!(max_relative_error(&[1.0, 100.0], &[0.5, 110.0]), 0.5);
        assert!((max_relative_error(&[0.0], &[1e-3]) - 1e-3).abs() < 1e-18);
    }
}

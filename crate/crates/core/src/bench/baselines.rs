//! Reference models the sparse networks are compared against.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hnn::{Architecture, HnnModel, TrainConfig};
use crate::homology::HasseDiagram;
use crate::timeseries::{SeriesScaler, WindowedSeries};

/// Ordinary least squares with intercept, solved from the normal equations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearRegression {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    /// Ridge penalty added to the Gram matrix, zero unless it was singular.
    pub ridge: f64,
}

/// Reciprocal condition bound below which the Gram matrix counts as singular.
const SINGULAR_RCOND: f64 = 1e-12;

impl LinearRegression {
    /// Fits `y ≈ b + Xw`. A singular Gram matrix is an error unless
    /// `ridge_fallback` is set, in which case a small ridge term is added
    /// and a warning logged.
    pub fn fit(x: &[Vec<f64>], y: &[f64], ridge_fallback: bool) -> Result<Self> {
        if x.is_empty() || x.len() != y.len() {
            return Err(Error::Dimension(format!("{} rows vs {} targets", x.len(), y.len())));
        }
        let p = x[0].len();
        if x.iter().any(|r| r.len() != p) {
            return Err(Error::Dimension("rows of unequal width".into()));
        }
        // centre so the intercept drops out of the system
        let n = x.len() as f64;
        let xm: Vec<f64> = (0..p).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n).collect();
        let ym = y.iter().sum::<f64>() / n;
        let a = DMatrix::from_fn(x.len(), p, |i, j| x[i][j] - xm[j]);
        let b = DVector::from_iterator(y.len(), y.iter().map(|v| v - ym));
        let gram = a.transpose() * &a;
        let rhs = a.transpose() * b;

        let solve = |g: DMatrix<f64>| -> Option<DVector<f64>> {
            let chol = g.cholesky()?;
            let diag = chol.l_dirty().diagonal();
            let (lo, hi) = diag.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
            if p > 0 && (lo / hi).powi(2) < SINGULAR_RCOND {
                return None;
            }
            Some(chol.solve(&rhs))
        };
        let (w, ridge) = match solve(gram.clone()) {
            Some(w) => (w, 0.0),
            None if ridge_fallback => {
                let ridge = 1e-6 * (gram.trace() / p as f64).max(f64::MIN_POSITIVE);
                log::warn!("singular Gram matrix; refitting with ridge {ridge:.3e}");
                let g = gram + DMatrix::identity(p, p) * ridge;
                let w = g.cholesky().ok_or_else(|| Error::Singular("ridge system is not positive definite".into()))?.solve(&rhs);
                (w, ridge)
            }
            None => return Err(Error::Singular("Gram matrix is singular; enable the ridge fallback".into())),
        };
        let coefficients: Vec<f64> = w.iter().copied().collect();
        let intercept = ym - coefficients.iter().zip(&xm).map(|(c, m)| c * m).sum::<f64>();
        Ok(LinearRegression {
            intercept,
            coefficients,
            ridge,
        })
    }

    pub fn predict(&self, x: &[Vec<f64>]) -> Vec<f64> {
        x.iter()
            .map(|r| self.intercept + r.iter().zip(&self.coefficients).map(|(a, b)| a * b).sum::<f64>())
            .collect()
    }
}

/// Last observed value of every series, on the original scale.
pub fn persistence_forecast(ws: &WindowedSeries, scaler: &SeriesScaler) -> Vec<Vec<f64>> {
    ws.samples
        .iter()
        .map(|w| {
            let last: Vec<f64> = w.window.iter().map(|s| *s.last().expect("non-empty window")).collect();
            scaler.inverse_row(&last)
        })
        .collect()
}

/// Fully connected network with the layer sizes of the diagram's unit.
pub fn dense_mlp(diagram: &HasseDiagram, cfg: &TrainConfig, output_dim: usize) -> Result<HnnModel> {
    HnnModel::build(diagram, Architecture::Mlp, cfg, output_dim)
}

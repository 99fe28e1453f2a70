//! Regression and forecasting scores.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficient of determination `1 − SS_res / SS_tot`.
pub fn r2_score(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    if y_true.len() != y_pred.len() {
        return Err(Error::Dimension(format!("{} truths vs {} predictions", y_true.len(), y_pred.len())));
    }
    if y_true.len() < 2 {
        return Err(Error::Degenerate("r2 needs at least two points".into()));
    }
    let mean = y_true.iter().sum::<f64>() / y_true.len() as f64;
    let ss_tot: f64 = y_true.iter().map(|y| (y - mean) * (y - mean)).sum();
    if ss_tot == 0.0 {
        return Err(Error::Degenerate("r2 is undefined for constant truth".into()));
    }
    let ss_res: f64 = y_true.iter().zip(y_pred).map(|(y, p)| (y - p) * (y - p)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

fn check_shapes(y_true: &[Vec<f64>], y_pred: &[Vec<f64>]) -> Result<()> {
    if y_true.is_empty() {
        return Err(Error::Empty("no test points".into()));
    }
    if y_true.len() != y_pred.len() || y_true.iter().zip(y_pred).any(|(a, b)| a.len() != b.len()) {
        return Err(Error::Dimension("truth and prediction shapes differ".into()));
    }
    Ok(())
}

/// Root relative squared error over the whole `[time][series]` tensor:
/// `sqrt(Σ(y − ŷ)²) / sqrt(Σ(y − ȳ)²)` with ȳ the mean of all test values.
pub fn rse(y_true: &[Vec<f64>], y_pred: &[Vec<f64>]) -> Result<f64> {
    check_shapes(y_true, y_pred)?;
    let count: usize = y_true.iter().map(Vec::len).sum();
    let mean = y_true.iter().flatten().sum::<f64>() / count as f64;
    let ss_tot: f64 = y_true.iter().flatten().map(|y| (y - mean) * (y - mean)).sum();
    if ss_tot == 0.0 {
        return Err(Error::Degenerate("rse is undefined for constant truth".into()));
    }
    let ss_res: f64 = y_true.iter().flatten().zip(y_pred.iter().flatten()).map(|(y, p)| (y - p) * (y - p)).sum();
    Ok(ss_res.sqrt() / ss_tot.sqrt())
}

fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    (saa > 0.0 && sbb > 0.0).then(|| (sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

/// Mean over series of the Pearson correlation between truth and forecast.
/// Series whose truth or forecast is constant are skipped with a warning.
pub fn corr_metric(y_true: &[Vec<f64>], y_pred: &[Vec<f64>]) -> Result<f64> {
    check_shapes(y_true, y_pred)?;
    let n_series = y_true[0].len();
    let mut sum = 0.0;
    let mut used = 0;
    for s in 0..n_series {
        let t: Vec<f64> = y_true.iter().map(|r| r[s]).collect();
        let p: Vec<f64> = y_pred.iter().map(|r| r[s]).collect();
        match pearson(&t, &p) {
            Some(c) => {
                sum += c;
                used += 1;
            }
            None => log::warn!("series {s} is constant in truth or forecast; excluded from CORR"),
        }
    }
    if used == 0 {
        return Err(Error::Degenerate("every series is constant".into()));
    }
    Ok(sum / used as f64)
}

/// Linear-interpolation quantile of unsorted data, `q` in [0, 1].
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

/// Mean and 10th/50th/90th percentiles of a score across runs or datasets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub q10: f64,
    pub q50: f64,
    pub q90: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("no values to summarize".into()));
        }
        Ok(Summary {
            mean: values.iter().sum::<f64>() / values.len() as f64,
            q10: quantile(values, 0.1),
            q50: quantile(values, 0.5),
            q90: quantile(values, 0.9),
        })
    }
}

/// Scores of one model on one run.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricReport {
    pub r2: Option<f64>,
    pub rse: Option<f64>,
    pub corr: Option<f64>,
}

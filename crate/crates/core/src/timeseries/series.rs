use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corr::mean_std;
use crate::error::{Error, Result};

/// `n_series` aligned series of length `len`, stored series-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MultivariateSeries {
    names: Vec<String>,
    values: Vec<Vec<f64>>,
    pub sample_rate: String,
}

impl MultivariateSeries {
    pub fn new(names: Vec<String>, values: Vec<Vec<f64>>, sample_rate: impl Into<String>) -> Result<Self> {
        if values.is_empty() || values[0].is_empty() {
            return Err(Error::Empty("series has no values".into()));
        }
        if names.len() != values.len() {
            return Err(Error::Dimension(format!("{} names for {} series", names.len(), values.len())));
        }
        let t = values[0].len();
        for (s, v) in values.iter().enumerate() {
            if v.len() != t {
                return Err(Error::Dimension(format!("series {s} has length {}, expected {t}", v.len())));
            }
            if let Some(i) = v.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite(format!("series {s} at step {i}")));
            }
        }
        Ok(MultivariateSeries {
            names,
            values,
            sample_rate: sample_rate.into(),
        })
    }

    /// Series named `s0..`, from rows of one value per series per timestep.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.first().map_or(0, Vec::len);
        let mut values = vec![Vec::with_capacity(rows.len()); n];
        for (t, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::Ragged {
                    row: t + 1,
                    found: r.len(),
                    expected: n,
                });
            }
            for (s, &v) in r.iter().enumerate() {
                values[s].push(v);
            }
        }
        MultivariateSeries::new((0..n).map(|s| format!("s{s}")).collect(), values, "step")
    }

    /// Reads one row per timestep, comma- or whitespace-delimited, with an
    /// optional header row (detected when its first field is not numeric).
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty()).peekable();
        let first = *lines.peek().ok_or_else(|| Error::Empty("series file is empty".into()))?;
        let comma = first.contains(',');
        let split = |l: &str| -> Vec<String> {
            if comma {
                l.split(',').map(|f| f.trim().to_string()).collect()
            } else {
                l.split_whitespace().map(str::to_string).collect()
            }
        };
        let head = split(first);
        let names = if head[0].parse::<f64>().is_err() {
            lines.next();
            Some(head)
        } else {
            None
        };
        let mut rows = Vec::new();
        for (t, l) in lines.enumerate() {
            let fields = split(l);
            let row = fields
                .iter()
                .enumerate()
                .map(|(j, f)| {
                    f.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| Error::Parse {
                        row: t + 1,
                        column: names.as_ref().map_or_else(|| format!("s{j}"), |n| n.get(j).cloned().unwrap_or_default()),
                        value: f.clone(),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        let mut s = MultivariateSeries::from_rows(&rows)?;
        if let Some(n) = names {
            if n.len() != s.n_series() {
                return Err(Error::Dimension(format!("{} header names for {} series", n.len(), s.n_series())));
            }
            s.names = n;
        }
        Ok(s)
    }

    pub fn n_series(&self) -> usize {
        self.values.len()
    }

    pub fn len(&self) -> usize {
        self.values[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn series(&self, s: usize) -> &[f64] {
        &self.values[s]
    }

    /// Copy restricted to timesteps `range`.
    pub fn slice(&self, range: std::ops::Range<usize>) -> MultivariateSeries {
        MultivariateSeries {
            names: self.names.clone(),
            values: self.values.iter().map(|v| v[range.clone()].to_vec()).collect(),
            sample_rate: self.sample_rate.clone(),
        }
    }

    /// Series reordered so that new series `k` is old series `perm[k]`.
    pub fn permute(&self, perm: &[usize]) -> MultivariateSeries {
        MultivariateSeries {
            names: perm.iter().map(|&s| self.names[s].clone()).collect(),
            values: perm.iter().map(|&s| self.values[s].clone()).collect(),
            sample_rate: self.sample_rate.clone(),
        }
    }

    pub fn content_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        for (n, v) in self.names.iter().zip(&self.values) {
            h.update(n.as_bytes());
            h.update([0u8]);
            for x in v {
                h.update(x.to_bits().to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }
}

/// Per-series standardization fitted on the training span.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesScaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl SeriesScaler {
    pub fn fit(s: &MultivariateSeries, range: std::ops::Range<usize>) -> Self {
        let (mean, std) = (0..s.n_series())
            .map(|k| {
                let (m, sd) = mean_std(&s.series(k)[range.clone()]);
                // A flat training span keeps unit scale rather than dividing by zero.
                (m, if sd > 1e-12 { sd } else { 1.0 })
            })
            .unzip();
        SeriesScaler { mean, std }
    }

    pub fn transform(&self, s: usize, v: f64) -> f64 {
        (v - self.mean[s]) / self.std[s]
    }

    pub fn inverse(&self, s: usize, v: f64) -> f64 {
        v * self.std[s] + self.mean[s]
    }

    pub fn inverse_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter().enumerate().map(|(s, &v)| self.inverse(s, v)).collect()
    }
}

/// One training example: `window[s]` holds the `lookback` values of series
/// `s` ending at `start + lookback − 1`; `target` is the value of every
/// series at `target_index = start + lookback + horizon − 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub start: usize,
    pub target_index: usize,
    pub window: Vec<Vec<f64>>,
    pub target: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowedSeries {
    pub lookback: usize,
    pub horizon: usize,
    pub samples: Vec<Window>,
}

impl WindowedSeries {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Targets as `[sample][series]`.
    pub fn targets(&self) -> Vec<Vec<f64>> {
        self.samples.iter().map(|w| w.target.clone()).collect()
    }
}

/// Chronological train/validation/test fractions of the timeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitFractions {
    pub train: f64,
    pub valid: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        SplitFractions { train: 0.6, valid: 0.2 }
    }
}

/// Windowed, standardized partitions of one series.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSplits {
    pub train: WindowedSeries,
    pub valid: WindowedSeries,
    pub test: WindowedSeries,
    pub scaler: SeriesScaler,
    /// First timestep outside the training span.
    pub train_end: usize,
    pub valid_end: usize,
}

/// Every window of a series, unscaled, in chronological order.
pub fn all_windows(s: &MultivariateSeries, lookback: usize, horizon: usize) -> WindowedSeries {
    let t = s.len();
    let count = (t + 1).saturating_sub(lookback + horizon);
    let samples = (0..count)
        .map(|start| {
            let target_index = start + lookback + horizon - 1;
            Window {
                start,
                target_index,
                window: (0..s.n_series()).map(|k| s.series(k)[start..start + lookback].to_vec()).collect(),
                target: (0..s.n_series()).map(|k| s.series(k)[target_index]).collect(),
            }
        })
        .collect();
    WindowedSeries {
        lookback,
        horizon,
        samples,
    }
}

/// Cuts `(window, target)` pairs and partitions them by target time.
///
/// Per-series z-scoring is fitted on timesteps `< train_end` only. A sample
/// belongs to the split containing its target index; test windows that would
/// start inside the training span are dropped so no test input overlaps it.
pub fn make_windows(s: &MultivariateSeries, lookback: usize, horizon: usize, split: SplitFractions) -> Result<WindowSplits> {
    let t = s.len();
    if lookback == 0 || horizon == 0 {
        return Err(Error::Config("lookback and horizon must be positive".into()));
    }
    if t < lookback + horizon + 10 {
        return Err(Error::Degenerate(format!(
            "series of length {t} is too short for lookback {lookback} and horizon {horizon}"
        )));
    }
    if !(split.train > 0.0 && split.valid >= 0.0 && split.train + split.valid < 1.0) {
        return Err(Error::Config(format!("invalid split fractions {split:?}")));
    }
    let train_end = (t as f64 * split.train).floor() as usize;
    let valid_end = (t as f64 * (split.train + split.valid)).floor() as usize;
    let scaler = SeriesScaler::fit(s, 0..train_end);

    let mut parts = [Vec::new(), Vec::new(), Vec::new()];
    for mut w in all_windows(s, lookback, horizon).samples {
        let part = if w.target_index < train_end {
            0
        } else if w.target_index < valid_end {
            1
        } else if w.start >= train_end {
            2
        } else {
            continue;
        };
        for (k, row) in w.window.iter_mut().enumerate() {
            row.iter_mut().for_each(|v| *v = scaler.transform(k, *v));
        }
        for (k, v) in w.target.iter_mut().enumerate() {
            *v = scaler.transform(k, *v);
        }
        parts[part].push(w);
    }
    let [train, valid, test] = parts.map(|samples| WindowedSeries {
        lookback,
        horizon,
        samples,
    });
    if train.is_empty() || test.is_empty() {
        return Err(Error::Degenerate("split leaves an empty training or test partition".into()));
    }
    Ok(WindowSplits {
        train,
        valid,
        test,
        scaler,
        train_end,
        valid_end,
    })
}

/// Writes `timestamp,series,prediction` rows.
pub fn write_forecast_csv<W: Write>(w: W, names: &[String], timestamps: &[usize], predictions: &[Vec<f64>]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["timestamp", "series", "prediction"])?;
    for (t, row) in timestamps.iter().zip(predictions) {
        for (name, v) in names.iter().zip(row) {
            wtr.write_record([t.to_string(), name.clone(), v.to_string()])?;
        }
    }
    wtr.flush().map_err(|e| Error::io("<forecast>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(n: usize, t: usize) -> MultivariateSeries {
        MultivariateSeries::from_rows(&(0..t).map(|i| (0..n).map(|s| (i * (s + 1)) as f64).collect()).collect::<Vec<_>>())
            .unwrap()
    }

    #[test]
    fn window_count_and_boundary() {
        let s = ramp(2, 100);
        assert_eq!(all_windows(&s, 24, 3).len(), 74);
        let w = all_windows(&s, 24, 24);
        assert_eq!(w.samples.last().unwrap().target_index, 99);
        assert_eq!(w.samples[0].window[1][23], 46.0);
        assert_eq!(w.samples[0].target[0], 47.0);
    }

    #[test]
    fn splits_are_chronological_without_leakage() {
        let s = ramp(3, 200);
        let sp = make_windows(&s, 24, 3, SplitFractions::default()).unwrap();
        let max_train = sp.train.samples.iter().map(|w| w.target_index).max().unwrap();
        let min_test = sp.test.samples.iter().map(|w| w.start).min().unwrap();
        assert!(max_train < min_test);
        assert!(max_train < sp.train_end);
        assert!(sp.valid.samples.iter().all(|w| w.target_index >= sp.train_end && w.target_index < sp.valid_end));
    }

    #[test]
    fn scaler_uses_training_span_only() {
        let s = ramp(1, 100);
        let sp = make_windows(&s, 5, 1, SplitFractions { train: 0.5, valid: 0.2 }).unwrap();
        // Train span 0..50 of the ramp 0,1,2,...: mean 24.5.
        assert!((sp.scaler.mean[0] - 24.5).abs() < 1e-12);
        let w = &sp.train.samples[0];
        assert!((sp.scaler.inverse(0, w.window[0][0]) - 0.0).abs() < 1e-12);
    }

    #[test]
    fn too_short_series_errors() {
        assert!(make_windows(&ramp(2, 30), 24, 3, SplitFractions::default()).is_err());
    }

    #[test]
    fn parses_whitespace_and_csv() {
        let a = MultivariateSeries::parse("1 2 3\n4 5 6\n").unwrap();
        assert_eq!((a.n_series(), a.len()), (3, 2));
        let b = MultivariateSeries::parse("a,b\n1,2\n3,4\n").unwrap();
        assert_eq!(b.names(), &["a", "b"]);
        assert_eq!(b.series(1), &[2.0, 4.0]);
        assert!(MultivariateSeries::parse("1,2\n3,x\n").is_err());
        assert!(MultivariateSeries::parse("1,2\n3\n").is_err());
    }

    #[test]
    fn forecast_csv_rows() {
        let mut buf = Vec::new();
        write_forecast_csv(&mut buf, &["a".into(), "b".into()], &[7], &[vec![1.5, 2.5]]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "timestamp,series,prediction\n7,a,1.5\n7,b,2.5\n");
    }
}

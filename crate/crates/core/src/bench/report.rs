//! Result tables and run manifests.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::metrics::Summary;
use super::stats::{paired_t_test, significance_marker};
use crate::error::{Error, Result};

/// Model-by-column table of formatted cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<(String, Vec<String>)>,
}

impl Table {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(std::iter::once("model").chain(self.columns.iter().map(String::as_str)))?;
        for (model, cells) in &self.rows {
            w.write_record(std::iter::once(model.as_str()).chain(cells.iter().map(String::as_str)))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_markdown(&self) -> String {
        let mut s = format!("| model | {} |\n|---|{}\n", self.columns.join(" | "), "---|".repeat(self.columns.len()));
        for (model, cells) in &self.rows {
            s += &format!("| {model} | {} |\n", cells.join(" | "));
        }
        s
    }
}

/// Per-model R² across datasets summarized as mean and 10/50/90 %
/// quantiles. The best model by median is compared with the runner-up by a
/// paired t-test over datasets, and the marker is appended to the best
/// model's median cell.
pub fn tabular_table(scores: &BTreeMap<String, Vec<f64>>) -> Result<Table> {
    let mut summaries: Vec<(String, Summary)> =
        scores.iter().map(|(m, v)| Ok((m.clone(), Summary::of(v)?))).collect::<Result<_>>()?;
    summaries.sort_by(|a, b| b.1.q50.total_cmp(&a.1.q50).then_with(|| a.0.cmp(&b.0)));
    let marker = match summaries.as_slice() {
        [best, second, ..] => match paired_t_test(&scores[&best.0], &scores[&second.0]) {
            Ok(t) => significance_marker(t.p),
            Err(e) => {
                log::warn!("no significance test: {e}");
                ""
            }
        },
        _ => "",
    };
    let rows = summaries
        .iter()
        .enumerate()
        .map(|(i, (m, s))| {
            let star = if i == 0 { marker } else { "" };
            (
                m.clone(),
                vec![
                    format!("{:.4}", s.q10),
                    format!("{:.4}{star}", s.q50),
                    format!("{:.4}", s.q90),
                    format!("{:.4}", s.mean),
                ],
            )
        })
        .collect();
    Ok(Table {
        title: "test R2 across datasets".into(),
        columns: vec!["q10".into(), "q50".into(), "q90".into(), "mean".into()],
        rows,
    })
}

/// One forecasting score: model, horizon, RSE and CORR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastEntry {
    pub model: String,
    pub horizon: usize,
    pub rse: f64,
    pub corr: f64,
}

fn cell(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.4}")
    } else {
        "-".into()
    }
}

/// Models as rows and `RSE@h`, `CORR@h` columns for every horizon present.
pub fn forecast_table(entries: &[ForecastEntry]) -> Table {
    let horizons: Vec<usize> = entries.iter().map(|e| e.horizon).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
    let models: Vec<String> = entries.iter().map(|e| e.model.clone()).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
    let mut columns = Vec::new();
    for h in &horizons {
        columns.push(format!("RSE@{h}"));
        columns.push(format!("CORR@{h}"));
    }
    let rows = models
        .into_iter()
        .map(|m| {
            let cells = horizons
                .iter()
                .flat_map(|&h| match entries.iter().find(|e| e.model == m && e.horizon == h) {
                    Some(e) => [cell(e.rse), cell(e.corr)],
                    None => ["-".into(), "-".into()],
                })
                .collect();
            (m, cells)
        })
        .collect();
    Table {
        title: "test RSE and CORR by horizon".into(),
        columns,
        rows,
    }
}

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

/// Record written next to every run's outputs: enough to replay the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub config_hash: String,
    pub dataset_hash: String,
    #[serde(default)]
    pub inputs: Vec<String>,
    #[serde(default)]
    pub diagram_hash: Option<String>,
    #[serde(default)]
    pub outputs: Vec<String>,
    #[serde(default)]
    pub metrics: serde_json::Value,
}

/// SHA-256 of the compact JSON encoding of a config.
pub fn config_hash<T: Serialize>(config: &T) -> Result<String> {
    let text = serde_json::to_string(config)?;
    Ok(hex::encode(Sha256::digest(text.as_bytes())))
}

impl RunManifest {
    pub fn new<T: Serialize>(command: &str, seed: u64, config: &T, dataset_hash: String) -> Result<Self> {
        Ok(RunManifest {
            schema_version: MANIFEST_SCHEMA_VERSION,
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed,
            config: serde_json::to_value(config)?,
            config_hash: config_hash(config)?,
            dataset_hash,
            inputs: Vec::new(),
            diagram_hash: None,
            outputs: Vec::new(),
            metrics: serde_json::Value::Null,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, serde_json::to_string_pretty(self)?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: RunManifest = serde_json::from_str(&text)?;
        if m.schema_version != MANIFEST_SCHEMA_VERSION {
            return Err(Error::Config(format!("unsupported manifest schema version {}", m.schema_version)));
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tabular_table_orders_by_median() {
        let mut s = BTreeMap::new();
        s.insert("mlp".to_string(), vec![0.5, 0.6, 0.55]);
        s.insert("hnn".to_string(), vec![0.7, 0.8, 0.72]);
        let t = tabular_table(&s).unwrap();
        assert_eq!(t.rows[0].0, "hnn");
        // differences 0.2, 0.2, 0.17 give t ≈ 19 on 2 df, p ≈ 0.003
        assert_eq!(t.rows[0].1[1], "0.7200*");
        assert!(t.to_csv().unwrap().starts_with("model,q10,q50,q90,mean\nhnn,"));
        assert!(t.to_markdown().contains("| hnn |"));
    }

    #[test]
    fn forecast_table_fills_gaps() {
        let e = [
            ForecastEntry { model: "hnn".into(), horizon: 3, rse: 0.1, corr: 0.9 },
            ForecastEntry { model: "persistence".into(), horizon: 6, rse: 0.5, corr: 0.7 },
        ];
        let t = forecast_table(&e);
        assert_eq!(t.columns, ["RSE@3", "CORR@3", "RSE@6", "CORR@6"]);
        assert_eq!(t.rows[0].1, ["0.1000", "0.9000", "-", "-"]);
    }

    #[test]
    fn config_hash_is_stable() {
        let a = config_hash(&crate::hnn::TrainConfig::default()).unwrap();
        assert_eq!(a, config_hash(&crate::hnn::TrainConfig::default()).unwrap());
        assert_eq!(a.len(), 64);
    }
}

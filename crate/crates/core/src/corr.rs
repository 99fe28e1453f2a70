//! Dataset ingestion, normalization and similarity-matrix estimation.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A named numeric column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub values: Vec<f64>,
}

impl Column {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Self {
        Column {
            name: name.into(),
            values,
        }
    }
}

/// Column-major numeric table with an optional regression target.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<Column>,
    target: Option<Column>,
    n_rows: usize,
}

impl Dataset {
    /// Builds a dataset, checking that every column (and the target) has the
    /// same length and holds only finite values.
    pub fn new(columns: Vec<Column>, target: Option<Column>) -> Result<Self> {
        let n_rows = columns
            .first()
            .map(|c| c.values.len())
            .or_else(|| target.as_ref().map(|t| t.values.len()))
            .unwrap_or(0);
        for c in columns.iter().chain(target.iter()) {
            if c.values.len() != n_rows {
                return Err(Error::Dimension(format!(
                    "column {:?} has {} rows, expected {}",
                    c.name,
                    c.values.len(),
                    n_rows
                )));
            }
            if let Some(i) = c.values.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!(
                    "column {:?}, row {}",
                    c.name,
                    i + 1
                )));
            }
        }
        Ok(Dataset {
            columns,
            target,
            n_rows,
        })
    }

    /// Builds a dataset from row-major feature rows, naming columns `x1..xp`.
    pub fn from_rows(rows: &[Vec<f64>], target: Option<Vec<f64>>) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        let mut columns: Vec<Column> = (0..p)
            .map(|j| Column::new(format!("x{}", j + 1), Vec::with_capacity(rows.len())))
            .collect();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != p {
                return Err(Error::Ragged {
                    row: i + 1,
                    found: row.len(),
                    expected: p,
                });
            }
            for (c, &v) in columns.iter_mut().zip(row) {
                c.values.push(v);
            }
        }
        Dataset::new(columns, target.map(|t| Column::new("y", t)))
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j].values
    }

    pub fn names(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.name.clone()).collect()
    }

    pub fn target(&self) -> Option<&[f64]> {
        self.target.as_ref().map(|t| t.values.as_slice())
    }

    pub fn target_name(&self) -> Option<&str> {
        self.target.as_ref().map(|t| t.name.as_str())
    }

    /// Row `i` as a feature vector.
    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c.values[i]).collect()
    }

    /// All feature rows, row-major.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n_rows).map(|i| self.row(i)).collect()
    }

    /// Sub-dataset containing the given rows, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Dataset {
        let pick = |c: &Column| Column::new(c.name.clone(), idx.iter().map(|&i| c.values[i]).collect());
        Dataset {
            columns: self.columns.iter().map(pick).collect(),
            target: self.target.as_ref().map(pick),
            n_rows: idx.len(),
        }
    }

    /// Sub-dataset containing only the named columns, in the given order.
    pub fn select_columns(&self, names: &[String]) -> Result<Dataset> {
        let columns = names
            .iter()
            .map(|n| {
                self.columns
                    .iter()
                    .find(|c| &c.name == n)
                    .cloned()
                    .ok_or_else(|| Error::Dimension(format!("column {n:?} not present")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset {
            columns,
            target: self.target.clone(),
            n_rows: self.n_rows,
        })
    }

    /// Stable content hash over names and the bit patterns of every value.
    pub fn content_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        for c in self.columns.iter().chain(self.target.iter()) {
            h.update(c.name.as_bytes());
            h.update([0u8]);
            for v in &c.values {
                h.update(v.to_bits().to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }
}

/// Reads a numeric CSV file. Column order is preserved; `target_column`, when
/// given, is split out as the regression target.
pub fn load_csv(path: impl AsRef<Path>, has_header: bool, target_column: Option<&str>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, has_header, target_column)
}

/// Same as [`load_csv`] over any reader.
pub fn read_csv<R: Read>(reader: R, has_header: bool, target_column: Option<&str>) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = rdr.records();

    let first = match records.next() {
        Some(r) => r?,
        None => return Err(Error::Empty("csv file has no rows".into())),
    };
    let width = first.len();
    let (names, mut pending) = if has_header {
        (first.iter().map(str::to_string).collect::<Vec<_>>(), None)
    } else {
        ((1..=width).map(|j| format!("x{j}")).collect(), Some(first))
    };
    let target_idx = match target_column {
        Some(t) => Some(
            names
                .iter()
                .position(|n| n == t)
                .ok_or_else(|| Error::Dimension(format!("target column {t:?} not found")))?,
        ),
        None => None,
    };

    let mut values: Vec<Vec<f64>> = vec![Vec::new(); width];
    let mut row = 0usize;
    loop {
        let rec = match pending.take() {
            Some(r) => r,
            None => match records.next() {
                Some(r) => r?,
                None => break,
            },
        };
        row += 1;
        // Blank trailing lines parse as a single empty field.
        if rec.len() == 1 && rec.get(0) == Some("") {
            continue;
        }
        if rec.len() != width {
            return Err(Error::Ragged {
                row,
                found: rec.len(),
                expected: width,
            });
        }
        for (j, field) in rec.iter().enumerate() {
            let v = field
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse {
                    row,
                    column: names[j].clone(),
                    value: field.to_string(),
                })?;
            values[j].push(v);
        }
    }
    if values.first().is_none_or(Vec::is_empty) {
        return Err(Error::Empty("csv file has no data rows".into()));
    }

    let mut columns = Vec::with_capacity(width);
    let mut target = None;
    for (j, (name, vals)) in names.into_iter().zip(values).enumerate() {
        if Some(j) == target_idx {
            target = Some(Column::new(name, vals));
        } else {
            columns.push(Column::new(name, vals));
        }
    }
    Dataset::new(columns, target)
}

/// Per-column mean and sample standard deviation used for z-scoring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationStats {
    pub names: Vec<String>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl NormalizationStats {
    /// Standardizes `ds` with these stats, keeping only the retained columns.
    pub fn apply(&self, ds: &Dataset) -> Result<Dataset> {
        let selected = ds.select_columns(&self.names)?;
        let columns = selected
            .columns
            .into_iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(c, (&m, &s))| Column::new(c.name, c.values.iter().map(|v| (v - m) / s).collect()))
            .collect();
        Dataset::new(columns, selected.target)
    }
}

pub(crate) fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    let std = if values.len() > 1 { (ss / (n - 1.0)).sqrt() } else { 0.0 };
    (mean, std)
}

// Relative threshold below which a column counts as constant.
const CONSTANT_TOL: f64 = 1e-12;

fn is_constant(mean: f64, std: f64) -> bool {
    std <= CONSTANT_TOL * mean.abs().max(1.0)
}

/// Standardizes every feature column to sample mean 0 and sample std 1.
/// Constant columns are dropped with a warning. The target is left untouched.
pub fn zscore(ds: &Dataset) -> Result<(Dataset, NormalizationStats)> {
    let mut stats = NormalizationStats {
        names: Vec::new(),
        mean: Vec::new(),
        std: Vec::new(),
    };
    let mut columns = Vec::new();
    for c in &ds.columns {
        let (m, s) = mean_std(&c.values);
        if is_constant(m, s) {
            log::warn!("dropping constant column {:?}", c.name);
            continue;
        }
        stats.names.push(c.name.clone());
        stats.mean.push(m);
        stats.std.push(s);
        columns.push(Column::new(c.name.clone(), c.values.iter().map(|v| (v - m) / s).collect()));
    }
    if columns.is_empty() {
        return Err(Error::AllConstant);
    }
    Ok((Dataset::new(columns, ds.target.clone())?, stats))
}

/// Whether correlations are used with their sign or in absolute value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimilarityVariant {
    Signed,
    #[default]
    Absolute,
}

impl std::str::FromStr for SimilarityVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "signed" => Ok(SimilarityVariant::Signed),
            "absolute" => Ok(SimilarityVariant::Absolute),
            other => Err(Error::Config(format!("unknown similarity variant {other:?}"))),
        }
    }
}

/// Symmetric p×p dependency weights with unit diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMatrix {
    pub dim: usize,
    pub labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl SimilarityMatrix {
    /// Wraps a square matrix of finite values. Symmetry is checked by
    /// [`SimilarityMatrix::check_symmetric`], not here, so that callers can
    /// hold and report on malformed user input.
    pub fn new(labels: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        let dim = values.len();
        if labels.len() != dim {
            return Err(Error::Dimension(format!("{} labels for a {dim}x{dim} matrix", labels.len())));
        }
        for (i, row) in values.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::Dimension(format!("row {i} has {} entries, expected {dim}", row.len())));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("similarity row {i}")));
            }
        }
        Ok(SimilarityMatrix { dim, labels, values })
    }

    /// Unlabelled matrix; labels default to `0..dim`.
    pub fn from_values(values: Vec<Vec<f64>>) -> Result<Self> {
        let labels = (0..values.len()).map(|i| i.to_string()).collect();
        SimilarityMatrix::new(labels, values)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    pub fn check_symmetric(&self) -> Result<()> {
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                let (a, b) = (self.values[i][j], self.values[j][i]);
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::NotSymmetric(i, j));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Pearson correlation between every pair of feature columns.
pub fn pearson_similarity(ds: &Dataset, variant: SimilarityVariant) -> Result<SimilarityMatrix> {
    if ds.n_rows() < 3 {
        return Err(Error::Degenerate(format!("need at least 3 rows, got {}", ds.n_rows())));
    }
    let p = ds.n_features();
    let mut centered = Vec::with_capacity(p);
    for c in &ds.columns {
        let (m, s) = mean_std(&c.values);
        if is_constant(m, s) {
            return Err(Error::ConstantColumn(c.name.clone()));
        }
        let dev: Vec<f64> = c.values.iter().map(|v| v - m).collect();
        let norm = dev.iter().map(|d| d * d).sum::<f64>().sqrt();
        centered.push((dev, norm));
    }
    let mut values = vec![vec![0.0; p]; p];
    for i in 0..p {
        values[i][i] = 1.0;
        for j in (i + 1)..p {
            let (a, na) = &centered[i];
            let (b, nb) = &centered[j];
            let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            let r = (dot / (na * nb)).clamp(-1.0, 1.0);
            let r = match variant {
                SimilarityVariant::Signed => r,
                SimilarityVariant::Absolute => r.abs(),
            };
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    SimilarityMatrix::new(ds.names(), values)
}

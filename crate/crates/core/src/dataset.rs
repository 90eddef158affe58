//! Loading, summarising, scaling and splitting the batting-statistics table.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::seed;

/// Feature columns in canonical order.
pub const FEATURE_NAMES: [&str; 16] = [
    "AtBat", "Hits", "HmRun", "Runs", "RBI", "Walks", "years", "CAtBat", "CHits", "CHmRun",
    "CRuns", "CRBI", "CWalks", "PutOuts", "Assists", "Errors",
];

pub const TARGET_NAME: &str = "score";

pub const N_FEATURES: usize = FEATURE_NAMES.len();

/// All 17 schema columns: the features followed by the target.
pub fn schema_columns() -> impl Iterator<Item = &'static str> {
    FEATURE_NAMES.iter().copied().chain(std::iter::once(TARGET_NAME))
}

/// Percentile levels reported by [`describe`].
pub const PERCENTILE_LEVELS: [u32; 9] = [1, 5, 10, 25, 50, 75, 90, 95, 99];

pub const DEFAULT_SPLIT_RATIO: f64 = 0.8;
pub const DEFAULT_SEED: u64 = 42;

/// The CSV contents bound to the schema, before rows with missing cells are dropped.
///
/// Cells are `None` where the file had a blank or `NA` value.
#[derive(Debug, Clone)]
pub struct RawTable {
    rows: Vec<[Option<f64>; N_FEATURES + 1]>,
}

impl RawTable {
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(file)
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);

        let headers = reader
            .headers()
            .map_err(|e| Error::Csv(e.to_string()))?
            .clone();
        let mut positions = [0usize; N_FEATURES + 1];
        let mut missing = Vec::new();
        for (slot, name) in schema_columns().enumerate() {
            match headers.iter().position(|h| h == name) {
                Some(pos) => positions[slot] = pos,
                None => missing.push(name.to_string()),
            }
        }
        if !missing.is_empty() {
            return Err(Error::Schema { missing });
        }

        let mut rows = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::Csv(e.to_string()))?;
            let mut row = [None; N_FEATURES + 1];
            for (slot, (&pos, name)) in positions.iter().zip(schema_columns()).enumerate() {
                let cell = record.get(pos).unwrap_or("");
                row[slot] = parse_cell(cell).ok_or_else(|| Error::Parse {
                    row: i + 1,
                    column: name.to_string(),
                    value: cell.to_string(),
                })?;
            }
            rows.push(row);
        }
        Ok(RawTable { rows })
    }

    /// Number of data rows in the file, including incomplete ones.
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    /// Observed (non-missing) values of one schema column.
    pub fn observed(&self, column: &str) -> Result<Vec<f64>> {
        let slot = schema_columns()
            .position(|c| c == column)
            .ok_or_else(|| Error::UnknownColumn(column.to_string()))?;
        Ok(self.rows.iter().filter_map(|r| r[slot]).collect())
    }

    /// Summary over the observed cells of `column`.
    pub fn describe(&self, column: &str) -> Result<ColumnSummary> {
        summarize(&self.observed(column)?)
    }

    /// Drops every row with a missing cell.
    pub fn into_dataset(self) -> Result<Dataset> {
        let raw = self.rows.len();
        let mut data = Vec::with_capacity(raw * N_FEATURES);
        let mut target = Vec::with_capacity(raw);
        for row in &self.rows {
            if row.iter().any(Option::is_none) {
                continue;
            }
            data.extend(row[..N_FEATURES].iter().map(|v| v.unwrap()));
            target.push(row[N_FEATURES].unwrap());
        }
        if target.is_empty() {
            return Err(Error::EmptyData);
        }
        let n = target.len();
        Ok(Dataset {
            feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
            features: Matrix::from_vec(n, N_FEATURES, data)?,
            target,
            n_dropped: raw - n,
        })
    }
}

/// `Some(None)` for a missing cell, `None` for an unparseable one.
fn parse_cell(cell: &str) -> Option<Option<f64>> {
    if cell.is_empty() || cell == "NA" {
        return Some(None);
    }
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Some(Some(v)),
        _ => None,
    }
}

/// Cleaned table: 16 feature columns and the `score` target.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    feature_names: Vec<String>,
    features: Matrix,
    target: Vec<f64>,
    n_dropped: usize,
}

impl Dataset {
    /// Builds a dataset directly from a 16-column matrix and a target vector.
    pub fn new(features: Matrix, target: Vec<f64>) -> Result<Self> {
        if features.n_cols() != N_FEATURES {
            return Err(Error::DimensionMismatch {
                expected: N_FEATURES,
                actual: features.n_cols(),
            });
        }
        if features.n_rows() != target.len() {
            return Err(Error::LengthMismatch {
                left: features.n_rows(),
                right: target.len(),
            });
        }
        if target.is_empty() {
            return Err(Error::EmptyData);
        }
        if !features.as_slice().iter().chain(&target).all(|v| v.is_finite()) {
            return Err(Error::InvalidConfig("dataset contains non-finite values".into()));
        }
        Ok(Dataset {
            feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
            features,
            target,
            n_dropped: 0,
        })
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn n_rows(&self) -> usize {
        self.target.len()
    }

    pub fn n_dropped(&self) -> usize {
        self.n_dropped
    }

    /// Values of a feature column or of the target.
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        if name == TARGET_NAME {
            return Ok(self.target.clone());
        }
        let j = self
            .feature_names
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))?;
        Ok(self.features.column(j))
    }

    /// Row-count plus a SHA-256 over every stored value, hex encoded.
    pub fn fingerprint(&self) -> Fingerprint {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        for v in self.features.as_slice().iter().chain(&self.target) {
            hasher.update(v.to_bits().to_le_bytes());
        }
        let digest = hasher.finalize();
        Fingerprint {
            n_rows: self.n_rows(),
            n_dropped: self.n_dropped,
            checksum: digest.iter().map(|b| format!("{b:02x}")).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub n_rows: usize,
    pub n_dropped: usize,
    pub checksum: String,
}

/// Reads and cleans a Table-1 CSV.
pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    RawTable::read_csv(path)?.into_dataset()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSummary {
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation (denominator n − 1); 0 for a single value.
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub percentiles: BTreeMap<u32, f64>,
}

impl ColumnSummary {
    pub fn percentile(&self, level: u32) -> Option<f64> {
        self.percentiles.get(&level).copied()
    }
}

/// Descriptive statistics of one column of a cleaned dataset.
pub fn describe(dataset: &Dataset, column: &str) -> Result<ColumnSummary> {
    summarize(&dataset.column(column)?)
}

/// Count, mean, sample std, extremes and linearly interpolated percentiles.
pub fn summarize(values: &[f64]) -> Result<ColumnSummary> {
    if values.is_empty() {
        return Err(Error::EmptyData);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let (min, max) = (sorted[0], sorted[n - 1]);

    let (mean, std) = if min == max {
        (min, 0.0)
    } else {
        let mean = values.iter().sum::<f64>() / n as f64;
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        (mean, (ss / (n - 1) as f64).sqrt())
    };

    let percentiles = PERCENTILE_LEVELS
        .iter()
        .map(|&p| (p, interpolate_sorted(&sorted, p as f64 / 100.0)))
        .collect();

    Ok(ColumnSummary {
        count: n,
        mean,
        std,
        min,
        max,
        percentiles,
    })
}

/// Quantile `q` of sorted data at fractional rank `q·(n−1)`.
fn interpolate_sorted(sorted: &[f64], q: f64) -> f64 {
    let rank = q * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    let v = sorted[lo] + frac * (sorted[hi] - sorted[lo]);
    // keep interpolation inside the bracketing order statistics under rounding
    v.clamp(sorted[lo], sorted[hi])
}

/// Per-column z-score transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    /// Strictly positive; zero-variance columns store 1.0.
    pub std: Vec<f64>,
    pub fitted_on: Vec<usize>,
}

impl Scaler {
    /// Fits over exactly the listed rows of `matrix`.
    pub fn fit(matrix: &Matrix, rows: &[usize]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyIndexSet);
        }
        if let Some(&bad) = rows.iter().find(|&&i| i >= matrix.n_rows()) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                n_rows: matrix.n_rows(),
            });
        }
        let n = rows.len() as f64;
        let cols = matrix.n_cols();
        let mut mean = vec![0.0; cols];
        let mut std = vec![1.0; cols];
        for j in 0..cols {
            let first = matrix.get(rows[0], j);
            if rows.iter().all(|&i| matrix.get(i, j) == first) {
                mean[j] = first;
                continue;
            }
            let m = rows.iter().map(|&i| matrix.get(i, j)).sum::<f64>() / n;
            let ss: f64 = rows
                .iter()
                .map(|&i| {
                    let d = matrix.get(i, j) - m;
                    d * d
                })
                .sum();
            mean[j] = m;
            let s = (ss / (n - 1.0)).sqrt();
            std[j] = if s > 0.0 { s } else { 1.0 };
        }
        let mut fitted_on = rows.to_vec();
        fitted_on.sort_unstable();
        fitted_on.dedup();
        Ok(Scaler {
            mean,
            std,
            fitted_on,
        })
    }

    pub fn identity(cols: usize) -> Self {
        Scaler {
            mean: vec![0.0; cols],
            std: vec![1.0; cols],
            fitted_on: Vec::new(),
        }
    }

    pub fn n_cols(&self) -> usize {
        self.mean.len()
    }

    pub fn transform(&self, matrix: &Matrix) -> Result<Matrix> {
        apply_scaler(self, matrix)
    }
}

pub fn fit_scaler(dataset: &Dataset, rows: &[usize]) -> Result<Scaler> {
    Scaler::fit(dataset.features(), rows)
}

/// Returns `(x − mean) / std` column-wise as a new matrix.
pub fn apply_scaler(scaler: &Scaler, matrix: &Matrix) -> Result<Matrix> {
    if matrix.n_cols() != scaler.n_cols() {
        return Err(Error::DimensionMismatch {
            expected: scaler.n_cols(),
            actual: matrix.n_cols(),
        });
    }
    let mut out = matrix.clone();
    for i in 0..out.n_rows() {
        for (j, v) in out.row_mut(i).iter_mut().enumerate() {
            *v = (*v - scaler.mean[j]) / scaler.std[j];
        }
    }
    Ok(out)
}

/// Holdout partition of `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub train_indices: Vec<usize>,
    pub validation_indices: Vec<usize>,
    pub seed: u64,
    /// Stored as the bit pattern so the plan stays `Eq`.
    ratio_bits: u64,
}

impl SplitPlan {
    pub fn ratio(&self) -> f64 {
        f64::from_bits(self.ratio_bits)
    }

    /// A plan from explicit index lists (checked for disjointness and coverage of `0..n`).
    pub fn from_indices(train: Vec<usize>, validation: Vec<usize>) -> Result<Self> {
        let n = train.len() + validation.len();
        if train.is_empty() || validation.is_empty() {
            return Err(Error::DegenerateSplit {
                train: train.len(),
                validation: validation.len(),
            });
        }
        let mut seen = vec![false; n];
        for &i in train.iter().chain(&validation) {
            if i >= n || seen[i] {
                return Err(Error::IndexOutOfRange { index: i, n_rows: n });
            }
            seen[i] = true;
        }
        let ratio = train.len() as f64 / n as f64;
        Ok(SplitPlan {
            train_indices: train,
            validation_indices: validation,
            seed: 0,
            ratio_bits: ratio.to_bits(),
        })
    }
}

/// Seeded shuffle of `0..n`; the first `⌈ratio·n⌉` indices train.
pub fn split(n: usize, ratio: f64, seed: u64) -> Result<SplitPlan> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "split ratio must lie in (0, 1), got {ratio}"
        )));
    }
    // absorb representation error, e.g. 0.7 * 10 = 7.000000000000001
    let n_train = ((ratio * n as f64) - 1e-9).ceil().max(0.0) as usize;
    let n_train = n_train.min(n);
    if n_train == 0 || n_train == n {
        return Err(Error::DegenerateSplit {
            train: n_train,
            validation: n - n_train,
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seed::stream(seed, "holdout", 0));
    let validation_indices = order.split_off(n_train);
    Ok(SplitPlan {
        train_indices: order,
        validation_indices,
        seed,
        ratio_bits: ratio.to_bits(),
    })
}

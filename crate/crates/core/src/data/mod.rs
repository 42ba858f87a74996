//! Sensor dataset ingestion, splitting, and standardization.
//!
//! The on-disk format is a comma-delimited CSV with a fixed 19-column header:
//! date, time, sixteen numeric sensor channels, and an integer occupancy
//! count in `{0,1,2,3}`. Date and time are kept as opaque strings for the
//! EDA module (row order carries the temporal structure); they are never
//! part of the model feature set.

mod synthetic;

pub use synthetic::generate_synthetic;

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::FeatureMatrix;
use crate::rng::{shuffle, stream_rng};

/// The sixteen model features, in CSV column order.
pub const FEATURE_NAMES: [&str; 16] = [
    "S1_Temp", "S2_Temp", "S3_Temp", "S4_Temp", "S1_Light", "S2_Light", "S3_Light", "S4_Light",
    "S1_Sound", "S2_Sound", "S3_Sound", "S4_Sound", "S5_CO2", "S5_CO2_Slope", "S6_PIR", "S7_PIR",
];

/// Target column name.
pub const LABEL_NAME: &str = "Room_Occupancy_Count";

/// Number of occupancy classes (counts 0 through 3).
pub const NUM_CLASSES: usize = 4;

/// Indices of the two binary PIR channels within [`FEATURE_NAMES`].
pub const PIR_FEATURES: [usize; 2] = [14, 15];

/// The full 19-column header, in required order.
pub fn expected_header() -> Vec<&'static str> {
    let mut h = vec!["Date", "Time"];
    h.extend(FEATURE_NAMES);
    h.push(LABEL_NAME);
    h
}

#[derive(Debug, Error)]
pub enum DataError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv parse error: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing or misnamed column: expected {expected:?} at position {position}, found {found:?}")]
    MissingColumn {
        expected: String,
        position: usize,
        found: Option<String>,
    },
    #[error("non-numeric value {value:?} at row {row}, column {column}")]
    NonNumericValue {
        row: usize,
        column: String,
        value: String,
    },
    #[error("missing value at row {row}, column {column}")]
    MissingValue { row: usize, column: String },
    #[error("label {value} out of range 0..{} at row {row}", NUM_CLASSES - 1)]
    LabelOutOfRange { row: usize, value: i64 },
    #[error("PIR column {column} must be 0 or 1, found {value} at row {row}")]
    NonBinaryPir {
        row: usize,
        column: String,
        value: f64,
    },
    #[error("test fraction must lie strictly between 0 and 1, got {0}")]
    BadTestFraction(f64),
    #[error("class {class} has only {count} rows; stratified splitting needs at least 2")]
    DegenerateClass { class: usize, count: usize },
    #[error("empty training selection")]
    EmptyTrainingSet,
    #[error("synthetic generator needs at least 100 rows, got {0}")]
    TooFewSyntheticRows(usize),
    #[error("dataset needs at least 2 rows to split")]
    EmptyDataset,
}

/// One timestamped sensor reading with its occupancy label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorRecord {
    pub date: String,
    pub time: String,
    pub features: [f64; 16],
    pub label: usize,
}

/// An ordered collection of records; order equals file order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub records: Vec<SensorRecord>,
    pub feature_names: Vec<String>,
}

impl Dataset {
    pub fn n_rows(&self) -> usize {
        self.records.len()
    }

    /// Design matrix over all rows (16 columns, raw values).
    pub fn features(&self) -> FeatureMatrix {
        let mut m = FeatureMatrix::zeros(self.records.len(), 16);
        for (i, r) in self.records.iter().enumerate() {
            m.row_mut(i).copy_from_slice(&r.features);
        }
        m
    }

    pub fn labels(&self) -> Vec<usize> {
        self.records.iter().map(|r| r.label).collect()
    }

    /// Per-class row counts over `0..NUM_CLASSES`.
    pub fn class_counts(&self) -> [usize; NUM_CLASSES] {
        let mut counts = [0usize; NUM_CLASSES];
        for r in &self.records {
            counts[r.label] += 1;
        }
        counts
    }

    /// Numeric column by name: any feature or the label. `None` if unknown.
    pub fn numeric_column(&self, name: &str) -> Option<Vec<f64>> {
        if name == LABEL_NAME {
            return Some(self.records.iter().map(|r| r.label as f64).collect());
        }
        let idx = FEATURE_NAMES.iter().position(|&f| f == name)?;
        Some(self.records.iter().map(|r| r.features[idx]).collect())
    }

    /// All numeric column names: the 16 features plus the label.
    pub fn numeric_column_names() -> Vec<&'static str> {
        let mut names: Vec<&'static str> = FEATURE_NAMES.to_vec();
        names.push(LABEL_NAME);
        names
    }

    /// Writes the dataset back out in the ingestion CSV format.
    ///
    /// Values round-trip exactly: floats are rendered with the shortest
    /// representation that parses back to the same bits.
    pub fn save_csv(&self, path: &Path) -> Result<(), DataError> {
        let mut out = String::new();
        out.push_str(&expected_header().join(","));
        out.push('\n');
        for r in &self.records {
            out.push_str(&r.date);
            out.push(',');
            out.push_str(&r.time);
            for v in r.features {
                let _ = write!(out, ",{v}");
            }
            let _ = writeln!(out, ",{}", r.label);
        }
        std::fs::write(path, out).map_err(|source| DataError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

/// Parses and validates the sensor CSV at `path`.
pub fn load_dataset(path: &Path) -> Result<Dataset, DataError> {
    let file = std::fs::File::open(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);

    let header = reader.headers()?.clone();
    let expected = expected_header();
    if header.len() != expected.len() {
        return Err(DataError::MissingColumn {
            expected: format!("exactly {} columns", expected.len()),
            position: expected.len().min(header.len()),
            found: header.get(expected.len()).map(str::to_string),
        });
    }
    for (position, want) in expected.iter().enumerate() {
        match header.get(position) {
            Some(found) if found == *want => {}
            found => {
                return Err(DataError::MissingColumn {
                    expected: want.to_string(),
                    position,
                    found: found.map(str::to_string),
                })
            }
        }
    }

    let mut records = Vec::new();
    for (row_idx, row) in reader.records().enumerate() {
        let row = row?;
        // 1-based data row number in error reports, matching editor views
        // of the file body (header excluded).
        let rownum = row_idx + 1;
        let cell = |pos: usize| -> Result<&str, DataError> {
            row.get(pos).ok_or(DataError::MissingValue {
                row: rownum,
                column: expected[pos.min(expected.len() - 1)].to_string(),
            })
        };

        let date = cell(0)?.to_string();
        let time = cell(1)?.to_string();

        let mut features = [0.0f64; 16];
        for (k, slot) in features.iter_mut().enumerate() {
            let pos = k + 2;
            let raw = cell(pos)?.trim();
            if raw.is_empty() || raw.eq_ignore_ascii_case("na") || raw.eq_ignore_ascii_case("nan") {
                return Err(DataError::MissingValue {
                    row: rownum,
                    column: expected[pos].to_string(),
                });
            }
            let value: f64 = raw.parse().map_err(|_| DataError::NonNumericValue {
                row: rownum,
                column: expected[pos].to_string(),
                value: raw.to_string(),
            })?;
            if !value.is_finite() {
                return Err(DataError::MissingValue {
                    row: rownum,
                    column: expected[pos].to_string(),
                });
            }
            *slot = value;
        }
        for pir in PIR_FEATURES {
            let v = features[pir];
            if v != 0.0 && v != 1.0 {
                return Err(DataError::NonBinaryPir {
                    row: rownum,
                    column: FEATURE_NAMES[pir].to_string(),
                    value: v,
                });
            }
        }

        let raw_label = cell(18)?.trim();
        let label: i64 = raw_label.parse().map_err(|_| DataError::NonNumericValue {
            row: rownum,
            column: LABEL_NAME.to_string(),
            value: raw_label.to_string(),
        })?;
        if !(0..NUM_CLASSES as i64).contains(&label) {
            return Err(DataError::LabelOutOfRange { row: rownum, value: label });
        }

        records.push(SensorRecord { date, time, features, label: label as usize });
    }

    Ok(Dataset {
        records,
        feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
    })
}

/// A train/test partition of row indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub seed: u64,
    pub test_fraction: f64,
    pub stratified: bool,
}

/// Partitions the dataset into train and test index sets.
///
/// Stratified mode holds each class's test count within one row of
/// `test_fraction * class_count`: per-class quotas are floored and the
/// leftover rows (to reach `round(test_fraction * n)`) go to the classes
/// with the largest fractional parts, ties to the lower class index.
/// Deterministic for a fixed `(seed, test_fraction, stratified)`.
pub fn split(
    dataset: &Dataset,
    test_fraction: f64,
    seed: u64,
    stratified: bool,
) -> Result<Split, DataError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(DataError::BadTestFraction(test_fraction));
    }
    let n = dataset.n_rows();
    if n < 2 {
        return Err(DataError::EmptyDataset);
    }

    let mut train_indices = Vec::new();
    let mut test_indices = Vec::new();

    if stratified {
        let mut per_class: Vec<Vec<usize>> = vec![Vec::new(); NUM_CLASSES];
        for (i, r) in dataset.records.iter().enumerate() {
            per_class[r.label].push(i);
        }
        for (class, members) in per_class.iter().enumerate() {
            if !members.is_empty() && members.len() < 2 {
                return Err(DataError::DegenerateClass { class, count: members.len() });
            }
        }

        let target_total = (test_fraction * n as f64).round() as usize;
        let quotas: Vec<f64> = per_class.iter().map(|m| test_fraction * m.len() as f64).collect();
        let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
        let mut leftover = target_total.saturating_sub(counts.iter().sum::<usize>());
        // largest fractional part first, ties to the lower class index
        let mut order: Vec<usize> = (0..NUM_CLASSES).filter(|&c| !per_class[c].is_empty()).collect();
        order.sort_by(|&a, &b| {
            let fa = quotas[a] - quotas[a].floor();
            let fb = quotas[b] - quotas[b].floor();
            fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
        });
        for &c in &order {
            if leftover == 0 {
                break;
            }
            if counts[c] < per_class[c].len() {
                counts[c] += 1;
                leftover -= 1;
            }
        }

        for (class, members) in per_class.iter().enumerate() {
            if members.is_empty() {
                continue;
            }
            let mut shuffled = members.clone();
            shuffle(&mut shuffled, &mut stream_rng(seed, 1 + class as u64));
            let (test_part, train_part) = shuffled.split_at(counts[class]);
            test_indices.extend_from_slice(test_part);
            train_indices.extend_from_slice(train_part);
        }
    } else {
        let mut indices: Vec<usize> = (0..n).collect();
        shuffle(&mut indices, &mut stream_rng(seed, 0));
        let n_test = (test_fraction * n as f64).round() as usize;
        let n_test = n_test.clamp(1, n - 1);
        test_indices = indices[..n_test].to_vec();
        train_indices = indices[n_test..].to_vec();
    }

    train_indices.sort_unstable();
    test_indices.sort_unstable();
    Ok(Split { train_indices, test_indices, seed, test_fraction, stratified })
}

/// Per-feature standardization statistics, fitted on training rows only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    /// Features whose population std fell below 1e-12 (std clamped to 1, so
    /// they transform to 0 everywhere).
    pub constant_features: Vec<usize>,
}

/// Fits a standard scaler (population std) on the selected training rows.
pub fn fit_scaler(features: &FeatureMatrix, train_indices: &[usize]) -> Result<Scaler, DataError> {
    if train_indices.is_empty() {
        return Err(DataError::EmptyTrainingSet);
    }
    let d = features.n_cols();
    let n = train_indices.len() as f64;
    let mut means = vec![0.0; d];
    for &i in train_indices {
        for (j, m) in means.iter_mut().enumerate() {
            *m += features.get(i, j);
        }
    }
    for m in means.iter_mut() {
        *m /= n;
    }
    let mut stds = vec![0.0; d];
    for &i in train_indices {
        for (j, s) in stds.iter_mut().enumerate() {
            let dlt = features.get(i, j) - means[j];
            *s += dlt * dlt;
        }
    }
    let mut constant_features = Vec::new();
    for (j, s) in stds.iter_mut().enumerate() {
        *s = (*s / n).sqrt();
        if *s < 1e-12 {
            *s = 1.0;
            constant_features.push(j);
        }
    }
    Ok(Scaler { means, stds, constant_features })
}

/// Applies `(x - mean) / std` per feature.
pub fn apply_scaler(scaler: &Scaler, rows: &FeatureMatrix) -> FeatureMatrix {
    let mut out = rows.clone();
    for i in 0..out.n_rows() {
        let row = out.row_mut(i);
        for (j, v) in row.iter_mut().enumerate() {
            *v = (*v - scaler.means[j]) / scaler.stds[j];
        }
    }
    out
}

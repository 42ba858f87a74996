//! Temporal-redundancy analysis: per-column summary statistics, lag-1
//! autocorrelation, the Pearson correlation matrix over all numeric columns,
//! per-column time-series export, and a least-squares fit of occupancy on
//! the CO2 slope.
//!
//! Everything here runs over rows in file order; the autocorrelation results
//! are meaningless on shuffled data.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::Dataset;

#[derive(Debug, Error)]
pub enum EdaError {
    #[error("empty selection")]
    EmptySelection,
    #[error("series is constant; coefficient undefined")]
    ConstantSeries,
    #[error("series too short: need at least {need}, got {got}")]
    TooShort { need: usize, got: usize },
    #[error("series lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("regressor is constant; least-squares fit undefined")]
    ConstantRegressor,
    #[error("unknown column {0:?}")]
    UnknownColumn(String),
}

/// Five-number summary plus count, mean, and sample std for one column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesStats {
    pub name: String,
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation (n-1 denominator), the convention used by
    /// typical dataframe `describe` output.
    pub std: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// Full analysis bundle over one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdaReport {
    pub stats: Vec<SeriesStats>,
    /// `(column, lag-1 coefficient)` for every numeric column including the
    /// label; `None` when the column is constant.
    pub autocorr: Vec<(String, Option<f64>)>,
    pub corr_columns: Vec<String>,
    /// Pearson matrix over the columns above; `None` marks pairs involving a
    /// constant column.
    pub corr: Vec<Vec<Option<f64>>>,
    pub ols_intercept: f64,
    pub ols_slope: f64,
}

/// Quantile by linear interpolation between order statistics
/// (position `(n-1) * p`).
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = (n - 1) as f64 * p;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Summary statistics for one series.
pub fn summary_stats(name: &str, values: &[f64]) -> Result<SeriesStats, EdaError> {
    if values.is_empty() {
        return Err(EdaError::EmptySelection);
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    let std = if n > 1 { (ss / (n - 1) as f64).sqrt() } else { 0.0 };
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(SeriesStats {
        name: name.to_string(),
        count: n,
        mean,
        std,
        min: sorted[0],
        q1: quantile(&sorted, 0.25),
        median: quantile(&sorted, 0.5),
        q3: quantile(&sorted, 0.75),
        max: sorted[n - 1],
    })
}

/// Sample autocorrelation at lag 1:
/// `r1 = sum_{t<n-1} (x_t - m)(x_{t+1} - m) / sum_t (x_t - m)^2`
/// with `m` the full-series mean and rows in file order.
pub fn lag1_autocorrelation(series: &[f64]) -> Result<f64, EdaError> {
    let n = series.len();
    if n < 3 {
        return Err(EdaError::TooShort { need: 3, got: n });
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let denom: f64 = series.iter().map(|x| (x - mean) * (x - mean)).sum();
    if denom < 1e-300 {
        return Err(EdaError::ConstantSeries);
    }
    let numer: f64 = series.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum();
    Ok(numer / denom)
}

/// Pearson correlation of two equal-length series; `None` if either is
/// constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<Option<f64>, EdaError> {
    if x.len() != y.len() {
        return Err(EdaError::LengthMismatch(x.len(), y.len()));
    }
    if x.is_empty() {
        return Err(EdaError::EmptySelection);
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx < 1e-300 || syy < 1e-300 {
        return Ok(None);
    }
    Ok(Some(sxy / (sxx * syy).sqrt()))
}

/// Pearson matrix over every numeric column (16 features plus the label).
/// Constant columns produce `None` in their row and column.
pub fn correlation_matrix(dataset: &Dataset) -> (Vec<String>, Vec<Vec<Option<f64>>>) {
    let names = Dataset::numeric_column_names();
    let columns: Vec<Vec<f64>> = names
        .iter()
        .map(|n| dataset.numeric_column(n).expect("known column"))
        .collect();
    let k = names.len();
    let mut matrix = vec![vec![None; k]; k];
    for i in 0..k {
        for j in i..k {
            let r = if i == j {
                let constant = pearson(&columns[i], &columns[i]).unwrap_or(None).is_none();
                if constant { None } else { Some(1.0) }
            } else {
                pearson(&columns[i], &columns[j]).unwrap_or(None)
            };
            matrix[i][j] = r;
            matrix[j][i] = r;
        }
    }
    (names.into_iter().map(str::to_string).collect(), matrix)
}

/// Simple least squares of `y` on `x`; returns `(intercept, slope)`.
pub fn ols_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64), EdaError> {
    if x.len() != y.len() {
        return Err(EdaError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(EdaError::TooShort { need: 2, got: x.len() });
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx < 1e-300 {
        return Err(EdaError::ConstantRegressor);
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Ok((my - slope * mx, slope))
}

/// `(row_index, value)` pairs for one column, in file order.
pub fn time_series(dataset: &Dataset, column: &str) -> Result<Vec<(usize, f64)>, EdaError> {
    let values = dataset
        .numeric_column(column)
        .ok_or_else(|| EdaError::UnknownColumn(column.to_string()))?;
    Ok(values.into_iter().enumerate().collect())
}

/// Runs the whole analysis over all rows of the dataset.
pub fn eda_report(dataset: &Dataset) -> Result<EdaReport, EdaError> {
    if dataset.n_rows() == 0 {
        return Err(EdaError::EmptySelection);
    }
    let names = Dataset::numeric_column_names();
    let mut stats = Vec::new();
    let mut autocorr = Vec::new();
    for name in &names {
        let col = dataset.numeric_column(name).expect("known column");
        stats.push(summary_stats(name, &col)?);
        let r1 = match lag1_autocorrelation(&col) {
            Ok(v) => Some(v),
            Err(EdaError::ConstantSeries) => None,
            Err(e) => return Err(e),
        };
        autocorr.push((name.to_string(), r1));
    }
    let (corr_columns, corr) = correlation_matrix(dataset);
    let x = dataset.numeric_column("S5_CO2_Slope").expect("known column");
    let y = dataset.numeric_column(crate::data::LABEL_NAME).expect("known column");
    let (ols_intercept, ols_slope) = ols_fit(&x, &y)?;
    Ok(EdaReport { stats, autocorr, corr_columns, corr, ols_intercept, ols_slope })
}

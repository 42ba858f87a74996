//! Default hyperparameter grids.
//!
//! The full profile carries the benchmark-scale candidate counts
//! (1, 3, 3, 4, 240, 1152, 400, 8 across the model kinds, i.e. 5x that in
//! fits under 5-fold CV); the fast profile caps every grid at 8 candidates
//! for desk-scale runs and CI.

use super::HyperGrid;
use crate::models::{ModelKind, ParamValue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridProfile {
    Full,
    Fast,
}

fn floats(values: &[f64]) -> Vec<ParamValue> {
    values.iter().map(|&v| ParamValue::Float(v)).collect()
}

fn ints(values: &[i64]) -> Vec<ParamValue> {
    values.iter().map(|&v| ParamValue::Int(v)).collect()
}

fn texts(values: &[&str]) -> Vec<ParamValue> {
    values.iter().map(|v| ParamValue::Text(v.to_string())).collect()
}

fn int_lists(values: &[&[i64]]) -> Vec<ParamValue> {
    values.iter().map(|v| ParamValue::IntList(v.to_vec())).collect()
}

pub fn default_grid(kind: ModelKind, profile: GridProfile) -> HyperGrid {
    match profile {
        GridProfile::Full => full_grid(kind),
        GridProfile::Fast => fast_grid(kind),
    }
}

fn full_grid(kind: ModelKind) -> HyperGrid {
    let axes = match kind {
        ModelKind::Benchmark => vec![],
        // 3 candidates -> 15 fits
        ModelKind::Logistic => vec![
            ("l2".to_string(), floats(&[1e-4, 1e-3, 1e-2])),
            ("max_iters".to_string(), ints(&[400])),
        ],
        // 3 candidates -> 15 fits
        ModelKind::Lda => vec![("shrinkage".to_string(), floats(&[0.0, 0.1, 0.3]))],
        // 4 candidates -> 20 fits
        ModelKind::Svm => vec![
            ("c_reg".to_string(), floats(&[1.0, 10.0])),
            ("kernel".to_string(), texts(&["linear", "rff"])),
            ("gamma".to_string(), floats(&[0.0625])),
            ("rff_features".to_string(), ints(&[256])),
            ("max_epochs".to_string(), ints(&[12])),
        ],
        // 4 * 5 * 4 * 3 = 240 candidates -> 1200 fits
        ModelKind::RandomForest => vec![
            ("n_trees".to_string(), ints(&[50, 100, 200, 400])),
            ("max_depth".to_string(), ints(&[0, 8, 12, 16, 24])),
            ("min_samples_leaf".to_string(), ints(&[1, 2, 5, 10])),
            ("max_features".to_string(), ints(&[3, 4, 6])),
        ],
        // 4 * 3 * 4 * 6 * 2 * 2 = 1152 candidates -> 5760 fits
        ModelKind::GbtLevel => vec![
            ("max_depth".to_string(), ints(&[3, 4, 6, 8])),
            ("n_rounds".to_string(), ints(&[50, 100, 200])),
            ("learning_rate".to_string(), floats(&[0.05, 0.1, 0.2, 0.3])),
            ("lambda".to_string(), floats(&[0.0, 1e-3, 1e-2, 0.1, 1.0, 10.0])),
            ("min_child_weight".to_string(), floats(&[1.0, 5.0])),
            ("min_split_gain".to_string(), floats(&[0.0, 0.1])),
        ],
        // 2 * 5 * 4 * 5 * 2 = 400 candidates -> 2000 fits
        ModelKind::GbtLeaf => vec![
            ("n_rounds".to_string(), ints(&[50, 100])),
            ("num_leaves".to_string(), ints(&[15, 31, 63, 127, 255])),
            ("learning_rate".to_string(), floats(&[0.05, 0.1, 0.2, 0.3])),
            ("lambda".to_string(), floats(&[0.0, 1e-3, 0.1, 1.0, 10.0])),
            ("min_child_weight".to_string(), floats(&[1e-3, 1.0])),
        ],
        // 2 * 2 * 2 = 8 candidates -> 40 fits
        ModelKind::Mlp => vec![
            ("hidden_sizes".to_string(), int_lists(&[&[32], &[64]])),
            ("lr".to_string(), floats(&[1e-3, 3e-3])),
            ("l2".to_string(), floats(&[1e-4, 1e-3])),
            ("epochs".to_string(), ints(&[60])),
        ],
    };
    HyperGrid::new(kind, axes)
}

fn fast_grid(kind: ModelKind) -> HyperGrid {
    let axes = match kind {
        ModelKind::Benchmark => vec![],
        ModelKind::Logistic => vec![
            ("l2".to_string(), floats(&[1e-4, 1e-3, 1e-2])),
            ("max_iters".to_string(), ints(&[300])),
        ],
        ModelKind::Lda => vec![("shrinkage".to_string(), floats(&[0.0, 0.1, 0.3]))],
        ModelKind::Svm => vec![
            ("c_reg".to_string(), floats(&[1.0, 10.0])),
            ("kernel".to_string(), texts(&["linear", "rff"])),
            ("gamma".to_string(), floats(&[0.0625])),
            ("rff_features".to_string(), ints(&[192])),
            ("max_epochs".to_string(), ints(&[10])),
        ],
        ModelKind::RandomForest => vec![
            ("n_trees".to_string(), ints(&[120])),
            ("max_depth".to_string(), ints(&[0])),
            ("min_samples_leaf".to_string(), ints(&[1, 2])),
            ("max_features".to_string(), ints(&[4, 6])),
        ],
        ModelKind::GbtLevel => vec![
            ("max_depth".to_string(), ints(&[3, 4])),
            ("n_rounds".to_string(), ints(&[40])),
            ("learning_rate".to_string(), floats(&[0.2])),
            ("lambda".to_string(), floats(&[1.0])),
        ],
        ModelKind::GbtLeaf => vec![
            ("num_leaves".to_string(), ints(&[15, 31])),
            ("n_rounds".to_string(), ints(&[40])),
            ("learning_rate".to_string(), floats(&[0.2])),
            ("lambda".to_string(), floats(&[1.0])),
        ],
        ModelKind::Mlp => vec![
            ("hidden_sizes".to_string(), int_lists(&[&[32]])),
            ("lr".to_string(), floats(&[2e-3, 5e-3])),
            ("l2".to_string(), floats(&[1e-4])),
            ("epochs".to_string(), ints(&[30])),
            ("batch_size".to_string(), ints(&[256])),
        ],
    };
    HyperGrid::new(kind, axes)
}

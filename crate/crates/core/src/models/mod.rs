//! Seven learners behind one classifier contract.
//!
//! Every model fits from a feature matrix, integer labels in
//! `0..num_classes`, a hyperparameter map, and a seed, and predicts a
//! row-stochastic class-probability matrix. `predict` is the row argmax
//! with ties to the lowest class index. Fits are deterministic per seed and
//! independent of thread count: parallel units derive their own RNG streams
//! and reductions run in fixed order.

mod forest;
mod gbt;
mod lda;
mod majority;
mod mlp;
mod softmax;
mod svm;
mod tree;

pub use forest::{ForestModel, ForestParams};
pub use gbt::{GbtModel, GbtParams, Growth};
pub use lda::{LdaModel, LdaParams};
pub use majority::MajorityModel;
pub use mlp::{init_layers, mlp_loss_and_gradient, MlpModel, MlpParams};
pub use softmax::{softmax_loss_and_gradient, SoftmaxModel, SoftmaxParams};
pub use svm::{SvmKernel, SvmModel, SvmParams};
pub use tree::{fit_decision_tree, DecisionTree, TreeParams};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::{argmax, FeatureMatrix, ProbMatrix};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("empty label vector")]
    EmptyLabels,
    #[error("label {label} out of range for {num_classes} classes")]
    LabelOutOfRange { label: usize, num_classes: usize },
    #[error("feature matrix has {x_rows} rows but {y_len} labels")]
    ShapeMismatch { x_rows: usize, y_len: usize },
    #[error("hyperparameter {name:?}: {reason}")]
    InvalidParam { name: String, reason: String },
    #[error("unknown hyperparameter {name:?} for model {kind:?}")]
    UnknownParam { name: String, kind: String },
    #[error("training loss became non-finite ({context}); lower the learning rate")]
    NonFiniteLoss { context: String },
    #[error("non-finite gradient or hessian during boosting")]
    NonFiniteGradient,
    #[error("pooled covariance is singular; use shrinkage > 0")]
    SingularCovariance,
    #[error("need at least 2 classes present, found {0}")]
    TooFewClasses(usize),
}

/// The eight model kinds of the benchmark suite (seven learners plus the
/// majority baseline). Gradient boosting appears twice: once per growth
/// strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Benchmark,
    Logistic,
    Lda,
    Svm,
    RandomForest,
    GbtLevel,
    GbtLeaf,
    Mlp,
}

impl ModelKind {
    pub const ALL: [ModelKind; 8] = [
        ModelKind::Benchmark,
        ModelKind::Logistic,
        ModelKind::Lda,
        ModelKind::Svm,
        ModelKind::RandomForest,
        ModelKind::GbtLevel,
        ModelKind::GbtLeaf,
        ModelKind::Mlp,
    ];

    pub fn id(self) -> &'static str {
        match self {
            ModelKind::Benchmark => "benchmark",
            ModelKind::Logistic => "logistic",
            ModelKind::Lda => "lda",
            ModelKind::Svm => "svm",
            ModelKind::RandomForest => "random_forest",
            ModelKind::GbtLevel => "gbt_level",
            ModelKind::GbtLeaf => "gbt_leaf",
            ModelKind::Mlp => "mlp",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            ModelKind::Benchmark => "Benchmark",
            ModelKind::Logistic => "Logistic Regression",
            ModelKind::Lda => "Linear Discriminant Analysis",
            ModelKind::Svm => "Support Vector Machine",
            ModelKind::RandomForest => "Random Forest",
            ModelKind::GbtLevel => "GBT (level-wise)",
            ModelKind::GbtLeaf => "GBT (leaf-wise)",
            ModelKind::Mlp => "Multi-layer Perceptron",
        }
    }

    pub fn from_id(id: &str) -> Option<ModelKind> {
        ModelKind::ALL.into_iter().find(|k| k.id() == id)
    }

    /// Hyperparameter names this kind accepts, for grid validation.
    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            ModelKind::Benchmark => &[],
            ModelKind::Logistic => &["l2", "lr", "max_iters", "tol"],
            ModelKind::Lda => &["shrinkage"],
            ModelKind::Svm => &["c_reg", "max_epochs", "kernel", "gamma", "rff_features"],
            ModelKind::RandomForest => {
                &["n_trees", "max_depth", "min_samples_leaf", "max_features", "bootstrap"]
            }
            ModelKind::GbtLevel => {
                &["n_rounds", "learning_rate", "lambda", "max_depth", "min_child_weight", "min_split_gain"]
            }
            ModelKind::GbtLeaf => {
                &["n_rounds", "learning_rate", "lambda", "num_leaves", "min_child_weight", "min_split_gain"]
            }
            ModelKind::Mlp => &["hidden_sizes", "l2", "lr", "batch_size", "epochs"],
        }
    }

}

/// One hyperparameter value in a grid or a fitted candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Int(i64),
    Float(f64),
    Text(String),
    IntList(Vec<i64>),
}

impl ParamValue {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            ParamValue::Int(v) => Some(*v as f64),
            ParamValue::Float(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_usize(&self) -> Option<usize> {
        match self {
            ParamValue::Int(v) if *v >= 0 => Some(*v as usize),
            ParamValue::Float(v) if *v >= 0.0 && v.fract() == 0.0 => Some(*v as usize),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            ParamValue::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_usize_list(&self) -> Option<Vec<usize>> {
        match self {
            ParamValue::IntList(v) if v.iter().all(|x| *x >= 0) => {
                Some(v.iter().map(|x| *x as usize).collect())
            }
            ParamValue::Int(v) if *v >= 0 => Some(vec![*v as usize]),
            _ => None,
        }
    }
}

/// Named hyperparameters; `BTreeMap` keeps candidate ordering and
/// serialization deterministic.
pub type ParamMap = BTreeMap<String, ParamValue>;

pub(crate) fn param_f64(params: &ParamMap, name: &str, default: f64) -> Result<f64, ModelError> {
    match params.get(name) {
        None => Ok(default),
        Some(v) => v.as_f64().ok_or_else(|| ModelError::InvalidParam {
            name: name.to_string(),
            reason: format!("expected a number, got {v:?}"),
        }),
    }
}

pub(crate) fn param_usize(params: &ParamMap, name: &str, default: usize) -> Result<usize, ModelError> {
    match params.get(name) {
        None => Ok(default),
        Some(v) => v.as_usize().ok_or_else(|| ModelError::InvalidParam {
            name: name.to_string(),
            reason: format!("expected a non-negative integer, got {v:?}"),
        }),
    }
}

pub(crate) fn param_str<'a>(
    params: &'a ParamMap,
    name: &str,
    default: &'a str,
) -> Result<&'a str, ModelError> {
    match params.get(name) {
        None => Ok(default),
        Some(v) => v.as_str().ok_or_else(|| ModelError::InvalidParam {
            name: name.to_string(),
            reason: format!("expected a string, got {v:?}"),
        }),
    }
}

fn check_params(kind: ModelKind, params: &ParamMap) -> Result<(), ModelError> {
    for name in params.keys() {
        if !kind.param_names().contains(&name.as_str()) {
            return Err(ModelError::UnknownParam {
                name: name.clone(),
                kind: kind.id().to_string(),
            });
        }
    }
    Ok(())
}

fn check_training_data(
    x: &FeatureMatrix,
    y: &[usize],
    num_classes: usize,
) -> Result<(), ModelError> {
    if y.is_empty() {
        return Err(ModelError::EmptyLabels);
    }
    if x.n_rows() != y.len() {
        return Err(ModelError::ShapeMismatch { x_rows: x.n_rows(), y_len: y.len() });
    }
    if let Some(&label) = y.iter().find(|&&l| l >= num_classes) {
        return Err(ModelError::LabelOutOfRange { label, num_classes });
    }
    Ok(())
}

/// A fitted classifier of any kind, serializable for exact reload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model")]
#[serde(rename_all = "snake_case")]
pub enum TrainedModel {
    Majority(MajorityModel),
    Softmax(SoftmaxModel),
    Lda(LdaModel),
    Svm(SvmModel),
    Forest(ForestModel),
    Gbt(GbtModel),
    Mlp(MlpModel),
}

impl TrainedModel {
    pub fn num_classes(&self) -> usize {
        match self {
            TrainedModel::Majority(m) => m.num_classes,
            TrainedModel::Softmax(m) => m.num_classes,
            TrainedModel::Lda(m) => m.num_classes,
            TrainedModel::Svm(m) => m.num_classes,
            TrainedModel::Forest(m) => m.num_classes,
            TrainedModel::Gbt(m) => m.num_classes,
            TrainedModel::Mlp(m) => m.num_classes,
        }
    }

    /// Row-stochastic class probabilities, one row per input row.
    pub fn predict_proba(&self, x: &FeatureMatrix) -> ProbMatrix {
        match self {
            TrainedModel::Majority(m) => m.predict_proba(x),
            TrainedModel::Softmax(m) => m.predict_proba(x),
            TrainedModel::Lda(m) => m.predict_proba(x),
            TrainedModel::Svm(m) => m.predict_proba(x),
            TrainedModel::Forest(m) => m.predict_proba(x),
            TrainedModel::Gbt(m) => m.predict_proba(x),
            TrainedModel::Mlp(m) => m.predict_proba(x),
        }
    }

    /// Argmax labels; ties resolve to the lowest class index.
    pub fn predict(&self, x: &FeatureMatrix) -> Vec<usize> {
        let probs = self.predict_proba(x);
        (0..probs.n_rows()).map(|i| argmax(probs.row(i))).collect()
    }
}

/// Fits a model of the given kind; the single entry point used by tuning
/// and the CLI.
pub fn fit_model(
    kind: ModelKind,
    x: &FeatureMatrix,
    y: &[usize],
    num_classes: usize,
    params: &ParamMap,
    seed: u64,
) -> Result<TrainedModel, ModelError> {
    check_params(kind, params)?;
    check_training_data(x, y, num_classes)?;
    match kind {
        ModelKind::Benchmark => Ok(TrainedModel::Majority(majority::fit_majority(y, num_classes)?)),
        ModelKind::Logistic => {
            let p = SoftmaxParams::from_params(params)?;
            Ok(TrainedModel::Softmax(softmax::fit_softmax_regression(x, y, num_classes, &p)?))
        }
        ModelKind::Lda => {
            let p = LdaParams::from_params(params)?;
            Ok(TrainedModel::Lda(lda::fit_lda(x, y, num_classes, &p)?))
        }
        ModelKind::Svm => {
            let p = SvmParams::from_params(params)?;
            Ok(TrainedModel::Svm(svm::fit_svm_ovr(x, y, num_classes, &p, seed)?))
        }
        ModelKind::RandomForest => {
            let p = ForestParams::from_params(params)?;
            Ok(TrainedModel::Forest(forest::fit_random_forest(x, y, num_classes, &p, seed)?))
        }
        ModelKind::GbtLevel => {
            let p = GbtParams::from_params_level(params)?;
            Ok(TrainedModel::Gbt(gbt::fit_gbt(x, y, num_classes, &p)?))
        }
        ModelKind::GbtLeaf => {
            let p = GbtParams::from_params_leaf(params)?;
            Ok(TrainedModel::Gbt(gbt::fit_gbt(x, y, num_classes, &p)?))
        }
        ModelKind::Mlp => {
            let p = MlpParams::from_params(params)?;
            Ok(TrainedModel::Mlp(mlp::fit_mlp(x, y, num_classes, &p, seed)?))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_ids_round_trip() {
        for kind in ModelKind::ALL {
            assert_eq!(ModelKind::from_id(kind.id()), Some(kind));
        }
        assert_eq!(ModelKind::from_id("nope"), None);
    }

    #[test]
    fn unknown_param_is_rejected() {
        let x = FeatureMatrix::from_rows(vec![vec![0.0], vec![1.0]]);
        let mut params = ParamMap::new();
        params.insert("bogus".into(), ParamValue::Int(1));
        match fit_model(ModelKind::Lda, &x, &[0, 1], 2, &params, 0) {
            Err(ModelError::UnknownParam { name, kind }) => {
                assert_eq!(name, "bogus");
                assert_eq!(kind, "lda");
            }
            other => panic!("expected UnknownParam, got {other:?}"),
        }
    }

    #[test]
    fn bad_training_data_is_rejected() {
        let x = FeatureMatrix::from_rows(vec![vec![0.0], vec![1.0]]);
        let params = ParamMap::new();
        assert!(matches!(
            fit_model(ModelKind::Benchmark, &x, &[], 2, &params, 0),
            Err(ModelError::EmptyLabels)
        ));
        assert!(matches!(
            fit_model(ModelKind::Benchmark, &x, &[0], 2, &params, 0),
            Err(ModelError::ShapeMismatch { .. })
        ));
        assert!(matches!(
            fit_model(ModelKind::Benchmark, &x, &[0, 5], 2, &params, 0),
            Err(ModelError::LabelOutOfRange { label: 5, .. })
        ));
    }
}

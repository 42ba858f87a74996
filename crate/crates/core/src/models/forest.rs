//! Random forest: bootstrapped Gini trees over per-node random feature
//! subsets, probabilities averaged across trees.
//!
//! Tree `t` draws its bootstrap sample and feature subsets from a stream
//! derived as `derive_seed(seed, t)`, so the ensemble is identical whether
//! trees are grown in parallel or one by one.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tree::{grow_tree, DecisionTree, TreeParams};
use super::{param_usize, ModelError, ParamMap};
use crate::exec;
use crate::matrix::{FeatureMatrix, ProbMatrix};
use crate::rng::stream_rng;

#[derive(Debug, Clone, PartialEq)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    /// `None` defaults to ceil(sqrt(d)); `Some(0)` is rejected.
    pub max_features: Option<usize>,
    pub bootstrap: bool,
}

impl ForestParams {
    pub fn from_params(params: &ParamMap) -> Result<Self, ModelError> {
        // encoding: max_depth 0 = unlimited, max_features 0 = all features
        let max_depth = param_usize(params, "max_depth", 0)?;
        let max_features = match params.get("max_features") {
            None => None,
            Some(v) => {
                let k = v.as_usize().ok_or_else(|| ModelError::InvalidParam {
                    name: "max_features".into(),
                    reason: format!("expected a non-negative integer, got {v:?}"),
                })?;
                Some(k)
            }
        };
        let p = ForestParams {
            n_trees: param_usize(params, "n_trees", 100)?,
            max_depth: if max_depth == 0 { None } else { Some(max_depth) },
            min_samples_leaf: param_usize(params, "min_samples_leaf", 1)?,
            max_features,
            bootstrap: param_usize(params, "bootstrap", 1)? != 0,
        };
        if p.n_trees == 0 {
            return Err(ModelError::InvalidParam {
                name: "n_trees".into(),
                reason: "must be at least 1".into(),
            });
        }
        if p.min_samples_leaf == 0 {
            return Err(ModelError::InvalidParam {
                name: "min_samples_leaf".into(),
                reason: "must be at least 1".into(),
            });
        }
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<DecisionTree>,
    pub num_classes: usize,
}

pub fn fit_random_forest(
    x: &FeatureMatrix,
    y: &[usize],
    num_classes: usize,
    params: &ForestParams,
    seed: u64,
) -> Result<ForestModel, ModelError> {
    let n = x.n_rows();
    let d = x.n_cols();
    let max_features = match params.max_features {
        Some(0) => d, // 0 = all features
        Some(k) => k.min(d),
        None => (d as f64).sqrt().ceil() as usize,
    };
    let tree_params = TreeParams {
        max_depth: params.max_depth,
        min_samples_leaf: params.min_samples_leaf,
        max_features: if max_features >= d { None } else { Some(max_features) },
    };

    let trees = exec::map_indices(params.n_trees, |t| {
        let mut rng = stream_rng(seed, t as u64);
        let indices: Vec<usize> = if params.bootstrap {
            (0..n).map(|_| rng.gen_range(0..n)).collect()
        } else {
            (0..n).collect()
        };
        grow_tree(x, y, &indices, num_classes, &tree_params, &mut rng)
    });

    Ok(ForestModel { trees, num_classes })
}

impl ForestModel {
    /// Mean of the per-tree leaf distributions.
    pub fn predict_proba(&self, x: &FeatureMatrix) -> ProbMatrix {
        let n = x.n_rows();
        let mut probs = ProbMatrix::zeros(n, self.num_classes);
        let rows = exec::map_indices(n, |i| {
            let mut acc = vec![0.0; self.num_classes];
            for tree in &self.trees {
                for (a, &p) in acc.iter_mut().zip(tree.leaf(x.row(i))) {
                    *a += p;
                }
            }
            let inv = 1.0 / self.trees.len() as f64;
            acc.iter_mut().for_each(|a| *a *= inv);
            acc
        });
        for (i, row) in rows.into_iter().enumerate() {
            probs.row_mut(i).copy_from_slice(&row);
        }
        probs
    }
}

//! Second-order gradient-boosted trees for the multiclass softmax
//! objective.
//!
//! Each round fits one regression tree per class to the cross-entropy
//! gradients `g = p - y` and Hessians `h = p (1 - p)`. Leaves carry the
//! regularized Newton step `-G / (H + lambda)`; the split gain is
//! `[G_L^2/(H_L+lambda) + G_R^2/(H_R+lambda) - G^2/(H+lambda)] / 2` minus
//! the split penalty. Trees grow level-wise to a depth cap or leaf-wise by
//! repeatedly splitting the highest-gain leaf until a leaf budget.

use serde::{Deserialize, Serialize};

use super::{param_f64, param_usize, ModelError, ParamMap};
use crate::exec;
use crate::matrix::{softmax_inplace, FeatureMatrix, ProbMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Growth {
    LevelWise { max_depth: usize },
    LeafWise { num_leaves: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GbtParams {
    pub n_rounds: usize,
    pub learning_rate: f64,
    pub lambda: f64,
    pub growth: Growth,
    pub min_child_weight: f64,
    pub min_split_gain: f64,
}

impl GbtParams {
    fn common(params: &ParamMap, growth: Growth) -> Result<Self, ModelError> {
        let p = GbtParams {
            n_rounds: param_usize(params, "n_rounds", 100)?,
            learning_rate: param_f64(params, "learning_rate", 0.1)?,
            lambda: param_f64(params, "lambda", 1.0)?,
            growth,
            min_child_weight: param_f64(params, "min_child_weight", 1e-3)?,
            min_split_gain: param_f64(params, "min_split_gain", 0.0)?,
        };
        if p.n_rounds == 0 {
            return Err(ModelError::InvalidParam {
                name: "n_rounds".into(),
                reason: "must be at least 1".into(),
            });
        }
        if p.lambda < 0.0 {
            return Err(ModelError::InvalidParam {
                name: "lambda".into(),
                reason: "must be non-negative".into(),
            });
        }
        Ok(p)
    }

    pub fn from_params_level(params: &ParamMap) -> Result<Self, ModelError> {
        let depth = param_usize(params, "max_depth", 6)?;
        Self::common(params, Growth::LevelWise { max_depth: depth.max(1) })
    }

    pub fn from_params_leaf(params: &ParamMap) -> Result<Self, ModelError> {
        let leaves = param_usize(params, "num_leaves", 31)?;
        Self::common(params, Growth::LeafWise { num_leaves: leaves.max(2) })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RegNode {
    Internal {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        weight: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegTree {
    pub nodes: Vec<RegNode>,
}

impl RegTree {
    pub fn output(&self, row: &[f64]) -> f64 {
        let mut node = 0;
        loop {
            match &self.nodes[node] {
                RegNode::Internal { feature, threshold, left, right } => {
                    node = if row[*feature] <= *threshold { *left } else { *right };
                }
                RegNode::Leaf { weight } => return *weight,
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, RegNode::Leaf { .. })).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtModel {
    /// Per-class log-prior baseline.
    pub base_score: Vec<f64>,
    /// `rounds[r][c]` is round r's tree for class c.
    pub rounds: Vec<Vec<RegTree>>,
    pub learning_rate: f64,
    pub num_classes: usize,
}

struct SplitCandidate {
    feature: usize,
    threshold: f64,
    gain: f64,
}

/// Best regularized-gain split for the rows in `indices`.
fn best_reg_split(
    x: &FeatureMatrix,
    grad: &[f64],
    hess: &[f64],
    indices: &[usize],
    lambda: f64,
    min_child_weight: f64,
    min_split_gain: f64,
) -> Option<SplitCandidate> {
    let n = indices.len();
    if n < 2 {
        return None;
    }
    let g_total: f64 = indices.iter().map(|&i| grad[i]).sum();
    let h_total: f64 = indices.iter().map(|&i| hess[i]).sum();
    let parent_score = g_total * g_total / (h_total + lambda);

    let mut best: Option<SplitCandidate> = None;
    let mut sorted: Vec<usize> = Vec::with_capacity(n);

    for feature in 0..x.n_cols() {
        sorted.clear();
        sorted.extend_from_slice(indices);
        sorted.sort_by(|&a, &b| {
            x.get(a, feature)
                .partial_cmp(&x.get(b, feature))
                .unwrap()
                .then(a.cmp(&b))
        });

        let mut g_left = 0.0;
        let mut h_left = 0.0;
        for pos in 0..n - 1 {
            let i = sorted[pos];
            g_left += grad[i];
            h_left += hess[i];
            let v = x.get(i, feature);
            let v_next = x.get(sorted[pos + 1], feature);
            if v == v_next {
                continue;
            }
            let h_right = h_total - h_left;
            if h_left < min_child_weight || h_right < min_child_weight {
                continue;
            }
            let g_right = g_total - g_left;
            let gain = 0.5
                * (g_left * g_left / (h_left + lambda) + g_right * g_right / (h_right + lambda)
                    - parent_score)
                - min_split_gain;
            if gain > 1e-12 && best.as_ref().is_none_or(|b| gain > b.gain) {
                best = Some(SplitCandidate {
                    feature,
                    threshold: v + (v_next - v) / 2.0,
                    gain,
                });
            }
        }
    }
    best
}

fn leaf_weight(grad: &[f64], hess: &[f64], indices: &[usize], lambda: f64) -> f64 {
    let g: f64 = indices.iter().map(|&i| grad[i]).sum();
    let h: f64 = indices.iter().map(|&i| hess[i]).sum();
    -g / (h + lambda)
}

/// A leaf pending expansion, with its precomputed best split.
struct OpenLeaf {
    slot: usize,
    rows: Vec<usize>,
    depth: usize,
    split: Option<SplitCandidate>,
}

fn fit_reg_tree(
    x: &FeatureMatrix,
    grad: &[f64],
    hess: &[f64],
    indices: &[usize],
    params: &GbtParams,
) -> RegTree {
    let find = |rows: &[usize]| {
        best_reg_split(
            x,
            grad,
            hess,
            rows,
            params.lambda,
            params.min_child_weight,
            params.min_split_gain,
        )
    };

    let mut nodes = vec![RegNode::Leaf { weight: 0.0 }];
    let mut open = vec![OpenLeaf { slot: 0, rows: indices.to_vec(), depth: 0, split: find(indices) }];

    let expand = |nodes: &mut Vec<RegNode>, leaf: OpenLeaf, find: &dyn Fn(&[usize]) -> Option<SplitCandidate>| -> (OpenLeaf, OpenLeaf) {
        let split = leaf.split.expect("expand requires a split");
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = leaf
            .rows
            .iter()
            .partition(|&&i| x.get(i, split.feature) <= split.threshold);
        let left = nodes.len();
        nodes.push(RegNode::Leaf { weight: 0.0 });
        let right = nodes.len();
        nodes.push(RegNode::Leaf { weight: 0.0 });
        nodes[leaf.slot] = RegNode::Internal {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        let left_split = find(&left_rows);
        let right_split = find(&right_rows);
        (
            OpenLeaf { slot: left, rows: left_rows, depth: leaf.depth + 1, split: left_split },
            OpenLeaf { slot: right, rows: right_rows, depth: leaf.depth + 1, split: right_split },
        )
    };

    match params.growth {
        Growth::LevelWise { max_depth } => {
            while let Some(pos) = open.iter().position(|l| l.split.is_some() && l.depth < max_depth) {
                let leaf = open.swap_remove(pos);
                let (l, r) = expand(&mut nodes, leaf, &find);
                open.push(l);
                open.push(r);
            }
        }
        Growth::LeafWise { num_leaves } => {
            let mut n_leaves = 1usize;
            while n_leaves < num_leaves {
                // highest gain first; ties to the earliest-created slot
                let mut chosen: Option<usize> = None;
                for (idx, leaf) in open.iter().enumerate() {
                    let Some(split) = &leaf.split else { continue };
                    let better = match chosen {
                        None => true,
                        Some(c) => {
                            let cur = open[c].split.as_ref().unwrap().gain;
                            split.gain > cur || (split.gain == cur && leaf.slot < open[c].slot)
                        }
                    };
                    if better {
                        chosen = Some(idx);
                    }
                }
                let Some(idx) = chosen else { break };
                let leaf = open.swap_remove(idx);
                let (l, r) = expand(&mut nodes, leaf, &find);
                n_leaves += 1;
                open.push(l);
                open.push(r);
            }
        }
    }

    for leaf in open {
        nodes[leaf.slot] = RegNode::Leaf {
            weight: leaf_weight(grad, hess, &leaf.rows, params.lambda),
        };
    }
    RegTree { nodes }
}

pub fn fit_gbt(
    x: &FeatureMatrix,
    y: &[usize],
    num_classes: usize,
    params: &GbtParams,
) -> Result<GbtModel, ModelError> {
    let n = x.n_rows();
    let mut counts = vec![0usize; num_classes];
    for &label in y {
        counts[label] += 1;
    }
    let base_score: Vec<f64> = counts
        .iter()
        .map(|&c| ((c as f64 / n as f64).max(1e-12)).ln())
        .collect();

    let mut margins = FeatureMatrix::zeros(n, num_classes);
    for i in 0..n {
        margins.row_mut(i).copy_from_slice(&base_score);
    }
    let all_rows: Vec<usize> = (0..n).collect();
    let mut rounds = Vec::with_capacity(params.n_rounds);

    for _ in 0..params.n_rounds {
        // probabilities frozen at the start of the round; the per-class
        // trees are then independent
        let mut probs = margins.clone();
        for i in 0..n {
            softmax_inplace(probs.row_mut(i));
        }
        if probs.as_slice().iter().any(|p| !p.is_finite()) {
            return Err(ModelError::NonFiniteGradient);
        }

        let trees: Vec<RegTree> = exec::map_indices(num_classes, |class| {
            let mut grad = vec![0.0; n];
            let mut hess = vec![0.0; n];
            for i in 0..n {
                let p = probs.get(i, class);
                grad[i] = p - if y[i] == class { 1.0 } else { 0.0 };
                hess[i] = (p * (1.0 - p)).max(1e-16);
            }
            fit_reg_tree(x, &grad, &hess, &all_rows, params)
        });

        for i in 0..n {
            let row = x.row(i);
            let m = margins.row_mut(i);
            for (class, tree) in trees.iter().enumerate() {
                m[class] += params.learning_rate * tree.output(row);
            }
        }
        rounds.push(trees);
    }

    Ok(GbtModel {
        base_score,
        rounds,
        learning_rate: params.learning_rate,
        num_classes,
    })
}

impl GbtModel {
    pub fn predict_proba(&self, x: &FeatureMatrix) -> ProbMatrix {
        let n = x.n_rows();
        let mut probs = ProbMatrix::zeros(n, self.num_classes);
        let rows = exec::map_indices(n, |i| {
            let row = x.row(i);
            let mut logits = self.base_score.clone();
            for trees in &self.rounds {
                for (class, tree) in trees.iter().enumerate() {
                    logits[class] += self.learning_rate * tree.output(row);
                }
            }
            softmax_inplace(&mut logits);
            logits
        });
        for (i, row) in rows.into_iter().enumerate() {
            probs.row_mut(i).copy_from_slice(&row);
        }
        probs
    }

    /// Mean cross-entropy of the model on `(x, y)`.
    pub fn train_loss(&self, x: &FeatureMatrix, y: &[usize]) -> f64 {
        let probs = self.predict_proba(x);
        let mut loss = 0.0;
        for (i, &label) in y.iter().enumerate() {
            loss -= probs.get(i, label).max(1e-300).ln();
        }
        loss / y.len() as f64
    }
}

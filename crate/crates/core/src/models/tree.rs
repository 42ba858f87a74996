//! Greedy CART-style classification tree with Gini impurity splits.
//!
//! Split search is deterministic: candidate thresholds are midpoints
//! between distinct consecutive sorted values, and gain ties break toward
//! the lower feature index, then the lower threshold. Used directly as a
//! plain decision tree and by the random forest with per-node feature
//! subsampling.

use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::matrix::{FeatureMatrix, ProbMatrix};
use crate::rng::{sample_without_replacement, ChaCha8Rng};

#[derive(Debug, Clone, PartialEq)]
pub struct TreeParams {
    /// `None` grows until purity or the leaf-size floor.
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    /// Features drawn per node; `None` considers all.
    pub max_features: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams { max_depth: None, min_samples_leaf: 1, max_features: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Internal {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        /// Class distribution of the training rows that reached the leaf.
        distribution: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
    pub num_classes: usize,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    gain: f64,
}

fn gini(counts: &[usize], total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / t) * (c as f64 / t)).sum::<f64>()
}

/// Best Gini split for the rows in `indices`, scanning `features` in the
/// given (ascending) order.
fn best_split(
    x: &FeatureMatrix,
    y: &[usize],
    indices: &[usize],
    features: &[usize],
    num_classes: usize,
    min_samples_leaf: usize,
) -> Option<BestSplit> {
    let n = indices.len();
    let mut parent_counts = vec![0usize; num_classes];
    for &i in indices {
        parent_counts[y[i]] += 1;
    }
    let parent_gini = gini(&parent_counts, n);
    if parent_gini == 0.0 {
        return None;
    }

    let mut best: Option<BestSplit> = None;
    let mut sorted: Vec<usize> = Vec::with_capacity(n);
    let mut left_counts = vec![0usize; num_classes];

    for &feature in features {
        sorted.clear();
        sorted.extend_from_slice(indices);
        sorted.sort_by(|&a, &b| {
            x.get(a, feature)
                .partial_cmp(&x.get(b, feature))
                .unwrap()
                .then(a.cmp(&b))
        });

        left_counts.iter_mut().for_each(|c| *c = 0);
        let mut right_counts = parent_counts.clone();

        for pos in 0..n - 1 {
            let i = sorted[pos];
            left_counts[y[i]] += 1;
            right_counts[y[i]] -= 1;
            let v = x.get(i, feature);
            let v_next = x.get(sorted[pos + 1], feature);
            if v == v_next {
                continue;
            }
            let n_left = pos + 1;
            let n_right = n - n_left;
            if n_left < min_samples_leaf || n_right < min_samples_leaf {
                continue;
            }
            let weighted = (n_left as f64 * gini(&left_counts, n_left)
                + n_right as f64 * gini(&right_counts, n_right))
                / n as f64;
            let gain = parent_gini - weighted;
            if gain > 1e-12 && best.as_ref().is_none_or(|b| gain > b.gain) {
                best = Some(BestSplit {
                    feature,
                    threshold: v + (v_next - v) / 2.0,
                    gain,
                });
            }
        }
    }
    best
}

fn leaf_distribution(y: &[usize], indices: &[usize], num_classes: usize) -> Vec<f64> {
    let mut counts = vec![0.0; num_classes];
    for &i in indices {
        counts[y[i]] += 1.0;
    }
    let total: f64 = counts.iter().sum();
    for c in counts.iter_mut() {
        *c /= total;
    }
    counts
}

/// Grows the tree depth-first over the rows in `indices`. `rng` drives the
/// per-node feature draw when `max_features` restricts it.
pub(crate) fn grow_tree(
    x: &FeatureMatrix,
    y: &[usize],
    indices: &[usize],
    num_classes: usize,
    params: &TreeParams,
    rng: &mut ChaCha8Rng,
) -> DecisionTree {
    let d = x.n_cols();
    let mut nodes = Vec::new();
    // worklist of (node slot, rows, depth); slots are patched as children
    // are allocated
    let mut stack = vec![(0usize, indices.to_vec(), 0usize)];
    nodes.push(Node::Leaf { distribution: Vec::new() }); // placeholder

    while let Some((slot, rows, depth)) = stack.pop() {
        let depth_ok = params.max_depth.is_none_or(|m| depth < m);
        let size_ok = rows.len() >= 2 * params.min_samples_leaf && rows.len() >= 2;

        let split = if depth_ok && size_ok {
            let features: Vec<usize> = match params.max_features {
                Some(k) if k < d => {
                    let mut picked = sample_without_replacement(d, k, rng);
                    picked.sort_unstable();
                    picked
                }
                _ => (0..d).collect(),
            };
            best_split(x, y, &rows, &features, num_classes, params.min_samples_leaf)
        } else {
            None
        };

        match split {
            Some(s) => {
                let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
                    rows.iter().partition(|&&i| x.get(i, s.feature) <= s.threshold);
                let left = nodes.len();
                nodes.push(Node::Leaf { distribution: Vec::new() });
                let right = nodes.len();
                nodes.push(Node::Leaf { distribution: Vec::new() });
                nodes[slot] = Node::Internal { feature: s.feature, threshold: s.threshold, left, right };
                // push right first so the left child is grown first
                stack.push((right, right_rows, depth + 1));
                stack.push((left, left_rows, depth + 1));
            }
            None => {
                nodes[slot] = Node::Leaf { distribution: leaf_distribution(y, &rows, num_classes) };
            }
        }
    }

    DecisionTree { nodes, num_classes }
}

/// Fits a single decision tree on all rows (no bootstrap, no feature
/// subsampling unless requested).
pub fn fit_decision_tree(
    x: &FeatureMatrix,
    y: &[usize],
    num_classes: usize,
    params: &TreeParams,
    seed: u64,
) -> Result<DecisionTree, ModelError> {
    if y.is_empty() {
        return Err(ModelError::EmptyLabels);
    }
    let indices: Vec<usize> = (0..x.n_rows()).collect();
    let mut rng = crate::rng::stream_rng(seed, 0);
    Ok(grow_tree(x, y, &indices, num_classes, params, &mut rng))
}

impl DecisionTree {
    /// Leaf distribution for one row.
    pub fn leaf(&self, row: &[f64]) -> &[f64] {
        let mut node = 0;
        loop {
            match &self.nodes[node] {
                Node::Internal { feature, threshold, left, right } => {
                    node = if row[*feature] <= *threshold { *left } else { *right };
                }
                Node::Leaf { distribution } => return distribution,
            }
        }
    }

    pub fn predict_proba(&self, x: &FeatureMatrix) -> ProbMatrix {
        let mut probs = ProbMatrix::zeros(x.n_rows(), self.num_classes);
        for i in 0..x.n_rows() {
            probs.row_mut(i).copy_from_slice(self.leaf(x.row(i)));
        }
        probs
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }
}

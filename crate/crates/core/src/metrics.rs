//! Multi-class evaluation metrics: one-vs-rest confusion statistics,
//! balanced accuracy, F1, rank-based AUC, and class-support-weighted
//! aggregation.
//!
//! Conventions, pinned for reproducibility:
//! - Per-class balanced accuracy is `(recall + specificity) / 2`; the
//!   reported macro balanced accuracy is the unweighted mean of per-class
//!   *recall* over classes present in the truth (the standard multiclass
//!   generalization; it equals the per-class formula in the binary case and
//!   gives exactly `1/C` for a constant predictor).
//! - F1 with a zero denominator is 0.
//! - AUC uses mid-ranks for ties (Mann-Whitney statistic), so all-equal
//!   scores give 0.5.
//! - Per-class metrics that are undefined (absent class, zero denominator)
//!   are excluded from weighted aggregation, never imputed.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::ProbMatrix;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("label sequences have different lengths: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("empty input")]
    EmptyInput,
    #[error("label {label} out of range for {num_classes} classes")]
    LabelOutOfRange { label: usize, num_classes: usize },
    #[error("score matrix has {cols} columns but {num_classes} classes expected")]
    ScoreShapeMismatch { cols: usize, num_classes: usize },
    #[error("non-finite score at row {row}, class {class}")]
    NonFiniteScore { row: usize, class: usize },
    #[error("no class present in the truth labels")]
    AllClassesAbsent,
    #[error("total weight over defined entries is zero")]
    ZeroTotalWeight,
}

/// C x C contingency counts; rows index the true class, columns the
/// predicted class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn num_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().map(|row| row.iter().sum::<usize>()).sum()
    }

    /// Rows with true class `j` (the class support).
    pub fn support(&self, j: usize) -> usize {
        self.counts[j].iter().sum()
    }

    /// One-vs-rest counts `(tp, fp, fn, tn)` for class `j`.
    pub fn ovr_counts(&self, j: usize) -> (usize, usize, usize, usize) {
        let c = self.num_classes();
        let tp = self.counts[j][j];
        let fp = (0..c).filter(|&t| t != j).map(|t| self.counts[t][j]).sum();
        let fn_ = (0..c).filter(|&p| p != j).map(|p| self.counts[j][p]).sum();
        let tn = self.total() - tp - fp - fn_;
        (tp, fp, fn_, tn)
    }
}

pub fn confusion_matrix(
    true_labels: &[usize],
    predicted_labels: &[usize],
    num_classes: usize,
) -> Result<ConfusionMatrix, MetricsError> {
    if true_labels.len() != predicted_labels.len() {
        return Err(MetricsError::LengthMismatch(true_labels.len(), predicted_labels.len()));
    }
    if true_labels.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let mut counts = vec![vec![0usize; num_classes]; num_classes];
    for (&t, &p) in true_labels.iter().zip(predicted_labels) {
        if t >= num_classes {
            return Err(MetricsError::LabelOutOfRange { label: t, num_classes });
        }
        if p >= num_classes {
            return Err(MetricsError::LabelOutOfRange { label: p, num_classes });
        }
        counts[t][p] += 1;
    }
    Ok(ConfusionMatrix { counts })
}

/// Per-class one-vs-rest scores; `None` marks undefined values
/// (absent class or zero denominator).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub class: usize,
    pub support: usize,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub specificity: Option<f64>,
    pub f1: Option<f64>,
    pub balanced_accuracy: Option<f64>,
    pub auc: Option<f64>,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    if den == 0 {
        None
    } else {
        Some(num as f64 / den as f64)
    }
}

/// Precision, recall, specificity, F1, and per-class balanced accuracy from
/// the confusion matrix. AUC fields are left unset.
pub fn class_scores(confusion: &ConfusionMatrix) -> Vec<ClassScores> {
    (0..confusion.num_classes())
        .map(|j| {
            let (tp, fp, fn_, tn) = confusion.ovr_counts(j);
            let support = tp + fn_;
            let precision = ratio(tp, tp + fp);
            let recall = ratio(tp, tp + fn_);
            let specificity = ratio(tn, tn + fp);
            // zero-denominator F1 defined as 0 when the class is present
            let f1 = recall.map(|r| {
                let p = precision.unwrap_or(0.0);
                if p + r == 0.0 {
                    0.0
                } else {
                    2.0 * p * r / (p + r)
                }
            });
            let balanced_accuracy = match (recall, specificity) {
                (Some(r), Some(s)) => Some((r + s) / 2.0),
                _ => None,
            };
            ClassScores {
                class: j,
                support,
                precision,
                recall,
                specificity,
                f1,
                balanced_accuracy,
                auc: None,
            }
        })
        .collect()
}

/// Macro balanced accuracy (mean per-class recall over present classes) plus
/// the per-class `(recall + specificity) / 2` values.
pub fn balanced_accuracy(
    confusion: &ConfusionMatrix,
) -> Result<(f64, Vec<Option<f64>>), MetricsError> {
    let scores = class_scores(confusion);
    let recalls: Vec<f64> = scores.iter().filter_map(|s| s.recall).collect();
    if recalls.is_empty() {
        return Err(MetricsError::AllClassesAbsent);
    }
    let macro_value = recalls.iter().sum::<f64>() / recalls.len() as f64;
    Ok((macro_value, scores.into_iter().map(|s| s.balanced_accuracy).collect()))
}

/// Per-class one-vs-rest F1 and the support-weighted aggregate.
pub fn f1_scores(confusion: &ConfusionMatrix) -> Result<(f64, Vec<Option<f64>>), MetricsError> {
    let scores = class_scores(confusion);
    let per_class: Vec<Option<f64>> = scores.iter().map(|s| s.f1).collect();
    let weights: Vec<f64> = scores.iter().map(|s| s.support as f64).collect();
    let weighted = weighted_aggregate(&per_class, &weights)?;
    Ok((weighted, per_class))
}

/// Mid-ranks of `values` (average rank across ties, 1-based).
fn midranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j+1 share the average
        let avg = (i + 1 + j + 1) as f64 / 2.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// One-vs-rest AUC per class from the per-class score columns, via the
/// rank-sum form `(sum of positive ranks - M(M+1)/2) / (M*N)`, plus the
/// support-weighted aggregate over defined classes.
pub fn auc_ovr(
    scores: &ProbMatrix,
    true_labels: &[usize],
) -> Result<(f64, Vec<Option<f64>>), MetricsError> {
    let n = true_labels.len();
    if n == 0 {
        return Err(MetricsError::EmptyInput);
    }
    if scores.n_rows() != n {
        return Err(MetricsError::LengthMismatch(scores.n_rows(), n));
    }
    let num_classes = scores.n_cols();
    for (i, &t) in true_labels.iter().enumerate() {
        if t >= num_classes {
            return Err(MetricsError::LabelOutOfRange { label: t, num_classes });
        }
        for c in 0..num_classes {
            if !scores.get(i, c).is_finite() {
                return Err(MetricsError::NonFiniteScore { row: i, class: c });
            }
        }
    }

    let mut per_class = vec![None; num_classes];
    let mut weights = vec![0.0; num_classes];
    for class in 0..num_classes {
        let m = true_labels.iter().filter(|&&t| t == class).count();
        weights[class] = m as f64;
        let n_neg = n - m;
        if m == 0 || n_neg == 0 {
            continue; // AUC undefined for this class
        }
        let column = scores.column(class);
        let ranks = midranks(&column);
        let rank_sum: f64 = true_labels
            .iter()
            .zip(&ranks)
            .filter(|(&t, _)| t == class)
            .map(|(_, &r)| r)
            .sum();
        let m = m as f64;
        per_class[class] = Some((rank_sum - m * (m + 1.0) / 2.0) / (m * n_neg as f64));
    }
    let weighted = weighted_aggregate(&per_class, &weights)?;
    Ok((weighted, per_class))
}

/// Support-weighted mean over defined entries:
/// `sum(w_j * v_j) / sum(w_j)`, skipping `None` values.
pub fn weighted_aggregate(
    values: &[Option<f64>],
    weights: &[f64],
) -> Result<f64, MetricsError> {
    if values.len() != weights.len() {
        return Err(MetricsError::LengthMismatch(values.len(), weights.len()));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (v, &w) in values.iter().zip(weights) {
        if let Some(v) = v {
            num += w * v;
            den += w;
        }
    }
    if den <= 0.0 {
        return Err(MetricsError::ZeroTotalWeight);
    }
    Ok(num / den)
}

/// Everything the results table needs for one model on one test set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub confusion: ConfusionMatrix,
    pub per_class: Vec<ClassScores>,
    pub weighted_f1: f64,
    /// `None` when the predictor is degenerate-constant (same probability row
    /// for every sample), mirroring an N/A entry rather than reporting the
    /// all-tie 0.5.
    pub weighted_auc: Option<f64>,
    pub balanced_accuracy_macro: f64,
}

/// Scores predictions against truth. `probabilities` supplies the per-class
/// score columns for AUC; `predictions` must be its row-argmax.
pub fn evaluate(
    true_labels: &[usize],
    predictions: &[usize],
    probabilities: &ProbMatrix,
    num_classes: usize,
) -> Result<EvaluationReport, MetricsError> {
    let confusion = confusion_matrix(true_labels, predictions, num_classes)?;
    let mut per_class = class_scores(&confusion);
    let (balanced_accuracy_macro, _) = balanced_accuracy(&confusion)?;
    let (weighted_f1, _) = f1_scores(&confusion)?;

    let constant_predictor = (1..probabilities.n_rows())
        .all(|i| probabilities.row(i) == probabilities.row(0));
    let weighted_auc = if constant_predictor {
        None
    } else {
        let (weighted, per_class_auc) = auc_ovr(probabilities, true_labels)?;
        for (s, auc) in per_class.iter_mut().zip(per_class_auc) {
            s.auc = auc;
        }
        Some(weighted)
    };

    Ok(EvaluationReport {
        confusion,
        per_class,
        weighted_f1,
        weighted_auc,
        balanced_accuracy_macro,
    })
}

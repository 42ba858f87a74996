//! Shapley-value attributions for per-class model outputs.
//!
//! The value function follows the interventional-marginalization
//! convention: `v(S, x)` is the model output at `x` with every feature
//! outside `S` replaced by a background row's value, averaged over the
//! background set. By construction `v(full) = f(x)` and `v(empty)` is the
//! background-average output. Exact mode enumerates all `2^M` subsets with
//! the combinatorial kernel weights; sampled mode estimates the same
//! quantity by seeded permutation sampling with antithetic pairs and
//! reports per-feature standard errors. Exact retraining per subset (the
//! textbook definition) is retained for tiny problems through the
//! [`SubsetValue`] trait, which tests implement directly.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec;
use crate::matrix::{FeatureMatrix, ProbMatrix};
use crate::rng::{derive_seed, shuffle, stream_rng};

#[derive(Debug, Error)]
pub enum ExplainError {
    #[error("exact mode enumerates 2^M subsets; M = {0} exceeds the cap of 20")]
    TooManyFeatures(usize),
    #[error("background set is empty")]
    EmptyBackground,
    #[error("no samples to explain")]
    EmptyInput,
    #[error("n_permutations must be at least 1")]
    NoPermutations,
    #[error("sample has {got} features, value function expects {want}")]
    FeatureArityMismatch { got: usize, want: usize },
}

/// A coalition value function `v(S, x)` over feature subsets, vectorized
/// across subsets (masks are feature bitsets).
pub trait SubsetValue: Sync {
    fn num_features(&self) -> usize;
    fn num_outputs(&self) -> usize;
    /// `v(S, x)` per output, for each mask in `masks`.
    fn values(&self, x: &[f64], masks: &[u32]) -> Vec<Vec<f64>>;
}

/// Interventional marginalization over a background sample, for any
/// batch predictor.
pub struct MarginalValue<'a, F>
where
    F: Fn(&FeatureMatrix) -> ProbMatrix + Sync,
{
    predict: F,
    background: &'a FeatureMatrix,
    num_outputs: usize,
}

impl<'a, F> MarginalValue<'a, F>
where
    F: Fn(&FeatureMatrix) -> ProbMatrix + Sync,
{
    pub fn new(
        predict: F,
        background: &'a FeatureMatrix,
        num_outputs: usize,
    ) -> Result<Self, ExplainError> {
        if background.n_rows() == 0 {
            return Err(ExplainError::EmptyBackground);
        }
        Ok(MarginalValue { predict, background, num_outputs })
    }
}

impl<F> SubsetValue for MarginalValue<'_, F>
where
    F: Fn(&FeatureMatrix) -> ProbMatrix + Sync,
{
    fn num_features(&self) -> usize {
        self.background.n_cols()
    }

    fn num_outputs(&self) -> usize {
        self.num_outputs
    }

    fn values(&self, x: &[f64], masks: &[u32]) -> Vec<Vec<f64>> {
        let m = self.num_features();
        let b = self.background.n_rows();
        let mut out = Vec::with_capacity(masks.len());
        // chunk the (mask x background) row block to bound memory
        const CHUNK: usize = 256;
        for chunk in masks.chunks(CHUNK) {
            let mut rows = FeatureMatrix::zeros(chunk.len() * b, m);
            for (mi, &mask) in chunk.iter().enumerate() {
                for bi in 0..b {
                    let bg = self.background.row(bi);
                    let row = rows.row_mut(mi * b + bi);
                    for j in 0..m {
                        row[j] = if mask >> j & 1 == 1 { x[j] } else { bg[j] };
                    }
                }
            }
            let preds = (self.predict)(&rows);
            for mi in 0..chunk.len() {
                let mut acc = vec![0.0; self.num_outputs];
                for bi in 0..b {
                    let p = preds.row(mi * b + bi);
                    for (a, &v) in acc.iter_mut().zip(p) {
                        *a += v;
                    }
                }
                let inv = 1.0 / b as f64;
                acc.iter_mut().for_each(|a| *a *= inv);
                out.push(acc);
            }
        }
        out
    }
}

/// Attribution for one explained sample: `phi[feature][output]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleExplanation {
    pub phi: Vec<Vec<f64>>,
    /// Per-feature, per-output standard error (sampled mode only).
    pub standard_errors: Option<Vec<Vec<f64>>>,
}

/// Attributions for a batch of samples against one value function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub samples: Vec<SampleExplanation>,
    /// `v(empty)` per output; sample-independent.
    pub base_values: Vec<f64>,
    pub num_features: usize,
    pub num_outputs: usize,
}

fn check_sample(vf: &dyn SubsetValue, x: &[f64]) -> Result<(), ExplainError> {
    if x.len() != vf.num_features() {
        return Err(ExplainError::FeatureArityMismatch { got: x.len(), want: vf.num_features() });
    }
    Ok(())
}

/// Kernel weight `|S|! (M - |S| - 1)! / M! = 1 / (M * C(M-1, |S|))` for a
/// subset not containing the explained feature.
fn subset_weights(m: usize) -> Vec<f64> {
    let mut choose = vec![1.0f64; m];
    for s in 1..m {
        choose[s] = choose[s - 1] * (m - s) as f64 / s as f64; // C(m-1, s)
    }
    choose.iter().map(|c| 1.0 / (m as f64 * c)).collect()
}

/// Exact Shapley values for one sample by full subset enumeration
/// (`M <= 20`).
pub fn shap_exact(vf: &dyn SubsetValue, x: &[f64]) -> Result<SampleExplanation, ExplainError> {
    check_sample(vf, x)?;
    let m = vf.num_features();
    if m > 20 {
        return Err(ExplainError::TooManyFeatures(m));
    }
    let n_outputs = vf.num_outputs();
    let n_masks = 1usize << m;
    let masks: Vec<u32> = (0..n_masks as u32).collect();
    let values = vf.values(x, &masks);
    let weights = subset_weights(m);

    let mut phi = vec![vec![0.0; n_outputs]; m];
    for (mask, value) in values.iter().enumerate() {
        for i in 0..m {
            if mask >> i & 1 == 1 {
                continue; // iterate subsets S that exclude i
            }
            let with_i = &values[mask | (1 << i)];
            let w = weights[(mask as u32).count_ones() as usize];
            for c in 0..n_outputs {
                phi[i][c] += w * (with_i[c] - value[c]);
            }
        }
    }
    Ok(SampleExplanation { phi, standard_errors: None })
}

/// Permutation-sampling estimate with antithetic pairs: each sampled
/// permutation is paired with its reversal, and each pair's telescoping
/// marginal contributions average to one draw. Standard errors shrink as
/// `1/sqrt(n_permutations)`; they are reported from pair-to-pair spread
/// (`None` when only one pair was drawn).
pub fn shap_sampled(
    vf: &dyn SubsetValue,
    x: &[f64],
    n_permutations: usize,
    seed: u64,
) -> Result<SampleExplanation, ExplainError> {
    check_sample(vf, x)?;
    if n_permutations == 0 {
        return Err(ExplainError::NoPermutations);
    }
    let m = vf.num_features();
    let n_outputs = vf.num_outputs();

    let mut sum = vec![vec![0.0; n_outputs]; m];
    let mut sumsq = vec![vec![0.0; n_outputs]; m];

    let mut perm: Vec<usize> = (0..m).collect();
    for p in 0..n_permutations {
        let mut rng = stream_rng(seed, p as u64);
        shuffle(&mut perm, &mut rng);

        let mut pair = vec![vec![0.0; n_outputs]; m];
        for direction in 0..2 {
            // cumulative masks along the ordering: empty -> full
            let mut masks = Vec::with_capacity(m + 1);
            let mut mask = 0u32;
            masks.push(mask);
            let walk: Box<dyn Iterator<Item = &usize>> = if direction == 0 {
                Box::new(perm.iter())
            } else {
                Box::new(perm.iter().rev())
            };
            let order: Vec<usize> = walk.copied().collect();
            for &feature in &order {
                mask |= 1 << feature;
                masks.push(mask);
            }
            let values = vf.values(x, &masks);
            for (step, &feature) in order.iter().enumerate() {
                for c in 0..n_outputs {
                    pair[feature][c] += 0.5 * (values[step + 1][c] - values[step][c]);
                }
            }
        }
        for i in 0..m {
            for c in 0..n_outputs {
                sum[i][c] += pair[i][c];
                sumsq[i][c] += pair[i][c] * pair[i][c];
            }
        }
    }

    let n = n_permutations as f64;
    let phi: Vec<Vec<f64>> = sum.iter().map(|row| row.iter().map(|s| s / n).collect()).collect();
    let standard_errors = if n_permutations >= 2 {
        Some(
            (0..m)
                .map(|i| {
                    (0..n_outputs)
                        .map(|c| {
                            let mean = phi[i][c];
                            let var = (sumsq[i][c] / n - mean * mean).max(0.0) * n / (n - 1.0);
                            (var / n).sqrt()
                        })
                        .collect()
                })
                .collect(),
        )
    } else {
        None
    };
    Ok(SampleExplanation { phi, standard_errors })
}

/// Which estimator to run over a batch of samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapMode {
    Exact,
    Sampled { n_permutations: usize },
}

/// Explains each row of `samples` independently (in parallel), sharing the
/// value function and base values.
pub fn explain_samples(
    vf: &dyn SubsetValue,
    samples: &FeatureMatrix,
    mode: ShapMode,
    seed: u64,
) -> Result<Explanation, ExplainError> {
    if samples.n_rows() == 0 {
        return Err(ExplainError::EmptyInput);
    }
    check_sample(vf, samples.row(0))?;
    let base_values = vf.values(samples.row(0), &[0]).remove(0);

    let rows: Vec<Result<SampleExplanation, ExplainError>> =
        exec::map_indices(samples.n_rows(), |i| match mode {
            ShapMode::Exact => shap_exact(vf, samples.row(i)),
            ShapMode::Sampled { n_permutations } => {
                shap_sampled(vf, samples.row(i), n_permutations, derive_seed(seed, i as u64))
            }
        });
    let mut out = Vec::with_capacity(rows.len());
    for r in rows {
        out.push(r?);
    }
    Ok(Explanation {
        samples: out,
        base_values,
        num_features: vf.num_features(),
        num_outputs: vf.num_outputs(),
    })
}

/// One feature's aggregate importance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapSummaryEntry {
    pub feature: usize,
    pub mean_abs_phi: f64,
}

/// Mean `|phi|` per feature across samples and outputs, descending; ties
/// break toward the lower feature index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapSummary {
    pub entries: Vec<ShapSummaryEntry>,
}

pub fn shap_summary(explanation: &Explanation) -> Result<ShapSummary, ExplainError> {
    if explanation.samples.is_empty() {
        return Err(ExplainError::EmptyInput);
    }
    let m = explanation.num_features;
    let denom = (explanation.samples.len() * explanation.num_outputs) as f64;
    let mut entries: Vec<ShapSummaryEntry> = (0..m)
        .map(|i| {
            let total: f64 = explanation
                .samples
                .iter()
                .map(|s| s.phi[i].iter().map(|v| v.abs()).sum::<f64>())
                .sum();
            ShapSummaryEntry { feature: i, mean_abs_phi: total / denom }
        })
        .collect();
    entries.sort_by(|a, b| {
        b.mean_abs_phi
            .partial_cmp(&a.mean_abs_phi)
            .unwrap()
            .then(a.feature.cmp(&b.feature))
    });
    Ok(ShapSummary { entries })
}

//! Grid-search hyperparameter tuning over stratified k-fold
//! cross-validation, scored by weighted one-vs-rest AUC.
//!
//! Standardization happens inside each fold: the scaler is fitted on the
//! fold's training portion only and applied to both portions, so validation
//! rows never leak into the statistics. After selection the best candidate
//! is refitted on the full training set behind a fresh full-train scaler.
//!
//! Candidate x fold fits are independent and may run in parallel; scores
//! are reduced in candidate order, so the selected model is identical for
//! any thread count. A candidate that fails on any fold is disqualified
//! with a recorded reason (its mean score becomes -inf) but still counts
//! toward `total_fits`.

pub mod grids;

pub use grids::{default_grid, GridProfile};

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{apply_scaler, fit_scaler, Scaler};
use crate::exec;
use crate::matrix::{argmax, FeatureMatrix, ProbMatrix};
use crate::metrics;
use crate::models::{fit_model, ModelError, ModelKind, ParamMap, ParamValue, TrainedModel};
use crate::rng::{derive_seed, shuffle, stream_rng};

#[derive(Debug, Error)]
pub enum TuningError {
    #[error("class {class} has {count} members; {k}-fold needs at least {k}")]
    ClassTooSmall { class: usize, count: usize, k: usize },
    #[error("k must be at least 2, got {0}")]
    BadK(usize),
    #[error("grid for {kind:?} has no candidates")]
    EmptyGrid { kind: String },
    #[error("all {0} candidates were disqualified")]
    AllCandidatesDisqualified(usize),
    #[error("refit failed: {0}")]
    Refit(#[from] ModelError),
    #[error(transparent)]
    Data(#[from] crate::data::DataError),
}

/// A named hyperparameter grid; the Cartesian product of the axes defines
/// the candidates, ordered lexicographically by parameter name and then by
/// the listed value order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperGrid {
    pub kind: ModelKind,
    pub axes: Vec<(String, Vec<ParamValue>)>,
}

impl HyperGrid {
    pub fn new(kind: ModelKind, mut axes: Vec<(String, Vec<ParamValue>)>) -> Self {
        axes.sort_by(|a, b| a.0.cmp(&b.0));
        HyperGrid { kind, axes }
    }

    pub fn candidate_count(&self) -> usize {
        self.axes.iter().map(|(_, values)| values.len().max(1)).product()
    }

    /// All candidates in deterministic order (last axis varies fastest).
    pub fn candidates(&self) -> Vec<ParamMap> {
        let mut out = vec![ParamMap::new()];
        for (name, values) in &self.axes {
            if values.is_empty() {
                continue;
            }
            let mut next = Vec::with_capacity(out.len() * values.len());
            for base in &out {
                for value in values {
                    let mut candidate = base.clone();
                    candidate.insert(name.clone(), value.clone());
                    next.push(candidate);
                }
            }
            out = next;
        }
        out
    }
}

/// Stratified cross-validation fold assignments over a label slice.
/// Index values are positions within that slice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    /// Per fold: `(train_positions, validation_positions)`.
    pub folds: Vec<(Vec<usize>, Vec<usize>)>,
    pub seed: u64,
}

/// Deals each class's shuffled members round-robin across `k` folds, which
/// keeps every fold's class counts within one of each other.
pub fn stratified_kfold(labels: &[usize], k: usize, seed: u64) -> Result<FoldPlan, TuningError> {
    if k < 2 {
        return Err(TuningError::BadK(k));
    }
    let num_classes = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut per_class: Vec<Vec<usize>> = vec![Vec::new(); num_classes];
    for (pos, &label) in labels.iter().enumerate() {
        per_class[label].push(pos);
    }
    for (class, members) in per_class.iter().enumerate() {
        if !members.is_empty() && members.len() < k {
            return Err(TuningError::ClassTooSmall { class, count: members.len(), k });
        }
    }

    let mut assignment: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (class, members) in per_class.iter().enumerate() {
        let mut shuffled = members.clone();
        shuffle(&mut shuffled, &mut stream_rng(seed, 0x70_1d + class as u64));
        for (i, pos) in shuffled.into_iter().enumerate() {
            assignment[i % k].push(pos);
        }
    }

    let folds = (0..k)
        .map(|fold| {
            let mut validation = assignment[fold].clone();
            validation.sort_unstable();
            let mut train: Vec<usize> = assignment
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != fold)
                .flat_map(|(_, v)| v.iter().copied())
                .collect();
            train.sort_unstable();
            (train, validation)
        })
        .collect();

    Ok(FoldPlan { k, folds, seed })
}

/// Scoring function over validation-set probabilities and truth labels.
pub type Scorer = dyn Fn(&ProbMatrix, &[usize]) -> Result<f64, String> + Sync;

/// Weighted one-vs-rest AUC, the default model-selection score.
pub fn weighted_auc_scorer(probs: &ProbMatrix, truth: &[usize]) -> Result<f64, String> {
    metrics::auc_ovr(probs, truth)
        .map(|(weighted, _)| weighted)
        .map_err(|e| e.to_string())
}

/// A trained model together with the scaler that standardizes its inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedPipeline {
    pub scaler: Scaler,
    pub model: TrainedModel,
}

impl FittedPipeline {
    pub fn predict_proba(&self, raw: &FeatureMatrix) -> ProbMatrix {
        self.model.predict_proba(&apply_scaler(&self.scaler, raw))
    }

    pub fn predict(&self, raw: &FeatureMatrix) -> Vec<usize> {
        let probs = self.predict_proba(raw);
        (0..probs.n_rows()).map(|i| argmax(probs.row(i))).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateResult {
    pub params: ParamMap,
    /// One score per fold; `None` where the fit or scoring failed.
    pub fold_scores: Vec<Option<f64>>,
    /// Mean over folds; `None` for disqualified candidates (treated as
    /// -inf in selection).
    pub mean_score: Option<f64>,
    pub std_score: Option<f64>,
    pub disqualified: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningResult {
    pub kind: ModelKind,
    pub candidates: Vec<CandidateResult>,
    pub best_index: usize,
    pub best_mean_score: f64,
    /// Always `candidates x k`, counting disqualified attempts.
    pub total_fits: usize,
    pub tuning_time: f64,
    pub average_tuning_time: f64,
    pub best_model_fit_time: f64,
    pub pipeline: FittedPipeline,
}

/// Fits one candidate on one fold and scores it on the validation portion.
/// Exposed for the leakage test: the returned scaler must depend only on
/// the fold's training rows.
#[allow(clippy::too_many_arguments)]
pub(crate) fn fit_candidate_fold(
    kind: ModelKind,
    x: &FeatureMatrix,
    y: &[usize],
    num_classes: usize,
    train_pos: &[usize],
    val_pos: &[usize],
    params: &ParamMap,
    seed: u64,
    scorer: &Scorer,
) -> Result<(f64, Scaler), String> {
    let x_train_raw = x.select_rows(train_pos);
    let y_train: Vec<usize> = train_pos.iter().map(|&i| y[i]).collect();
    let all: Vec<usize> = (0..x_train_raw.n_rows()).collect();
    let scaler = fit_scaler(&x_train_raw, &all).map_err(|e| e.to_string())?;
    let x_train = apply_scaler(&scaler, &x_train_raw);

    let model = fit_model(kind, &x_train, &y_train, num_classes, params, seed)
        .map_err(|e| e.to_string())?;

    let x_val = apply_scaler(&scaler, &x.select_rows(val_pos));
    let y_val: Vec<usize> = val_pos.iter().map(|&i| y[i]).collect();
    let probs = model.predict_proba(&x_val);
    let score = scorer(&probs, &y_val)?;
    Ok((score, scaler))
}

/// Evaluates every candidate on every fold, selects the best mean score
/// (ties to the earliest candidate), and refits it on the full training
/// set. `x` and `y` are the raw (unstandardized) training rows.
pub fn grid_search(
    grid: &HyperGrid,
    x: &FeatureMatrix,
    y: &[usize],
    num_classes: usize,
    folds: &FoldPlan,
    scorer: &Scorer,
    seed: u64,
) -> Result<TuningResult, TuningError> {
    let candidates = grid.candidates();
    if candidates.is_empty() {
        return Err(TuningError::EmptyGrid { kind: grid.kind.id().to_string() });
    }
    let k = folds.k;
    let total_fits = candidates.len() * k;
    let started = Instant::now();

    // one job per candidate x fold, reduced in candidate order
    let scores: Vec<Result<f64, String>> = exec::map_indices(total_fits, |job| {
        let candidate = job / k;
        let fold = job % k;
        let (train_pos, val_pos) = &folds.folds[fold];
        fit_candidate_fold(
            grid.kind,
            x,
            y,
            num_classes,
            train_pos,
            val_pos,
            &candidates[candidate],
            derive_seed(seed, job as u64),
            scorer,
        )
        .map(|(score, _)| score)
    });

    let mut results = Vec::with_capacity(candidates.len());
    for (c, params) in candidates.into_iter().enumerate() {
        let fold_results = &scores[c * k..(c + 1) * k];
        let mut fold_scores = Vec::with_capacity(k);
        let mut disqualified = None;
        for r in fold_results {
            match r {
                Ok(s) => fold_scores.push(Some(*s)),
                Err(reason) => {
                    fold_scores.push(None);
                    if disqualified.is_none() {
                        disqualified = Some(reason.clone());
                    }
                }
            }
        }
        let (mean_score, std_score) = if disqualified.is_some() {
            (None, None)
        } else {
            let vals: Vec<f64> = fold_scores.iter().map(|s| s.unwrap()).collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / vals.len() as f64;
            (Some(mean), Some(var.sqrt()))
        };
        results.push(CandidateResult { params, fold_scores, mean_score, std_score, disqualified });
    }

    let best_index = results
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.mean_score.map(|m| (i, m)))
        .max_by(|(ia, ma), (ib, mb)| ma.partial_cmp(mb).unwrap().then(ib.cmp(ia)))
        .map(|(i, _)| i)
        .ok_or(TuningError::AllCandidatesDisqualified(results.len()))?;
    let best_mean_score = results[best_index].mean_score.unwrap();

    let tuning_time = started.elapsed().as_secs_f64();

    let refit_started = Instant::now();
    let all: Vec<usize> = (0..x.n_rows()).collect();
    let scaler = fit_scaler(x, &all)?;
    let x_std = apply_scaler(&scaler, x);
    let model = fit_model(grid.kind, &x_std, y, num_classes, &results[best_index].params, seed)?;
    let best_model_fit_time = refit_started.elapsed().as_secs_f64();

    Ok(TuningResult {
        kind: grid.kind,
        candidates: results,
        best_index,
        best_mean_score,
        total_fits,
        tuning_time,
        average_tuning_time: tuning_time / total_fits as f64,
        best_model_fit_time,
        pipeline: FittedPipeline { scaler, model },
    })
}

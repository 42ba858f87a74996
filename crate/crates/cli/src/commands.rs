//! The five pipeline subcommands over a shared config and results store.

use anyhow::{anyhow, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::json;

use occml::data::{self, Dataset, Split, NUM_CLASSES};
use occml::eda;
use occml::explain::{explain_samples, shap_summary, MarginalValue, ShapMode};
use occml::matrix::FeatureMatrix;
use occml::metrics::{evaluate, EvaluationReport};
use occml::models::ModelKind;
use occml::report as tables;
use occml::rng::{sample_without_replacement, stream_rng};
use occml::tuning::{
    grid_search, stratified_kfold, weighted_auc_scorer, CandidateResult, FittedPipeline,
    TuningError, TuningResult,
};

use crate::config::RunConfig;
use crate::store::{written_at, Store};

/// Exit codes: 2 input, 3 tuning, 4 evaluation/explanation, 5 report.
pub struct CmdError {
    pub code: i32,
    pub error: anyhow::Error,
}

impl CmdError {
    fn new(code: i32, error: anyhow::Error) -> Self {
        CmdError { code, error }
    }
}

pub type CmdResult = std::result::Result<(), CmdError>;

fn input_err<T>(r: Result<T>) -> std::result::Result<T, CmdError> {
    r.map_err(|e| CmdError::new(2, e))
}

/// Deterministic part of a tuning artifact; timings live in the sidecar.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TuningBody {
    pub kind: ModelKind,
    pub candidates: Vec<CandidateResult>,
    pub best_index: usize,
    pub best_mean_score: f64,
    pub total_fits: usize,
    pub pipeline: FittedPipeline,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OlsBody {
    pub response: String,
    pub regressor: String,
    pub intercept: f64,
    pub slope: f64,
}

pub fn tuning_file(kind: ModelKind) -> String {
    format!("tuning_{}.json", kind.id())
}

pub fn evaluation_file(kind: ModelKind) -> String {
    format!("evaluation_{}.json", kind.id())
}

struct RunContext {
    config: RunConfig,
    store: Store,
    dataset: Dataset,
}

fn prepare(config: &RunConfig) -> std::result::Result<RunContext, CmdError> {
    let store = input_err(Store::new(&config.out_dir, &config.hash(), config.seed))?;
    let dataset = input_err(config.load_dataset())?;
    Ok(RunContext { config: config.clone(), store, dataset })
}

fn compute_split(ctx: &RunContext) -> std::result::Result<Split, CmdError> {
    input_err(
        data::split(&ctx.dataset, ctx.config.test_fraction, ctx.config.seed, true)
            .context("splitting dataset"),
    )
}

fn write_split(ctx: &RunContext, split: &Split) -> std::result::Result<(), CmdError> {
    input_err(
        ctx.store
            .write_json("split.json", "split", None, split, written_at())
            .map(|_| ()),
    )
}

pub fn cmd_eda(config: &RunConfig) -> CmdResult {
    let ctx = prepare(config)?;
    let report = input_err(eda::eda_report(&ctx.dataset).context("running the analysis"))?;

    input_err(
        ctx.store
            .write_json("eda.json", "eda", None, &report, written_at())
            .map(|_| ()),
    )?;
    input_err(
        ctx.store
            .write_text("autocorr.csv", "autocorr_table", &tables::autocorr_table_csv(&report))
            .map(|_| ()),
    )?;
    input_err(
        ctx.store
            .write_text("corr.csv", "correlation_matrix", &tables::correlation_matrix_csv(&report))
            .map(|_| ()),
    )?;
    let ols = OlsBody {
        response: data::LABEL_NAME.to_string(),
        regressor: "S5_CO2_Slope".to_string(),
        intercept: report.ols_intercept,
        slope: report.ols_slope,
    };
    input_err(ctx.store.write_json("ols.json", "ols", None, &ols, written_at()).map(|_| ()))?;

    for name in Dataset::numeric_column_names() {
        let series = input_err(eda::time_series(&ctx.dataset, name).context("exporting series"))?;
        let mut csv = String::from("row_index,value\n");
        for (i, v) in series {
            csv.push_str(&format!("{i},{v}\n"));
        }
        input_err(
            ctx.store
                .write_text(&format!("series_{name}.csv"), "time_series", &csv)
                .map(|_| ()),
        )?;
    }
    println!("eda: wrote eda.json, autocorr.csv, corr.csv, ols.json and 17 series files to {}",
        ctx.store.dir().display());
    Ok(())
}

#[allow(clippy::result_large_err)]
fn tune_one(
    ctx: &RunContext,
    split: &Split,
    kind: ModelKind,
) -> std::result::Result<TuningResult, CmdError> {
    let features = ctx.dataset.features();
    let labels = ctx.dataset.labels();
    let x_train = features.select_rows(&split.train_indices);
    let y_train: Vec<usize> = split.train_indices.iter().map(|&i| labels[i]).collect();

    let folds = stratified_kfold(&y_train, ctx.config.k_folds, ctx.config.seed)
        .map_err(|e| CmdError::new(3, anyhow!(e).context(format!("fold plan for {}", kind.id()))))?;
    let grid = input_err(ctx.config.grid_for(kind))?;
    let result = grid_search(
        &grid,
        &x_train,
        &y_train,
        NUM_CLASSES,
        &folds,
        &weighted_auc_scorer,
        ctx.config.seed,
    )
    .map_err(|e| {
        let code = match e {
            TuningError::AllCandidatesDisqualified(_) => 3,
            _ => 2,
        };
        CmdError::new(code, anyhow!(e).context(format!("tuning {}", kind.id())))
    })?;

    let body = TuningBody {
        kind,
        candidates: result.candidates.clone(),
        best_index: result.best_index,
        best_mean_score: result.best_mean_score,
        total_fits: result.total_fits,
        pipeline: result.pipeline.clone(),
    };
    let mut sidecar = written_at();
    sidecar["tuning_time"] = json!(result.tuning_time);
    sidecar["average_tuning_time"] = json!(result.average_tuning_time);
    sidecar["best_model_fit_time"] = json!(result.best_model_fit_time);
    input_err(
        ctx.store
            .write_json(&tuning_file(kind), "tuning", Some(kind.id()), &body, sidecar)
            .map(|_| ()),
    )?;
    Ok(result)
}

pub fn cmd_tune(config: &RunConfig, only: Option<ModelKind>) -> CmdResult {
    let ctx = prepare(config)?;
    let split = compute_split(&ctx)?;
    write_split(&ctx, &split)?;
    let kinds = match only {
        Some(kind) => vec![kind],
        None => input_err(ctx.config.model_kinds())?,
    };
    for kind in kinds {
        let result = tune_one(&ctx, &split, kind)?;
        let best = &result.candidates[result.best_index];
        println!(
            "tune {}: {} fits, best mean score {:.6}, params {}",
            kind.id(),
            result.total_fits,
            result.best_mean_score,
            serde_json::to_string(&best.params).unwrap_or_default(),
        );
    }
    Ok(())
}

fn load_pipeline(
    ctx: &RunContext,
    kind: ModelKind,
    tune_missing: bool,
    split: &Split,
) -> std::result::Result<TuningBody, CmdError> {
    if !ctx.store.exists(&tuning_file(kind)) {
        if tune_missing {
            tune_one(ctx, split, kind)?;
        } else {
            return Err(CmdError::new(
                4,
                anyhow!(
                    "no tuning artifact for {} in {} (run `occml tune` first or pass --tune-missing)",
                    kind.id(),
                    ctx.store.dir().display()
                ),
            ));
        }
    }
    let artifact = ctx
        .store
        .read_json::<TuningBody>(&tuning_file(kind))
        .map_err(|e| CmdError::new(4, e))?;
    Ok(artifact.body)
}

pub fn cmd_evaluate(config: &RunConfig, only: Option<ModelKind>, tune_missing: bool) -> CmdResult {
    let ctx = prepare(config)?;
    let split = compute_split(&ctx)?;
    write_split(&ctx, &split)?;
    let kinds = match only {
        Some(kind) => vec![kind],
        None => input_err(ctx.config.model_kinds())?,
    };

    let features = ctx.dataset.features();
    let labels = ctx.dataset.labels();
    let x_test = features.select_rows(&split.test_indices);
    let y_test: Vec<usize> = split.test_indices.iter().map(|&i| labels[i]).collect();
    if y_test.is_empty() {
        return Err(CmdError::new(4, anyhow!("test split is empty")));
    }

    let mut results: Vec<(ModelKind, EvaluationReport)> = Vec::new();
    for kind in kinds {
        let body = load_pipeline(&ctx, kind, tune_missing, &split)?;
        let probs = body.pipeline.predict_proba(&x_test);
        let preds = body.pipeline.predict(&x_test);
        let report = evaluate(&y_test, &preds, &probs, NUM_CLASSES)
            .map_err(|e| CmdError::new(4, anyhow!(e).context(format!("evaluating {}", kind.id()))))?;
        input_err(
            ctx.store
                .write_json(&evaluation_file(kind), "evaluation", Some(kind.id()), &report, written_at())
                .map(|_| ()),
        )?;
        println!(
            "evaluate {}: weighted F1 {:.5}, weighted AUC {}, balanced accuracy {:.5}",
            kind.id(),
            report.weighted_f1,
            report
                .weighted_auc
                .map(|a| format!("{a:.5}"))
                .unwrap_or_else(|| "N/A".to_string()),
            report.balanced_accuracy_macro,
        );
        results.push((kind, report));
    }

    let table = tables::results_table_csv(&results);
    input_err(ctx.store.write_text("results_table.csv", "results_table", &table).map(|_| ()))?;
    Ok(())
}

/// Explanation artifact body: attributions plus the summary ranking.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExplanationBody {
    pub model: ModelKind,
    pub feature_names: Vec<String>,
    pub base_values: Vec<f64>,
    pub n_permutations: usize,
    pub explained_rows: Vec<usize>,
    pub phi: Vec<Vec<Vec<f64>>>,
    pub standard_errors: Vec<Option<Vec<Vec<f64>>>>,
    pub summary: Vec<(String, f64)>,
}

pub fn cmd_explain(config: &RunConfig, kind: ModelKind, n_samples: Option<usize>) -> CmdResult {
    let ctx = prepare(config)?;
    let split = compute_split(&ctx)?;
    let body = load_pipeline(&ctx, kind, false, &split)?;

    let features = ctx.dataset.features();
    let n_explained = n_samples.unwrap_or(ctx.config.shap_samples).max(1);

    // seeded subsamples: background from train rows, explained from test rows
    let mut bg_rng = stream_rng(ctx.config.seed, 0xb6);
    let bg_count = ctx.config.shap_background.min(split.train_indices.len()).max(1);
    let bg_pick = sample_without_replacement(split.train_indices.len(), bg_count, &mut bg_rng);
    let bg_rows: Vec<usize> = bg_pick.iter().map(|&p| split.train_indices[p]).collect();
    let background = features.select_rows(&bg_rows);

    let mut ex_rng = stream_rng(ctx.config.seed, 0xe7);
    let ex_count = n_explained.min(split.test_indices.len());
    let ex_pick = sample_without_replacement(split.test_indices.len(), ex_count, &mut ex_rng);
    let mut explained_rows: Vec<usize> = ex_pick.iter().map(|&p| split.test_indices[p]).collect();
    explained_rows.sort_unstable();
    let samples = features.select_rows(&explained_rows);

    let pipeline = &body.pipeline;
    let vf = MarginalValue::new(
        |x: &FeatureMatrix| pipeline.predict_proba(x),
        &background,
        NUM_CLASSES,
    )
    .map_err(|e| CmdError::new(4, anyhow!(e)))?;

    let mode = ShapMode::Sampled { n_permutations: ctx.config.shap_permutations.max(1) };
    let explanation = explain_samples(&vf, &samples, mode, ctx.config.seed)
        .map_err(|e| CmdError::new(4, anyhow!(e).context("explaining samples")))?;
    let summary = shap_summary(&explanation).map_err(|e| CmdError::new(4, anyhow!(e)))?;

    let names: Vec<String> = ctx.dataset.feature_names.clone();
    let mut csv = String::from("feature,mean_abs_shap\n");
    let mut named_summary = Vec::new();
    for entry in &summary.entries {
        csv.push_str(&format!("{},{}\n", names[entry.feature], entry.mean_abs_phi));
        named_summary.push((names[entry.feature].clone(), entry.mean_abs_phi));
    }
    input_err(
        ctx.store
            .write_text(&format!("shap_summary_{}.csv", kind.id()), "shap_summary", &csv)
            .map(|_| ()),
    )?;

    let artifact = ExplanationBody {
        model: kind,
        feature_names: names,
        base_values: explanation.base_values.clone(),
        n_permutations: ctx.config.shap_permutations,
        explained_rows,
        phi: explanation.samples.iter().map(|s| s.phi.clone()).collect(),
        standard_errors: explanation.samples.iter().map(|s| s.standard_errors.clone()).collect(),
        summary: named_summary,
    };
    input_err(
        ctx.store
            .write_json(
                &format!("explanation_{}.json", kind.id()),
                "explanation",
                Some(kind.id()),
                &artifact,
                written_at(),
            )
            .map(|_| ()),
    )?;
    println!(
        "explain {}: {} samples, top features: {}",
        kind.id(),
        artifact.phi.len(),
        artifact
            .summary
            .iter()
            .take(3)
            .map(|(n, v)| format!("{n} ({v:.4})"))
            .collect::<Vec<_>>()
            .join(", "),
    );
    Ok(())
}

fn csv_to_markdown(csv: &str) -> String {
    let mut out = String::new();
    for (i, line) in csv.lines().enumerate() {
        out.push_str("| ");
        out.push_str(&line.replace(',', " | "));
        out.push_str(" |\n");
        if i == 0 {
            let cols = line.split(',').count();
            out.push_str(&format!("|{}\n", " --- |".repeat(cols)));
        }
    }
    out
}

pub fn cmd_report(config: &RunConfig) -> CmdResult {
    let ctx = prepare(config)?;
    let hash = ctx.config.hash();
    let mut missing: Vec<String> = Vec::new();
    let mut warnings: Vec<String> = Vec::new();

    if let Ok(index) = ctx.store.read_index() {
        for (file, entry) in &index.entries {
            if entry.config_hash != hash {
                warnings.push(format!(
                    "stale artifact {file}: config hash {} does not match current {hash}",
                    entry.config_hash
                ));
            }
        }
    } else {
        warnings.push("no artifact index found in the output directory".into());
    }

    let kinds = input_err(ctx.config.model_kinds())?;

    // Table 4-style results
    let mut evaluations: Vec<(ModelKind, EvaluationReport)> = Vec::new();
    for &kind in &kinds {
        match ctx.store.read_json::<EvaluationReport>(&evaluation_file(kind)) {
            Ok(a) => evaluations.push((kind, a.body)),
            Err(_) => missing.push(evaluation_file(kind)),
        }
    }

    // Table 5-style timings from tuning sidecars
    let mut timings: Vec<tables::TimingRow> = Vec::new();
    for &kind in &kinds {
        match ctx.store.read_json::<TuningBody>(&tuning_file(kind)) {
            Ok(a) => {
                let side = &a.sidecar;
                timings.push(tables::TimingRow {
                    kind,
                    total_fits: a.body.total_fits,
                    tuning_time: side["tuning_time"].as_f64().unwrap_or(0.0),
                    average_tuning_time: side["average_tuning_time"].as_f64().unwrap_or(0.0),
                    best_model_fit_time: side["best_model_fit_time"].as_f64().unwrap_or(0.0),
                });
            }
            Err(_) => missing.push(tuning_file(kind)),
        }
    }

    let eda_artifact = match ctx.store.read_json::<eda::EdaReport>("eda.json") {
        Ok(a) => Some(a.body),
        Err(_) => {
            missing.push("eda.json".into());
            None
        }
    };

    let timing_csv = tables::timing_table_csv(&timings);
    input_err(ctx.store.write_text("timing_table.csv", "timing_table", &timing_csv).map(|_| ()))?;

    let mut md = String::new();
    md.push_str("# Room-occupancy benchmark report\n\n");
    md.push_str(&format!("- config hash: `{hash}`\n- seed: {}\n- grid profile: {:?}\n\n",
        ctx.config.seed, ctx.config.grid_profile));
    for w in &warnings {
        md.push_str(&format!("> warning: {w}\n"));
    }
    if !warnings.is_empty() {
        md.push('\n');
    }

    if !evaluations.is_empty() {
        md.push_str("## Prediction results (values x1000, `*` flags column best)\n\n");
        md.push_str(&csv_to_markdown(&tables::results_table_csv(&evaluations)));
        md.push('\n');
    }
    if !timings.is_empty() {
        md.push_str("## Tuning and fitting times (seconds)\n\n");
        md.push_str(&csv_to_markdown(&timing_csv));
        md.push('\n');
    }
    if let Some(eda_report) = &eda_artifact {
        md.push_str("## Lag-1 autocorrelation by column\n\n");
        md.push_str(&csv_to_markdown(&tables::autocorr_table_csv(eda_report)));
        md.push_str(&format!(
            "\nLeast squares of {} on S5_CO2_Slope: intercept {:.4}, slope {:.4}\n\n",
            data::LABEL_NAME,
            eda_report.ols_intercept,
            eda_report.ols_slope
        ));
    }
    if !missing.is_empty() {
        md.push_str("## Missing artifacts\n\n");
        for m in &missing {
            md.push_str(&format!("- {m}\n"));
        }
    }
    input_err(ctx.store.write_text("report.md", "report", &md).map(|_| ()))?;

    if missing.is_empty() {
        println!("report: wrote report.md and timing_table.csv to {}", ctx.store.dir().display());
        Ok(())
    } else {
        Err(CmdError::new(
            5,
            anyhow!("report incomplete; missing artifacts: {}", missing.join(", ")),
        ))
    }
}

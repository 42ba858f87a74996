//! Acceptance suite: one test per criterion, each printing a PASS line
//! (run with `--nocapture` to see them).
//!
//! Criteria 1-6 are fully offline. Criteria 7-11 need the public
//! room-occupancy sensor CSV; point `OCCML_UCI_CSV` at it (default
//! `data/Occupancy_Estimation.csv` at the workspace root). When the file
//! is absent those criteria print SKIP and exit green, so the offline
//! suite stays meaningful.
//!
//! Recommended: `cargo test -p occml-cli --test acceptance -- --nocapture
//! --test-threads=1`

#![allow(clippy::needless_range_loop)] // numeric asserts index parallel arrays

use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

use rand::Rng;

use occml::data::{self, generate_synthetic, NUM_CLASSES};
use occml::eda;
use occml::explain::{shap_exact, shap_sampled, MarginalValue, SubsetValue};
use occml::matrix::{argmax, FeatureMatrix, ProbMatrix};
use occml::metrics::{self, auc_ovr, confusion_matrix, evaluate, weighted_aggregate};
use occml::models::{
    fit_decision_tree, fit_model, init_layers, mlp_loss_and_gradient, softmax_loss_and_gradient,
    ModelKind, ParamMap, ParamValue, TreeParams,
};
use occml::rng::{standard_normal, stream_rng};
use occml::tuning::{default_grid, grid_search, stratified_kfold, weighted_auc_scorer, GridProfile};

fn pass(criterion: u32, name: &str, detail: &str) {
    println!("ACCEPTANCE {criterion:2} ({name}): PASS {detail}");
}

fn skip(criterion: u32, name: &str, reason: &str) {
    println!("ACCEPTANCE {criterion:2} ({name}): SKIP - {reason}");
}

// ---------------------------------------------------------------- 1

/// Pair-counting oracle: P(pos > neg) + 0.5 P(tie).
fn pair_counting_auc(scores: &[f64], positives: &[bool]) -> Option<f64> {
    let pos: Vec<f64> =
        scores.iter().zip(positives).filter(|(_, &p)| p).map(|(&s, _)| s).collect();
    let neg: Vec<f64> =
        scores.iter().zip(positives).filter(|(_, &p)| !p).map(|(&s, _)| s).collect();
    if pos.is_empty() || neg.is_empty() {
        return None;
    }
    let mut total = 0.0;
    for &p in &pos {
        for &n in &neg {
            total += if p > n { 1.0 } else if p == n { 0.5 } else { 0.0 };
        }
    }
    Some(total / (pos.len() * neg.len()) as f64)
}

#[test]
fn acceptance_01_metric_oracle_equivalence() {
    let started = Instant::now();
    let mut rng = stream_rng(20_240_101, 0);
    for instance in 0..500 {
        let c = rng.gen_range(2..=4usize);
        let n = rng.gen_range(2..=50usize);
        let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..c)).collect();
        // quantized scores force tie handling
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..c).map(|_| rng.gen_range(0..=12) as f64 / 12.0).collect())
            .collect();
        let probs = FeatureMatrix::from_rows(rows.clone());

        let Ok((weighted, per_class)) = auc_ovr(&probs, &labels) else {
            continue; // single-class instance: AUC undefined everywhere
        };
        let mut oracle_values = vec![None; c];
        for class in 0..c {
            let flags: Vec<bool> = labels.iter().map(|&l| l == class).collect();
            let column: Vec<f64> = rows.iter().map(|r| r[class]).collect();
            oracle_values[class] = pair_counting_auc(&column, &flags);
            match (per_class[class], oracle_values[class]) {
                (Some(rank), Some(brute)) => assert!(
                    (rank - brute).abs() < 1e-12,
                    "instance {instance} class {class}: {rank} vs {brute}"
                ),
                (None, None) => {}
                (a, b) => panic!("definedness mismatch: {a:?} vs {b:?}"),
            }
        }
        // weighted aggregate equals the direct support-weighted mean
        let supports: Vec<f64> =
            (0..c).map(|k| labels.iter().filter(|&&l| l == k).count() as f64).collect();
        let direct_num: f64 = oracle_values
            .iter()
            .zip(&supports)
            .filter_map(|(v, w)| v.map(|v| v * w))
            .sum();
        let direct_den: f64 =
            oracle_values.iter().zip(&supports).filter_map(|(v, w)| v.map(|_| w)).sum();
        let direct = direct_num / direct_den;
        assert!((weighted - direct).abs() < 1e-12, "instance {instance}: weighted");
        let via_fn = weighted_aggregate(&per_class, &supports).unwrap();
        assert!((weighted - via_fn).abs() < 1e-12);
    }
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 10.0, "criterion 1 took {elapsed:.1}s, budget 10s");
    pass(1, "metric oracle equivalence", &format!("500 instances in {elapsed:.2}s"));
}

// ---------------------------------------------------------------- 2

#[test]
fn acceptance_02_gradient_checks() {
    let started = Instant::now();
    let mut worst: f64 = 0.0;
    let h = 1e-6;
    let rel = |analytic: f64, numeric: f64| {
        (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8)
    };

    for instance in 0..10u64 {
        // softmax regression at a random point
        let mut rng = stream_rng(7_000 + instance, 0);
        let n = rng.gen_range(4..10usize);
        let d = rng.gen_range(2..5usize);
        let c = rng.gen_range(2..4usize);
        let x = FeatureMatrix::from_rows(
            (0..n).map(|_| (0..d).map(|_| standard_normal(&mut rng)).collect()).collect(),
        );
        let y: Vec<usize> = (0..n).map(|_| rng.gen_range(0..c)).collect();
        let l2 = rng.gen_range(0.0..0.5);
        let mut weights = FeatureMatrix::from_rows(
            (0..c).map(|_| (0..d).map(|_| 0.3 * standard_normal(&mut rng)).collect()).collect(),
        );
        let mut bias: Vec<f64> = (0..c).map(|_| 0.3 * standard_normal(&mut rng)).collect();
        let (_, gw, gb) = softmax_loss_and_gradient(&weights, &bias, &x, &y, l2);
        for k in 0..c {
            for j in 0..d {
                let orig = weights.get(k, j);
                weights.set(k, j, orig + h);
                let (lp, _, _) = softmax_loss_and_gradient(&weights, &bias, &x, &y, l2);
                weights.set(k, j, orig - h);
                let (lm, _, _) = softmax_loss_and_gradient(&weights, &bias, &x, &y, l2);
                weights.set(k, j, orig);
                worst = worst.max(rel(gw.get(k, j), (lp - lm) / (2.0 * h)));
            }
            let orig = bias[k];
            bias[k] = orig + h;
            let (lp, _, _) = softmax_loss_and_gradient(&weights, &bias, &x, &y, l2);
            bias[k] = orig - h;
            let (lm, _, _) = softmax_loss_and_gradient(&weights, &bias, &x, &y, l2);
            bias[k] = orig;
            worst = worst.max(rel(gb[k], (lp - lm) / (2.0 * h)));
        }
    }

    for instance in 0..10u64 {
        // MLP at a seeded random initialization
        let mut rng = stream_rng(8_000 + instance, 1);
        let n = 5;
        let d = rng.gen_range(2..5usize);
        let c = rng.gen_range(2..4usize);
        let hidden = rng.gen_range(3..6usize);
        let x = FeatureMatrix::from_rows(
            (0..n).map(|_| (0..d).map(|_| standard_normal(&mut rng)).collect()).collect(),
        );
        let y: Vec<usize> = (0..n).map(|_| rng.gen_range(0..c)).collect();
        let l2 = 0.01;
        let mut layers = init_layers(d, &[hidden], c, 5_000 + instance);
        let (_, grads) = mlp_loss_and_gradient(&layers, &x, &y, l2);
        for l in 0..layers.len() {
            for k in 0..layers[l].weights.n_rows() {
                for j in 0..layers[l].weights.n_cols() {
                    let orig = layers[l].weights.get(k, j);
                    layers[l].weights.set(k, j, orig + h);
                    let (lp, _) = mlp_loss_and_gradient(&layers, &x, &y, l2);
                    layers[l].weights.set(k, j, orig - h);
                    let (lm, _) = mlp_loss_and_gradient(&layers, &x, &y, l2);
                    layers[l].weights.set(k, j, orig);
                    worst = worst.max(rel(grads[l].weights.get(k, j), (lp - lm) / (2.0 * h)));
                }
                let orig = layers[l].bias[k];
                layers[l].bias[k] = orig + h;
                let (lp, _) = mlp_loss_and_gradient(&layers, &x, &y, l2);
                layers[l].bias[k] = orig - h;
                let (lm, _) = mlp_loss_and_gradient(&layers, &x, &y, l2);
                layers[l].bias[k] = orig;
                worst = worst.max(rel(grads[l].bias[k], (lp - lm) / (2.0 * h)));
            }
        }
    }

    let elapsed = started.elapsed().as_secs_f64();
    assert!(worst < 1e-5, "worst relative gradient error {worst}");
    assert!(elapsed < 30.0, "criterion 2 took {elapsed:.1}s, budget 30s");
    pass(2, "gradient checks", &format!("20 instances, worst rel err {worst:.2e}, {elapsed:.2}s"));
}

// ---------------------------------------------------------------- 3

/// 8-feature, 3-class toy with signal in half the features.
fn shap_toy() -> (FeatureMatrix, Vec<usize>) {
    let mut rng = stream_rng(808, 0);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..90 {
        let class = i % 3;
        let mut row = vec![0.0; 8];
        for (j, value) in row.iter_mut().enumerate() {
            *value = if j < 4 {
                class as f64 * (0.8 + 0.2 * j as f64) + 0.4 * standard_normal(&mut rng)
            } else {
                standard_normal(&mut rng)
            };
        }
        rows.push(row);
        labels.push(class);
    }
    (FeatureMatrix::from_rows(rows), labels)
}

fn shap_quick_params(kind: ModelKind) -> ParamMap {
    let mut p = ParamMap::new();
    match kind {
        ModelKind::Benchmark | ModelKind::Lda | ModelKind::Logistic => {}
        ModelKind::Svm => {
            p.insert("max_epochs".into(), ParamValue::Int(5));
        }
        ModelKind::RandomForest => {
            p.insert("n_trees".into(), ParamValue::Int(15));
        }
        ModelKind::GbtLevel => {
            p.insert("n_rounds".into(), ParamValue::Int(10));
            p.insert("max_depth".into(), ParamValue::Int(3));
        }
        ModelKind::GbtLeaf => {
            p.insert("n_rounds".into(), ParamValue::Int(10));
            p.insert("num_leaves".into(), ParamValue::Int(7));
        }
        ModelKind::Mlp => {
            p.insert("epochs".into(), ParamValue::Int(15));
            p.insert("hidden_sizes".into(), ParamValue::IntList(vec![10]));
        }
    }
    p
}

#[test]
fn acceptance_03_shapley_properties() {
    let started = Instant::now();
    let (x, y) = shap_toy();
    let background = x.select_rows(&(0..15).collect::<Vec<_>>());
    let probe = x.row(40).to_vec();

    // exact-mode efficiency for every model kind
    for kind in ModelKind::ALL {
        let model = fit_model(kind, &x, &y, 3, &shap_quick_params(kind), 3).unwrap();
        let vf = MarginalValue::new(|m: &FeatureMatrix| model.predict_proba(m), &background, 3)
            .unwrap();
        let explanation = shap_exact(&vf, &probe).unwrap();
        let base = vf.values(&probe, &[0]).remove(0);
        let full = vf.values(&probe, &[0xFF]).remove(0);
        for c in 0..3 {
            let total: f64 = (0..8).map(|i| explanation.phi[i][c]).sum();
            let expected = full[c] - base[c];
            assert!(
                (total - expected).abs() < 1e-9,
                "{kind:?} class {c}: efficiency off by {}",
                (total - expected).abs()
            );
        }
    }

    // linear closed form to 1e-9
    let beta0 = 0.4;
    let beta = [1.5, -2.0, 0.5, 3.0, -1.0, 0.25];
    let linear = |m: &FeatureMatrix| {
        let mut out = ProbMatrix::zeros(m.n_rows(), 1);
        for i in 0..m.n_rows() {
            let v = beta0 + m.row(i).iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>();
            out.set(i, 0, v);
        }
        out
    };
    let mut rng = stream_rng(909, 0);
    let lin_bg = FeatureMatrix::from_rows(
        (0..25).map(|_| (0..6).map(|_| standard_normal(&mut rng)).collect()).collect(),
    );
    let lin_x: Vec<f64> = (0..6).map(|_| standard_normal(&mut rng)).collect();
    let vf = MarginalValue::new(linear, &lin_bg, 1).unwrap();
    let explanation = shap_exact(&vf, &lin_x).unwrap();
    for j in 0..6 {
        let mean_j = lin_bg.column(j).iter().sum::<f64>() / lin_bg.n_rows() as f64;
        let closed_form = beta[j] * (lin_x[j] - mean_j);
        assert!(
            (explanation.phi[j][0] - closed_form).abs() < 1e-9,
            "feature {j}: {} vs closed form {closed_form}",
            explanation.phi[j][0]
        );
    }

    // sampled mode within 3 standard errors of exact at 2000 permutations
    let forest = fit_model(
        ModelKind::RandomForest,
        &x,
        &y,
        3,
        &shap_quick_params(ModelKind::RandomForest),
        3,
    )
    .unwrap();
    let vf = MarginalValue::new(|m: &FeatureMatrix| forest.predict_proba(m), &background, 3)
        .unwrap();
    let exact = shap_exact(&vf, &probe).unwrap();
    let sampled = shap_sampled(&vf, &probe, 2000, 17).unwrap();
    let se = sampled.standard_errors.as_ref().unwrap();
    for i in 0..8 {
        for c in 0..3 {
            let dev = (sampled.phi[i][c] - exact.phi[i][c]).abs();
            assert!(
                dev <= 3.0 * se[i][c] + 1e-12,
                "feature {i} class {c}: dev {dev} vs 3se {}",
                3.0 * se[i][c]
            );
        }
    }

    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 120.0, "criterion 3 took {elapsed:.1}s, budget 120s");
    pass(3, "shapley properties", &format!("8 model kinds + closed form + sampling, {elapsed:.2}s"));
}

// ---------------------------------------------------------------- 4

#[test]
fn acceptance_04_reduction_checks() {
    let (x, y) = shap_toy();

    // single-tree, no-bootstrap, all-features forest == plain decision tree
    let mut forest_params = ParamMap::new();
    forest_params.insert("n_trees".into(), ParamValue::Int(1));
    forest_params.insert("bootstrap".into(), ParamValue::Int(0));
    forest_params.insert("max_features".into(), ParamValue::Int(0)); // 0 = all
    let forest = fit_model(ModelKind::RandomForest, &x, &y, 3, &forest_params, 9).unwrap();
    let tree = fit_decision_tree(&x, &y, 3, &TreeParams::default(), 9).unwrap();
    assert_eq!(
        forest.predict_proba(&x),
        tree.predict_proba(&x),
        "degenerate forest must equal a plain decision tree"
    );

    // GBT with lambda = 1e12 predicts the class priors within 1e-3
    let mut gbt_params = ParamMap::new();
    gbt_params.insert("lambda".into(), ParamValue::Float(1e12));
    gbt_params.insert("n_rounds".into(), ParamValue::Int(10));
    gbt_params.insert("min_child_weight".into(), ParamValue::Float(0.0));
    let priors = [30.0 / 90.0, 30.0 / 90.0, 30.0 / 90.0];
    for kind in [ModelKind::GbtLevel, ModelKind::GbtLeaf] {
        let model = fit_model(kind, &x, &y, 3, &gbt_params, 0).unwrap();
        let probs = model.predict_proba(&x);
        for i in 0..x.n_rows() {
            for c in 0..3 {
                assert!(
                    (probs.get(i, c) - priors[c]).abs() < 1e-3,
                    "{kind:?} row {i} class {c}: {} vs prior {}",
                    probs.get(i, c),
                    priors[c]
                );
            }
        }
    }

    // majority baseline scores exactly 0.25 macro balanced accuracy on any
    // test set containing all four classes
    let ds = generate_synthetic(900, 41).unwrap();
    let split = data::split(&ds, 0.3, 4, true).unwrap();
    let labels = ds.labels();
    let y_train: Vec<usize> = split.train_indices.iter().map(|&i| labels[i]).collect();
    let y_test: Vec<usize> = split.test_indices.iter().map(|&i| labels[i]).collect();
    assert!((0..4).all(|c| y_test.contains(&c)), "test split must contain all classes");
    let features = ds.features();
    let x_train = features.select_rows(&split.train_indices);
    let x_test = features.select_rows(&split.test_indices);
    let bench = fit_model(ModelKind::Benchmark, &x_train, &y_train, 4, &ParamMap::new(), 0).unwrap();
    let cm = confusion_matrix(&y_test, &bench.predict(&x_test), 4).unwrap();
    let (ba, _) = metrics::balanced_accuracy(&cm).unwrap();
    assert_eq!(ba, 0.25, "benchmark macro balanced accuracy must be exactly 0.25");

    pass(4, "reduction checks", "forest==tree, GBT->priors, benchmark BA = 0.25");
}

// ---------------------------------------------------------------- 5

fn occml_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_occml"))
}

fn run_pipeline(config: &Path, out: &Path, threads: Option<&str>) {
    for args in [
        vec!["eda"],
        vec!["tune"],
        vec!["evaluate"],
        vec!["explain", "--model", "lda"],
        vec!["report"],
    ] {
        let mut cmd = occml_bin();
        cmd.args(&args)
            .arg("--config")
            .arg(config)
            .arg("--out")
            .arg(out)
            .arg("--fast");
        if let Some(t) = threads {
            cmd.env("OCCML_THREADS", t);
        }
        let output = cmd.output().expect("binary runs");
        assert!(
            output.status.success(),
            "pipeline step {:?} failed: {}",
            args,
            String::from_utf8_lossy(&output.stderr)
        );
    }
}

#[test]
fn acceptance_05_pipeline_determinism() {
    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("config.json");
    let config = serde_json::json!({
        "dataset": {"synthetic": {"n_rows": 1500, "seed": 7}},
        "seed": 42,
        "test_fraction": 0.3,
        "k_folds": 5,
        "grid_profile": "fast",
        "out_dir": dir.path().join("unused"),
        "shap_background": 40,
        "shap_permutations": 8,
        "shap_samples": 12
    });
    std::fs::write(&config_path, config.to_string()).unwrap();

    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    run_pipeline(&config_path, &out_a, None);
    run_pipeline(&config_path, &out_b, None);

    // byte-identical results tables across the two complete runs
    let table_a = std::fs::read(out_a.join("results_table.csv")).unwrap();
    let table_b = std::fs::read(out_b.join("results_table.csv")).unwrap();
    assert_eq!(table_a, table_b, "results tables differ between identical runs");

    // deterministic cores (meta + body) of every JSON artifact match
    let mut checked = 0;
    for entry in std::fs::read_dir(&out_a).unwrap() {
        let name = entry.unwrap().file_name().into_string().unwrap();
        if !name.ends_with(".json") || name == "index.json" {
            continue;
        }
        let a: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out_a.join(&name)).unwrap()).unwrap();
        let b: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out_b.join(&name)).unwrap()).unwrap();
        assert_eq!(a["meta"], b["meta"], "{name}: meta differs");
        assert_eq!(a["body"], b["body"], "{name}: body differs");
        checked += 1;
    }
    assert!(checked >= 18, "expected the full artifact set, found {checked}");

    // OCCML_THREADS=1 vs 8: identical predictions (hence identical
    // evaluation bodies and results tables)
    let out_t1 = dir.path().join("t1");
    let out_t8 = dir.path().join("t8");
    run_pipeline(&config_path, &out_t1, Some("1"));
    run_pipeline(&config_path, &out_t8, Some("8"));
    let table_1 = std::fs::read(out_t1.join("results_table.csv")).unwrap();
    let table_8 = std::fs::read(out_t8.join("results_table.csv")).unwrap();
    assert_eq!(table_1, table_8, "thread count changed the results table");
    for kind in ModelKind::ALL {
        let name = format!("evaluation_{}.json", kind.id());
        let a: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out_t1.join(&name)).unwrap()).unwrap();
        let b: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out_t8.join(&name)).unwrap()).unwrap();
        assert_eq!(a["body"], b["body"], "{name}: predictions differ across thread counts");
    }

    let elapsed = started.elapsed().as_secs_f64();
    pass(5, "pipeline determinism", &format!("4 complete runs in {elapsed:.1}s"));
}

// ---------------------------------------------------------------- 6

#[test]
fn acceptance_06_synthetic_learnability() {
    let started = Instant::now();
    let ds = generate_synthetic(5000, 7).unwrap();
    let split = data::split(&ds, 0.3, 42, true).unwrap();
    let features = ds.features();
    let labels = ds.labels();
    let x_train = features.select_rows(&split.train_indices);
    let y_train: Vec<usize> = split.train_indices.iter().map(|&i| labels[i]).collect();

    let folds = stratified_kfold(&y_train, 5, 42).unwrap();
    let grid = default_grid(ModelKind::RandomForest, GridProfile::Fast);
    let result =
        grid_search(&grid, &x_train, &y_train, NUM_CLASSES, &folds, &weighted_auc_scorer, 42)
            .unwrap();

    let x_test = features.select_rows(&split.test_indices);
    let y_test: Vec<usize> = split.test_indices.iter().map(|&i| labels[i]).collect();
    let preds = result.pipeline.predict(&x_test);
    let probs = result.pipeline.predict_proba(&x_test);
    let report = evaluate(&y_test, &preds, &probs, NUM_CLASSES).unwrap();
    assert!(
        report.balanced_accuracy_macro >= 0.90,
        "tuned forest balanced accuracy {} below the 0.90 floor",
        report.balanced_accuracy_macro
    );
    let elapsed = started.elapsed().as_secs_f64();
    pass(
        6,
        "synthetic learnability",
        &format!("balanced accuracy {:.4} in {elapsed:.1}s", report.balanced_accuracy_macro),
    );
}

// ---------------------------------------------------------------- 7-11

fn uci_csv_path() -> PathBuf {
    if let Ok(p) = std::env::var("OCCML_UCI_CSV") {
        return PathBuf::from(p);
    }
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/Occupancy_Estimation.csv")
}

#[test]
fn acceptance_07_dataset_ingestion() {
    let path = uci_csv_path();
    if !path.exists() {
        skip(7, "dataset ingestion", &format!("dataset not found at {}", path.display()));
        return;
    }
    let started = Instant::now();
    let ds = data::load_dataset(&path).unwrap();
    assert_eq!(ds.n_rows(), 10_129, "expected exactly 10129 records");
    assert_eq!(ds.feature_names.len(), 16);
    assert!(ds.records.iter().all(|r| r.label < 4));
    // the loader rejects missing values, so reaching here proves there are
    // none; the class range is asserted above
    let counts = ds.class_counts();
    assert!(counts.iter().all(|&c| c > 0), "all four classes present: {counts:?}");
    pass(
        7,
        "dataset ingestion",
        &format!("10129 records, classes {counts:?}, {:.2}s", started.elapsed().as_secs_f64()),
    );
}

#[test]
fn acceptance_08_eda_reproduction() {
    let path = uci_csv_path();
    if !path.exists() {
        skip(8, "eda reproduction", &format!("dataset not found at {}", path.display()));
        return;
    }
    let started = Instant::now();
    let ds = data::load_dataset(&path).unwrap();
    let expectations: [(&str, f64, f64); 5] = [
        ("S5_CO2", 0.9999, 0.002),
        ("S5_CO2_Slope", 0.9978, 0.002),
        ("S1_Temp", 0.9968, 0.002),
        ("S1_Sound", 0.4947, 0.01),
        ("Room_Occupancy_Count", 0.9962, 0.002),
    ];
    for (column, expected, tolerance) in expectations {
        let series = ds.numeric_column(column).unwrap();
        let r1 = eda::lag1_autocorrelation(&series).unwrap();
        assert!(
            (r1 - expected).abs() <= tolerance,
            "{column}: lag-1 autocorrelation {r1:.4} vs published {expected} (tol {tolerance})"
        );
    }
    // the full file contains the published training max for S5_CO2
    let co2 = ds.numeric_column("S5_CO2").unwrap();
    let co2_stats = eda::summary_stats("S5_CO2", &co2).unwrap();
    assert_eq!(co2_stats.max, 1270.0, "S5_CO2 max {} vs published 1270.00", co2_stats.max);

    let x = ds.numeric_column("S5_CO2_Slope").unwrap();
    let y = ds.numeric_column("Room_Occupancy_Count").unwrap();
    let (intercept, slope) = eda::ols_fit(&x, &y).unwrap();
    assert!(
        (intercept - 0.4008).abs() <= 0.01,
        "intercept {intercept:.4} vs published 0.4008"
    );
    assert!((slope - 0.4611).abs() <= 0.01, "slope {slope:.4} vs published 0.4611");
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 10.0, "criterion 8 took {elapsed:.1}s, budget 10s");
    pass(
        8,
        "eda reproduction",
        &format!("intercept {intercept:.4}, slope {slope:.4}, {elapsed:.2}s"),
    );
}

/// Shared tuned-and-evaluated state for criteria 9-11: tune and evaluate
/// every model once on the fixed split, through the real binary.
struct UciRuns {
    _dir: tempfile::TempDir,
    out: PathBuf,
    config: PathBuf,
    tune_eval_seconds: f64,
    evaluations: Vec<(ModelKind, occml::metrics::EvaluationReport)>,
}

fn uci_runs() -> &'static Option<UciRuns> {
    static RUNS: OnceLock<Option<UciRuns>> = OnceLock::new();
    RUNS.get_or_init(|| {
        let path = uci_csv_path();
        if !path.exists() {
            return None;
        }
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("out");
        let config_path = dir.path().join("config.json");
        let config = serde_json::json!({
            "dataset": {"path": path.canonicalize().unwrap()},
            "seed": 42,
            "test_fraction": 0.3,
            "k_folds": 5,
            "grid_profile": "fast",
            "out_dir": out,
            "shap_background": 100,
            "shap_permutations": 24,
            "shap_samples": 200
        });
        std::fs::write(&config_path, config.to_string()).unwrap();

        let started = Instant::now();
        for args in [vec!["tune"], vec!["evaluate"]] {
            let output = occml_bin()
                .args(&args)
                .arg("--config")
                .arg(&config_path)
                .output()
                .expect("binary runs");
            assert!(
                output.status.success(),
                "{args:?} failed: {}",
                String::from_utf8_lossy(&output.stderr)
            );
        }
        let tune_eval_seconds = started.elapsed().as_secs_f64();

        let mut evaluations = Vec::new();
        for kind in ModelKind::ALL {
            let text =
                std::fs::read_to_string(out.join(format!("evaluation_{}.json", kind.id())))
                    .unwrap();
            let value: serde_json::Value = serde_json::from_str(&text).unwrap();
            let report: occml::metrics::EvaluationReport =
                serde_json::from_value(value["body"].clone()).unwrap();
            evaluations.push((kind, report));
        }
        Some(UciRuns { _dir: dir, out, config: config_path, tune_eval_seconds, evaluations })
    })
}

#[test]
fn acceptance_09_model_quality_band() {
    let Some(runs) = uci_runs() else {
        skip(9, "model quality band", "dataset not found");
        return;
    };
    let rf = runs
        .evaluations
        .iter()
        .find(|(k, _)| *k == ModelKind::RandomForest)
        .map(|(_, r)| r)
        .unwrap();
    assert!(rf.weighted_f1 >= 0.99, "forest weighted F1 {:.5} < 0.99", rf.weighted_f1);
    assert!(
        rf.balanced_accuracy_macro >= 0.98,
        "forest balanced accuracy {:.5} < 0.98",
        rf.balanced_accuracy_macro
    );
    let rf_auc = rf.weighted_auc.unwrap();
    assert!(rf_auc >= 0.999, "forest weighted AUC {rf_auc:.6} < 0.999");
    for (kind, report) in &runs.evaluations {
        if *kind == ModelKind::Benchmark {
            continue;
        }
        assert!(
            report.weighted_f1 >= 0.97,
            "{} weighted F1 {:.5} < 0.97",
            kind.id(),
            report.weighted_f1
        );
    }
    assert!(
        runs.tune_eval_seconds < 900.0,
        "tune+evaluate took {:.0}s, budget 900s",
        runs.tune_eval_seconds
    );
    pass(
        9,
        "model quality band",
        &format!(
            "forest F1 {:.5} / BA {:.5} / AUC {:.6}; tune+eval {:.0}s",
            rf.weighted_f1, rf.balanced_accuracy_macro, rf_auc, runs.tune_eval_seconds
        ),
    );
}

#[test]
fn acceptance_10_ranking_reproduction() {
    let Some(runs) = uci_runs() else {
        skip(10, "ranking reproduction", "dataset not found");
        return;
    };
    let rf_auc = runs
        .evaluations
        .iter()
        .find(|(k, _)| *k == ModelKind::RandomForest)
        .and_then(|(_, r)| r.weighted_auc)
        .unwrap();
    for (kind, report) in &runs.evaluations {
        if *kind == ModelKind::RandomForest {
            continue;
        }
        if let Some(auc) = report.weighted_auc {
            assert!(
                rf_auc >= auc,
                "{} weighted AUC {auc:.6} exceeds the forest's {rf_auc:.6}",
                kind.id()
            );
        }
    }
    // the emitted table flags the forest's AUC as the column best
    let table = std::fs::read_to_string(runs.out.join("results_table.csv")).unwrap();
    let rf_line = table.lines().find(|l| l.starts_with("Random Forest,")).unwrap();
    let auc_cell = rf_line.split(',').nth(2).unwrap();
    assert!(auc_cell.ends_with('*'), "forest AUC not flagged best: {rf_line}");
    pass(10, "ranking reproduction", &format!("forest weighted AUC {rf_auc:.6} is the maximum"));
}

#[test]
fn acceptance_11_shap_reproduction() {
    let Some(runs) = uci_runs() else {
        skip(11, "shap reproduction", "dataset not found");
        return;
    };
    let started = Instant::now();
    let output = occml_bin()
        .args(["explain", "--model", "random_forest", "--samples", "200"])
        .arg("--config")
        .arg(&runs.config)
        .output()
        .expect("binary runs");
    assert!(
        output.status.success(),
        "explain failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    let summary =
        std::fs::read_to_string(runs.out.join("shap_summary_random_forest.csv")).unwrap();
    let top: Vec<&str> = summary
        .lines()
        .skip(1)
        .take(2)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    let elapsed = started.elapsed().as_secs_f64();
    assert!(
        top.contains(&"S1_Light") && top.contains(&"S2_Light"),
        "top-2 features are {top:?}, expected S1_Light and S2_Light"
    );
    assert!(elapsed < 300.0, "criterion 11 took {elapsed:.0}s, budget 300s");
    pass(11, "shap reproduction", &format!("top-2 {top:?} in {elapsed:.0}s"));
}

// ---------------------------------------------------------------- extras

/// The full-profile grids reproduce the benchmark's fit-count arithmetic
/// without running them (asserted structurally; wall-clock magnitudes are
/// hardware-bound and out of scope).
#[test]
fn acceptance_fit_count_arithmetic() {
    let k = 5;
    let expected = [
        (ModelKind::Lda, 15),
        (ModelKind::Logistic, 15),
        (ModelKind::Svm, 20),
        (ModelKind::Mlp, 40),
        (ModelKind::RandomForest, 1200),
        (ModelKind::GbtLeaf, 2000),
        (ModelKind::GbtLevel, 5760),
    ];
    for (kind, fits) in expected {
        let grid = default_grid(kind, GridProfile::Full);
        assert_eq!(grid.candidate_count() * k, fits, "{kind:?}");
    }
    // and the LDA count holds end to end through a real grid search
    let ds = generate_synthetic(300, 3).unwrap();
    let features = ds.features();
    let labels = ds.labels();
    let folds = stratified_kfold(&labels, 5, 1).unwrap();
    let result = grid_search(
        &default_grid(ModelKind::Lda, GridProfile::Full),
        &features,
        &labels,
        NUM_CLASSES,
        &folds,
        &weighted_auc_scorer,
        1,
    )
    .unwrap();
    assert_eq!(result.total_fits, 15);
    println!("ACCEPTANCE EXTRA (fit-count arithmetic): PASS grid sizes match the published fit counts");
}

/// Degenerate constant predictors report an undefined weighted AUC, and
/// argmax ties resolve to the lowest class index.
#[test]
fn acceptance_reporting_conventions() {
    let probs = FeatureMatrix::from_rows(vec![vec![0.25; 4]; 6]);
    let preds: Vec<usize> = (0..6).map(|i| argmax(probs.row(i))).collect();
    assert!(preds.iter().all(|&p| p == 0), "uniform rows must argmax to class 0");
    let truth = vec![0, 1, 2, 3, 1, 2];
    let report = evaluate(&truth, &preds, &probs, 4).unwrap();
    assert_eq!(report.weighted_auc, None);
    println!("ACCEPTANCE EXTRA (reporting conventions): PASS constant predictor AUC reported as N/A");
}

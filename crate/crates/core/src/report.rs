//! CSV emitters for the benchmark's three summary tables: per-model
//! results (values x1000, best per column flagged), tuning timings, and
//! the per-column lag-1 autocorrelation table.

use crate::eda::EdaReport;
use crate::metrics::EvaluationReport;
use crate::models::ModelKind;
use crate::tuning::TuningResult;

/// One model's timing figures for the timing table.
#[derive(Debug, Clone, PartialEq)]
pub struct TimingRow {
    pub kind: ModelKind,
    pub total_fits: usize,
    pub tuning_time: f64,
    pub average_tuning_time: f64,
    pub best_model_fit_time: f64,
}

impl From<&TuningResult> for TimingRow {
    fn from(r: &TuningResult) -> Self {
        TimingRow {
            kind: r.kind,
            total_fits: r.total_fits,
            tuning_time: r.tuning_time,
            average_tuning_time: r.average_tuning_time,
            best_model_fit_time: r.best_model_fit_time,
        }
    }
}

/// Results table: one row per model, metric values multiplied by 1000 and
/// printed to two decimals, column best flagged with `*`, rows ordered by
/// weighted AUC ascending (undefined AUC first).
pub fn results_table_csv(rows: &[(ModelKind, EvaluationReport)]) -> String {
    let mut ordered: Vec<&(ModelKind, EvaluationReport)> = rows.iter().collect();
    ordered.sort_by(|(ka, a), (kb, b)| match (a.weighted_auc, b.weighted_auc) {
        (None, None) => ka.id().cmp(kb.id()),
        (None, Some(_)) => std::cmp::Ordering::Less,
        (Some(_), None) => std::cmp::Ordering::Greater,
        (Some(x), Some(y)) => x.partial_cmp(&y).unwrap().then(ka.id().cmp(kb.id())),
    });

    let best_f1 = ordered.iter().map(|(_, r)| r.weighted_f1).fold(f64::NEG_INFINITY, f64::max);
    let best_auc = ordered
        .iter()
        .filter_map(|(_, r)| r.weighted_auc)
        .fold(f64::NEG_INFINITY, f64::max);
    let best_ba = ordered
        .iter()
        .map(|(_, r)| r.balanced_accuracy_macro)
        .fold(f64::NEG_INFINITY, f64::max);

    let fmt = |value: f64, best: f64| {
        let cell = format!("{:.2}", value * 1000.0);
        if value == best {
            format!("{cell}*")
        } else {
            cell
        }
    };

    let mut out = String::from("Model,Weighted F1-Score,Weighted AUC,Balanced Accuracy\n");
    for (kind, report) in ordered {
        let auc_cell = match report.weighted_auc {
            Some(auc) => fmt(auc, best_auc),
            None => "N/A".to_string(),
        };
        out.push_str(&format!(
            "{},{},{},{}\n",
            kind.display_name(),
            fmt(report.weighted_f1, best_f1),
            auc_cell,
            fmt(report.balanced_accuracy_macro, best_ba),
        ));
    }
    out
}

/// Timing table: total fits and wall-clock seconds per model, ordered by
/// best-model fitting time ascending.
pub fn timing_table_csv(rows: &[TimingRow]) -> String {
    let mut ordered: Vec<&TimingRow> = rows.iter().collect();
    ordered.sort_by(|a, b| {
        a.best_model_fit_time
            .partial_cmp(&b.best_model_fit_time)
            .unwrap()
            .then(a.kind.id().cmp(b.kind.id()))
    });
    let mut out =
        String::from("Model,Total Fits,Tuning Time,Average Tuning,Fitting Time (Best Model)\n");
    for row in ordered {
        out.push_str(&format!(
            "{},{},{:.2},{:.4},{:.4}\n",
            row.kind.display_name(),
            row.total_fits,
            row.tuning_time,
            row.average_tuning_time,
            row.best_model_fit_time,
        ));
    }
    out
}

/// Two-column autocorrelation table over every numeric column.
pub fn autocorr_table_csv(report: &EdaReport) -> String {
    let mut out = String::from("Column,Autocorrelation\n");
    for (name, r1) in &report.autocorr {
        match r1 {
            Some(v) => out.push_str(&format!("{name},{v:.4}\n")),
            None => out.push_str(&format!("{name},undefined\n")),
        }
    }
    out
}

/// Heatmap-ready correlation matrix (header row and column of names).
pub fn correlation_matrix_csv(report: &EdaReport) -> String {
    let mut out = String::from("Column");
    for name in &report.corr_columns {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (i, name) in report.corr_columns.iter().enumerate() {
        out.push_str(name);
        for j in 0..report.corr_columns.len() {
            match report.corr[i][j] {
                Some(v) => out.push_str(&format!(",{v:.6}")),
                None => out.push_str(",undefined"),
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::FeatureMatrix;
    use crate::metrics::evaluate;

    fn report_for(truth: &[usize], pred: &[usize], probs: FeatureMatrix) -> EvaluationReport {
        evaluate(truth, pred, &probs, 4).unwrap()
    }

    #[test]
    fn results_table_flags_best_and_sorts_na_first() {
        let truth = vec![0, 1, 2, 3, 0, 1, 2, 3];
        // constant predictor: AUC shows N/A
        let bench = report_for(
            &truth,
            &[0; 8],
            FeatureMatrix::from_rows(vec![vec![1.0, 0.0, 0.0, 0.0]; 8]),
        );
        // perfect predictor
        let mut rows = Vec::new();
        for &t in &truth {
            let mut row = vec![0.0; 4];
            row[t] = 1.0;
            rows.push(row);
        }
        let perfect = report_for(&truth, &truth, FeatureMatrix::from_rows(rows));
        let table = results_table_csv(&[
            (ModelKind::RandomForest, perfect),
            (ModelKind::Benchmark, bench),
        ]);
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines[0], "Model,Weighted F1-Score,Weighted AUC,Balanced Accuracy");
        assert!(lines[1].starts_with("Benchmark,"));
        assert!(lines[1].contains(",N/A,"));
        assert!(lines[2].starts_with("Random Forest,1000.00*,1000.00*,1000.00*"));
        assert!(lines[1].contains("250.00"), "benchmark BA cell: {}", lines[1]);
    }

    #[test]
    fn autocorr_table_lists_all_numeric_columns() {
        let ds = crate::data::generate_synthetic(300, 1).unwrap();
        let eda = crate::eda::eda_report(&ds).unwrap();
        let table = autocorr_table_csv(&eda);
        assert_eq!(table.lines().count(), 18); // header + 17 columns
        assert!(table.contains("S5_CO2,"));
        assert!(table.contains("Room_Occupancy_Count,"));
    }

    #[test]
    fn correlation_csv_is_square() {
        let ds = crate::data::generate_synthetic(200, 2).unwrap();
        let eda = crate::eda::eda_report(&ds).unwrap();
        let table = correlation_matrix_csv(&eda);
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines.len(), 18);
        for line in &lines {
            assert_eq!(line.split(',').count(), 18);
        }
    }
}

//! Majority-class baseline: predicts the modal training class everywhere.

use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::matrix::{FeatureMatrix, ProbMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MajorityModel {
    pub modal_class: usize,
    pub num_classes: usize,
}

/// Ties between equally frequent classes go to the lowest class index.
pub fn fit_majority(y: &[usize], num_classes: usize) -> Result<MajorityModel, ModelError> {
    if y.is_empty() {
        return Err(ModelError::EmptyLabels);
    }
    let mut counts = vec![0usize; num_classes];
    for &label in y {
        counts[label] += 1;
    }
    let modal_class = counts
        .iter()
        .enumerate()
        .max_by(|(ia, ca), (ib, cb)| ca.cmp(cb).then(ib.cmp(ia)))
        .map(|(i, _)| i)
        .unwrap();
    Ok(MajorityModel { modal_class, num_classes })
}

impl MajorityModel {
    /// One-hot of the modal class for every row.
    pub fn predict_proba(&self, x: &FeatureMatrix) -> ProbMatrix {
        let mut probs = ProbMatrix::zeros(x.n_rows(), self.num_classes);
        for i in 0..x.n_rows() {
            probs.set(i, self.modal_class, 1.0);
        }
        probs
    }
}

//! One-vs-rest linear SVM trained with the Pegasos primal subgradient
//! method, optionally preceded by a random Fourier feature map that
//! approximates an RBF kernel.
//!
//! Scores are the per-class margins; `predict_proba` is their softmax.
//! These probabilities are uncalibrated but ranking-faithful, which is all
//! the AUC-based model selection needs.

use serde::{Deserialize, Serialize};

use super::{param_f64, param_str, param_usize, ModelError, ParamMap};
use crate::exec;
use crate::matrix::{softmax_inplace, FeatureMatrix, ProbMatrix};
use crate::rng::{shuffle, standard_normal, stream_rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SvmKernel {
    Linear,
    /// Random Fourier features approximating `exp(-gamma * ||x - y||^2)`.
    Rff,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmParams {
    pub c_reg: f64,
    pub max_epochs: usize,
    pub kernel: SvmKernel,
    pub gamma: f64,
    pub rff_features: usize,
}

impl SvmParams {
    pub fn from_params(params: &ParamMap) -> Result<Self, ModelError> {
        let kernel = match param_str(params, "kernel", "linear")? {
            "linear" => SvmKernel::Linear,
            "rff" => SvmKernel::Rff,
            other => {
                return Err(ModelError::InvalidParam {
                    name: "kernel".into(),
                    reason: format!("expected \"linear\" or \"rff\", got {other:?}"),
                })
            }
        };
        let p = SvmParams {
            c_reg: param_f64(params, "c_reg", 1.0)?,
            max_epochs: param_usize(params, "max_epochs", 10)?,
            kernel,
            gamma: param_f64(params, "gamma", 0.1)?,
            rff_features: param_usize(params, "rff_features", 200)?,
        };
        if p.c_reg <= 0.0 {
            return Err(ModelError::InvalidParam {
                name: "c_reg".into(),
                reason: "must be positive".into(),
            });
        }
        if p.kernel == SvmKernel::Rff && p.rff_features == 0 {
            return Err(ModelError::InvalidParam {
                name: "rff_features".into(),
                reason: "must be positive for the rff kernel".into(),
            });
        }
        Ok(p)
    }
}

/// Seeded random Fourier projection: `z_k(x) = sqrt(2/D) cos(w_k.x + b_k)`
/// with `w ~ N(0, 2*gamma*I)` and `b ~ U[0, 2pi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RffMap {
    pub projection: FeatureMatrix,
    pub offsets: Vec<f64>,
    pub gamma: f64,
}

impl RffMap {
    fn new(n_features: usize, n_components: usize, gamma: f64, seed: u64) -> Self {
        let mut rng = stream_rng(seed, 0xF0F);
        let scale = (2.0 * gamma).sqrt();
        let mut projection = FeatureMatrix::zeros(n_components, n_features);
        for k in 0..n_components {
            let row = projection.row_mut(k);
            for v in row.iter_mut() {
                *v = scale * standard_normal(&mut rng);
            }
        }
        use rand::Rng as _;
        let offsets = (0..n_components)
            .map(|_| rng.gen::<f64>() * std::f64::consts::TAU)
            .collect();
        RffMap { projection, offsets, gamma }
    }

    fn transform(&self, x: &FeatureMatrix) -> FeatureMatrix {
        let d_out = self.offsets.len();
        let norm = (2.0 / d_out as f64).sqrt();
        let mut out = FeatureMatrix::zeros(x.n_rows(), d_out);
        for i in 0..x.n_rows() {
            let row = x.row(i);
            let o = out.row_mut(i);
            for k in 0..d_out {
                let w = self.projection.row(k);
                let dot: f64 = w.iter().zip(row).map(|(a, b)| a * b).sum();
                o[k] = norm * (dot + self.offsets[k]).cos();
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    /// Per-class hyperplanes in the (possibly mapped) feature space.
    pub weights: FeatureMatrix,
    pub bias: Vec<f64>,
    pub rff: Option<RffMap>,
    pub num_classes: usize,
}

/// Pegasos on the binary problem `class c` vs rest. The regularizer is
/// `lambda = 1 / (c_reg * n)`; the bias rides along unregularized.
fn pegasos_binary(
    x: &FeatureMatrix,
    targets: &[f64],
    lambda: f64,
    max_epochs: usize,
    seed: u64,
) -> (Vec<f64>, f64) {
    let n = x.n_rows();
    let d = x.n_cols();
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = stream_rng(seed, 0);
    let radius = 1.0 / lambda.sqrt();

    let mut t = 0u64;
    for _ in 0..max_epochs {
        shuffle(&mut order, &mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let row = x.row(i);
            let margin = targets[i] * (b + w.iter().zip(row).map(|(a, c)| a * c).sum::<f64>());
            let decay = 1.0 - eta * lambda;
            for wv in w.iter_mut() {
                *wv *= decay;
            }
            if margin < 1.0 {
                let step = eta * targets[i];
                for (wv, &xv) in w.iter_mut().zip(row) {
                    *wv += step * xv;
                }
                b += step;
            }
            // Pegasos projection onto the ball of radius 1/sqrt(lambda)
            let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > radius {
                let shrink = radius / norm;
                for wv in w.iter_mut() {
                    *wv *= shrink;
                }
            }
        }
    }
    (w, b)
}

pub fn fit_svm_ovr(
    x: &FeatureMatrix,
    y: &[usize],
    num_classes: usize,
    params: &SvmParams,
    seed: u64,
) -> Result<SvmModel, ModelError> {
    let (mapped, rff) = match params.kernel {
        SvmKernel::Linear => (None, None),
        SvmKernel::Rff => {
            let map = RffMap::new(x.n_cols(), params.rff_features, params.gamma, seed);
            (Some(map.transform(x)), Some(map))
        }
    };
    let x_fit = mapped.as_ref().unwrap_or(x);
    let n = x_fit.n_rows();
    let lambda = 1.0 / (params.c_reg * n as f64);

    let solutions = exec::map_indices(num_classes, |class| {
        let targets: Vec<f64> = y
            .iter()
            .map(|&label| if label == class { 1.0 } else { -1.0 })
            .collect();
        pegasos_binary(x_fit, &targets, lambda, params.max_epochs, crate::rng::derive_seed(seed, 1 + class as u64))
    });

    let d = x_fit.n_cols();
    let mut weights = FeatureMatrix::zeros(num_classes, d);
    let mut bias = vec![0.0; num_classes];
    for (c, (w, b)) in solutions.into_iter().enumerate() {
        weights.row_mut(c).copy_from_slice(&w);
        bias[c] = b;
    }
    Ok(SvmModel { weights, bias, rff, num_classes })
}

impl SvmModel {
    /// Per-class margins in the fitted feature space.
    pub fn margins(&self, x: &FeatureMatrix) -> FeatureMatrix {
        let mapped = self.rff.as_ref().map(|m| m.transform(x));
        let x_eval = mapped.as_ref().unwrap_or(x);
        let mut out = FeatureMatrix::zeros(x_eval.n_rows(), self.num_classes);
        for i in 0..x_eval.n_rows() {
            let row = x_eval.row(i);
            let o = out.row_mut(i);
            for c in 0..self.num_classes {
                let w = self.weights.row(c);
                o[c] = self.bias[c] + w.iter().zip(row).map(|(a, b)| a * b).sum::<f64>();
            }
        }
        out
    }

    pub fn predict_proba(&self, x: &FeatureMatrix) -> ProbMatrix {
        let mut probs = self.margins(x);
        for i in 0..probs.n_rows() {
            softmax_inplace(probs.row_mut(i));
        }
        probs
    }
}

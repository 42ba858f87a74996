//! Multinomial logistic regression trained by full-batch gradient descent.
//!
//! Minimizes mean cross-entropy plus `l2/2 * ||W||^2`; the intercept is
//! never penalized, so with overwhelming regularization the model degrades
//! to the empirical class priors (softmax of the fitted intercepts).
//! Weights start at zero, making the fit deterministic without a seed.
//! The ridge term enters each step as a proximal (decoupled) shrink,
//! `w <- (w - lr * grad_ce) / (1 + lr * l2)`, which stays stable for
//! arbitrarily large penalties; convergence is still judged on the full
//! gradient norm of the penalized objective.

use serde::{Deserialize, Serialize};

use super::{param_f64, param_usize, ModelError, ParamMap};
use crate::matrix::{softmax_inplace, FeatureMatrix, ProbMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxParams {
    pub l2: f64,
    pub lr: f64,
    pub max_iters: usize,
    pub tol: f64,
}

impl SoftmaxParams {
    pub fn from_params(params: &ParamMap) -> Result<Self, ModelError> {
        let p = SoftmaxParams {
            l2: param_f64(params, "l2", 1e-4)?,
            lr: param_f64(params, "lr", 0.5)?,
            max_iters: param_usize(params, "max_iters", 300)?,
            tol: param_f64(params, "tol", 1e-4)?,
        };
        if p.l2 < 0.0 {
            return Err(ModelError::InvalidParam {
                name: "l2".into(),
                reason: "must be non-negative".into(),
            });
        }
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftmaxModel {
    /// `num_classes x n_features` weight matrix.
    pub weights: FeatureMatrix,
    pub bias: Vec<f64>,
    pub num_classes: usize,
}

/// Mean cross-entropy plus ridge penalty, with its gradient in `(W, b)`.
/// Public so the finite-difference checks can probe arbitrary points.
pub fn softmax_loss_and_gradient(
    weights: &FeatureMatrix,
    bias: &[f64],
    x: &FeatureMatrix,
    y: &[usize],
    l2: f64,
) -> (f64, FeatureMatrix, Vec<f64>) {
    let n = x.n_rows();
    let d = x.n_cols();
    let c = bias.len();
    let mut grad_w = FeatureMatrix::zeros(c, d);
    let mut grad_b = vec![0.0; c];
    let mut loss = 0.0;
    let mut logits = vec![0.0; c];
    let inv_n = 1.0 / n as f64;

    for i in 0..n {
        let row = x.row(i);
        for (k, logit) in logits.iter_mut().enumerate() {
            let w = weights.row(k);
            *logit = bias[k] + w.iter().zip(row).map(|(a, b)| a * b).sum::<f64>();
        }
        softmax_inplace(&mut logits);
        loss -= (logits[y[i]].max(1e-300)).ln() * inv_n;
        for k in 0..c {
            let err = (logits[k] - if y[i] == k { 1.0 } else { 0.0 }) * inv_n;
            grad_b[k] += err;
            let gw = grad_w.row_mut(k);
            for (g, &xv) in gw.iter_mut().zip(row) {
                *g += err * xv;
            }
        }
    }

    let mut penalty = 0.0;
    for k in 0..c {
        let w = weights.row(k);
        penalty += w.iter().map(|v| v * v).sum::<f64>();
        let gw = grad_w.row_mut(k);
        for (g, &wv) in gw.iter_mut().zip(w) {
            *g += l2 * wv;
        }
    }
    loss += 0.5 * l2 * penalty;
    (loss, grad_w, grad_b)
}

pub fn fit_softmax_regression(
    x: &FeatureMatrix,
    y: &[usize],
    num_classes: usize,
    params: &SoftmaxParams,
) -> Result<SoftmaxModel, ModelError> {
    let d = x.n_cols();
    let mut weights = FeatureMatrix::zeros(num_classes, d);
    let mut bias = vec![0.0; num_classes];

    let shrink = 1.0 / (1.0 + params.lr * params.l2);
    for iter in 0..params.max_iters {
        let (loss, grad_w, grad_b) = softmax_loss_and_gradient(&weights, &bias, x, y, params.l2);
        if !loss.is_finite() {
            return Err(ModelError::NonFiniteLoss { context: format!("iteration {iter}") });
        }
        let grad_norm = (grad_w.as_slice().iter().map(|g| g * g).sum::<f64>()
            + grad_b.iter().map(|g| g * g).sum::<f64>())
        .sqrt();
        if grad_norm < params.tol {
            break;
        }
        for k in 0..num_classes {
            // grad_w includes the l2 term; back it out and apply the
            // penalty as the proximal shrink instead
            let gw = grad_w.row(k);
            let w = weights.row_mut(k);
            for (wv, &g) in w.iter_mut().zip(gw) {
                let g_data = g - params.l2 * *wv;
                *wv = (*wv - params.lr * g_data) * shrink;
            }
            bias[k] -= params.lr * grad_b[k];
        }
    }
    if weights.as_slice().iter().any(|v| !v.is_finite()) || bias.iter().any(|v| !v.is_finite()) {
        return Err(ModelError::NonFiniteLoss { context: "final weights".into() });
    }
    Ok(SoftmaxModel { weights, bias, num_classes })
}

impl SoftmaxModel {
    pub fn predict_proba(&self, x: &FeatureMatrix) -> ProbMatrix {
        let mut probs = ProbMatrix::zeros(x.n_rows(), self.num_classes);
        for i in 0..x.n_rows() {
            let row = x.row(i);
            let out = probs.row_mut(i);
            for k in 0..self.num_classes {
                let w = self.weights.row(k);
                out[k] = self.bias[k] + w.iter().zip(row).map(|(a, b)| a * b).sum::<f64>();
            }
            softmax_inplace(out);
        }
        probs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn separable_toy() -> (FeatureMatrix, Vec<usize>) {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..20 {
            let x = -2.0 - 0.1 * i as f64;
            rows.push(vec![x]);
            labels.push(0);
            rows.push(vec![-x]);
            labels.push(1);
        }
        (FeatureMatrix::from_rows(rows), labels)
    }

    #[test]
    fn separable_toy_reaches_full_accuracy() {
        let (x, y) = separable_toy();
        let params = SoftmaxParams { l2: 0.01, lr: 0.5, max_iters: 500, tol: 1e-7 };
        let model = fit_softmax_regression(&x, &y, 2, &params).unwrap();
        let probs = model.predict_proba(&x);
        let correct = (0..x.n_rows())
            .filter(|&i| crate::matrix::argmax(probs.row(i)) == y[i])
            .count();
        assert_eq!(correct, x.n_rows());
    }

    #[test]
    fn huge_l2_degrades_to_class_priors() {
        // 3:1 imbalance; bias is unpenalized so probabilities approach priors
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![(i as f64 / 40.0) - 0.5]).collect();
        let y: Vec<usize> = (0..40).map(|i| usize::from(i % 4 == 0)).collect();
        let x = FeatureMatrix::from_rows(rows);
        let params = SoftmaxParams { l2: 1e9, lr: 0.5, max_iters: 2000, tol: 1e-10 };
        let model = fit_softmax_regression(&x, &y, 2, &params).unwrap();
        assert!(model.weights.as_slice().iter().all(|w| w.abs() < 1e-4));
        let probs = model.predict_proba(&x);
        assert!((probs.get(0, 0) - 0.75).abs() < 1e-3, "p0 = {}", probs.get(0, 0));
        assert!((probs.get(0, 1) - 0.25).abs() < 1e-3);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let x = FeatureMatrix::from_rows(vec![
            vec![0.5, -1.2],
            vec![-0.3, 0.8],
            vec![1.1, 0.1],
            vec![-0.9, -0.4],
        ]);
        let y = vec![0, 1, 2, 1];
        let l2 = 0.1;
        let mut weights = FeatureMatrix::from_rows(vec![
            vec![0.2, -0.1],
            vec![-0.3, 0.4],
            vec![0.1, 0.05],
        ]);
        let mut bias = vec![0.1, -0.2, 0.3];
        let (_, grad_w, grad_b) = softmax_loss_and_gradient(&weights, &bias, &x, &y, l2);

        let h = 1e-6;
        for k in 0..3 {
            for j in 0..2 {
                let orig = weights.get(k, j);
                weights.set(k, j, orig + h);
                let (lp, _, _) = softmax_loss_and_gradient(&weights, &bias, &x, &y, l2);
                weights.set(k, j, orig - h);
                let (lm, _, _) = softmax_loss_and_gradient(&weights, &bias, &x, &y, l2);
                weights.set(k, j, orig);
                let numeric = (lp - lm) / (2.0 * h);
                let analytic = grad_w.get(k, j);
                let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8);
                assert!(rel < 1e-5, "dW[{k}][{j}]: analytic {analytic}, numeric {numeric}");
            }
            let orig = bias[k];
            bias[k] = orig + h;
            let (lp, _, _) = softmax_loss_and_gradient(&weights, &bias, &x, &y, l2);
            bias[k] = orig - h;
            let (lm, _, _) = softmax_loss_and_gradient(&weights, &bias, &x, &y, l2);
            bias[k] = orig;
            let numeric = (lp - lm) / (2.0 * h);
            let rel = (grad_b[k] - numeric).abs() / grad_b[k].abs().max(numeric.abs()).max(1e-8);
            assert!(rel < 1e-5, "db[{k}]");
        }
    }

    #[test]
    fn divergent_configuration_reports_non_finite_loss() {
        // extreme feature scale with an extreme step size overflows the
        // logits within a couple of iterations
        let x = FeatureMatrix::from_rows(vec![vec![-1e200], vec![1e200]]);
        let y = vec![0, 1];
        let params = SoftmaxParams { l2: 0.0, lr: 1e150, max_iters: 50, tol: 0.0 };
        assert!(matches!(
            fit_softmax_regression(&x, &y, 2, &params),
            Err(ModelError::NonFiniteLoss { .. })
        ));
    }
}

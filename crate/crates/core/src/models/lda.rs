//! Linear discriminant analysis with a pooled, optionally shrunk
//! within-class covariance.
//!
//! The shared covariance is `(1 - g) * S + g * diag(S)` where `S` is the
//! population pooled covariance and `g` the shrinkage weight. Class
//! probabilities are the softmax of the Gaussian log-discriminants, which
//! are linear in `x`; the covariance solve uses a Cholesky factorization.

use serde::{Deserialize, Serialize};

use super::{param_f64, ModelError, ParamMap};
use crate::matrix::{softmax_inplace, FeatureMatrix, ProbMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct LdaParams {
    pub shrinkage: f64,
}

impl LdaParams {
    pub fn from_params(params: &ParamMap) -> Result<Self, ModelError> {
        let shrinkage = param_f64(params, "shrinkage", 0.0)?;
        if !(0.0..=1.0).contains(&shrinkage) {
            return Err(ModelError::InvalidParam {
                name: "shrinkage".into(),
                reason: "must lie in [0, 1]".into(),
            });
        }
        Ok(LdaParams { shrinkage })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaModel {
    /// `num_classes x n_features`: per-class linear coefficients
    /// `Sigma^-1 mu_c`.
    pub coef: FeatureMatrix,
    /// Per-class intercepts `-mu_c' Sigma^-1 mu_c / 2 + ln prior_c`.
    pub intercept: Vec<f64>,
    pub num_classes: usize,
}

/// Cholesky factor of a symmetric positive-definite matrix (row-major,
/// lower triangle); `None` if a pivot degenerates.
fn cholesky(a: &[f64], d: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let mut sum = a[i * d + j];
            for k in 0..j {
                sum -= l[i * d + k] * l[j * d + k];
            }
            if i == j {
                if sum <= 1e-12 {
                    return None;
                }
                l[i * d + i] = sum.sqrt();
            } else {
                l[i * d + j] = sum / l[j * d + j];
            }
        }
    }
    Some(l)
}

/// Solves `L L' z = rhs` by forward then backward substitution.
fn cholesky_solve(l: &[f64], d: usize, rhs: &[f64]) -> Vec<f64> {
    let mut z = rhs.to_vec();
    for i in 0..d {
        for k in 0..i {
            z[i] -= l[i * d + k] * z[k];
        }
        z[i] /= l[i * d + i];
    }
    for i in (0..d).rev() {
        for k in i + 1..d {
            z[i] -= l[k * d + i] * z[k];
        }
        z[i] /= l[i * d + i];
    }
    z
}

pub fn fit_lda(
    x: &FeatureMatrix,
    y: &[usize],
    num_classes: usize,
    params: &LdaParams,
) -> Result<LdaModel, ModelError> {
    let n = x.n_rows();
    let d = x.n_cols();

    let mut counts = vec![0usize; num_classes];
    for &label in y {
        counts[label] += 1;
    }
    let present = counts.iter().filter(|&&c| c > 0).count();
    if present < 2 {
        return Err(ModelError::TooFewClasses(present));
    }

    let mut means = FeatureMatrix::zeros(num_classes, d);
    for (i, &label) in y.iter().enumerate() {
        let row = x.row(i);
        let m = means.row_mut(label);
        for (mv, &xv) in m.iter_mut().zip(row) {
            *mv += xv;
        }
    }
    for c in 0..num_classes {
        if counts[c] > 0 {
            let inv = 1.0 / counts[c] as f64;
            for mv in means.row_mut(c) {
                *mv *= inv;
            }
        }
    }

    // population pooled within-class covariance
    let mut cov = vec![0.0; d * d];
    let mut centered = vec![0.0; d];
    for (i, &label) in y.iter().enumerate() {
        let row = x.row(i);
        let m = means.row(label);
        for j in 0..d {
            centered[j] = row[j] - m[j];
        }
        for j in 0..d {
            let cj = centered[j];
            for k in j..d {
                cov[j * d + k] += cj * centered[k];
            }
        }
    }
    let inv_n = 1.0 / n as f64;
    for j in 0..d {
        for k in j..d {
            let v = cov[j * d + k] * inv_n;
            cov[j * d + k] = v;
            cov[k * d + j] = v;
        }
    }
    let g = params.shrinkage;
    if g > 0.0 {
        for j in 0..d {
            for k in 0..d {
                if j != k {
                    cov[j * d + k] *= 1.0 - g;
                }
            }
        }
    }

    let l = cholesky(&cov, d).ok_or(ModelError::SingularCovariance)?;

    let mut coef = FeatureMatrix::zeros(num_classes, d);
    let mut intercept = vec![f64::NEG_INFINITY; num_classes];
    for c in 0..num_classes {
        if counts[c] == 0 {
            continue; // absent class keeps -inf discriminant -> probability 0
        }
        let mu = means.row(c);
        let solved = cholesky_solve(&l, d, mu);
        let quad: f64 = mu.iter().zip(&solved).map(|(a, b)| a * b).sum();
        let prior = counts[c] as f64 / n as f64;
        coef.row_mut(c).copy_from_slice(&solved);
        intercept[c] = -0.5 * quad + prior.ln();
    }

    Ok(LdaModel { coef, intercept, num_classes })
}

impl LdaModel {
    pub fn predict_proba(&self, x: &FeatureMatrix) -> ProbMatrix {
        let mut probs = ProbMatrix::zeros(x.n_rows(), self.num_classes);
        for i in 0..x.n_rows() {
            let row = x.row(i);
            let out = probs.row_mut(i);
            for c in 0..self.num_classes {
                let w = self.coef.row(c);
                out[c] = self.intercept[c] + w.iter().zip(row).map(|(a, b)| a * b).sum::<f64>();
            }
            softmax_inplace(out);
        }
        probs
    }
}

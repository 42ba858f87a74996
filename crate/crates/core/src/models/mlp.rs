//! Feedforward network with ReLU hidden layers and a softmax output,
//! trained by mini-batch Adam on cross-entropy plus an L2 weight penalty
//! (biases unpenalized).
//!
//! He-scaled initialization and per-epoch shuffling draw from seeded
//! streams, so a fit is reproducible end to end. There is no early
//! stopping by default: a fixed epoch budget keeps candidates in a grid
//! directly comparable.

use serde::{Deserialize, Serialize};

use super::{param_f64, param_usize, ModelError, ParamMap, ParamValue};
use crate::matrix::{softmax_inplace, FeatureMatrix, ProbMatrix};
use crate::rng::{shuffle, standard_normal, stream_rng};

#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    pub hidden_sizes: Vec<usize>,
    pub l2: f64,
    pub lr: f64,
    pub batch_size: usize,
    pub epochs: usize,
}

impl MlpParams {
    pub fn from_params(params: &ParamMap) -> Result<Self, ModelError> {
        let hidden_sizes = match params.get("hidden_sizes") {
            None => vec![32],
            Some(v) => v.as_usize_list().ok_or_else(|| ModelError::InvalidParam {
                name: "hidden_sizes".into(),
                reason: format!("expected a list of positive integers, got {v:?}"),
            })?,
        };
        if hidden_sizes.is_empty() || hidden_sizes.contains(&0) {
            return Err(ModelError::InvalidParam {
                name: "hidden_sizes".into(),
                reason: "at least one non-empty hidden layer is required".into(),
            });
        }
        let p = MlpParams {
            hidden_sizes,
            l2: param_f64(params, "l2", 1e-4)?,
            lr: param_f64(params, "lr", 1e-3)?,
            batch_size: param_usize(params, "batch_size", 128)?.max(1),
            epochs: param_usize(params, "epochs", 60)?,
        };
        Ok(p)
    }

    pub fn to_param_map(&self) -> ParamMap {
        let mut m = ParamMap::new();
        m.insert(
            "hidden_sizes".into(),
            ParamValue::IntList(self.hidden_sizes.iter().map(|&s| s as i64).collect()),
        );
        m.insert("l2".into(), ParamValue::Float(self.l2));
        m.insert("lr".into(), ParamValue::Float(self.lr));
        m.insert("batch_size".into(), ParamValue::Int(self.batch_size as i64));
        m.insert("epochs".into(), ParamValue::Int(self.epochs as i64));
        m
    }
}

/// One dense layer: `out x in` weights plus per-unit bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub weights: FeatureMatrix,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub layers: Vec<Layer>,
    pub num_classes: usize,
}

fn forward_linear(layer: &Layer, input: &FeatureMatrix) -> FeatureMatrix {
    let n = input.n_rows();
    let out_dim = layer.bias.len();
    let mut z = FeatureMatrix::zeros(n, out_dim);
    for i in 0..n {
        let row = input.row(i);
        let zr = z.row_mut(i);
        for (k, zv) in zr.iter_mut().enumerate() {
            let w = layer.weights.row(k);
            *zv = layer.bias[k] + w.iter().zip(row).map(|(a, b)| a * b).sum::<f64>();
        }
    }
    z
}

fn relu_inplace(m: &mut FeatureMatrix) {
    for i in 0..m.n_rows() {
        for v in m.row_mut(i) {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
    }
}

/// Mean cross-entropy plus `l2/2 * sum ||W||^2` over a batch, with
/// gradients for every layer. Public so finite-difference checks can probe
/// arbitrary weight settings.
pub fn mlp_loss_and_gradient(
    layers: &[Layer],
    x: &FeatureMatrix,
    y: &[usize],
    l2: f64,
) -> (f64, Vec<Layer>) {
    let n = x.n_rows();
    let n_layers = layers.len();

    // forward, keeping post-activation outputs per layer
    let mut activations: Vec<FeatureMatrix> = Vec::with_capacity(n_layers + 1);
    activations.push(x.clone());
    for (l, layer) in layers.iter().enumerate() {
        let mut z = forward_linear(layer, activations.last().unwrap());
        if l + 1 < n_layers {
            relu_inplace(&mut z);
        }
        activations.push(z);
    }

    let mut probs = activations.last().unwrap().clone();
    for i in 0..n {
        softmax_inplace(probs.row_mut(i));
    }
    let mut loss = 0.0;
    for (i, &label) in y.iter().enumerate() {
        loss -= probs.get(i, label).max(1e-300).ln();
    }
    loss /= n as f64;
    for layer in layers {
        loss += 0.5 * l2 * layer.weights.as_slice().iter().map(|w| w * w).sum::<f64>();
    }

    // delta at the output: (p - y) / n
    let mut delta = probs;
    for (i, &label) in y.iter().enumerate() {
        let row = delta.row_mut(i);
        row[label] -= 1.0;
        for v in row.iter_mut() {
            *v /= n as f64;
        }
    }

    let mut grads: Vec<Layer> = Vec::with_capacity(n_layers);
    for l in (0..n_layers).rev() {
        let input = &activations[l];
        let out_dim = layers[l].bias.len();
        let in_dim = input.n_cols();
        let mut gw = FeatureMatrix::zeros(out_dim, in_dim);
        let mut gb = vec![0.0; out_dim];
        for i in 0..n {
            let drow = delta.row(i);
            let irow = input.row(i);
            for k in 0..out_dim {
                let dv = drow[k];
                gb[k] += dv;
                let g = gw.row_mut(k);
                for (gv, &iv) in g.iter_mut().zip(irow) {
                    *gv += dv * iv;
                }
            }
        }
        for k in 0..out_dim {
            let w = layers[l].weights.row(k);
            let g = gw.row_mut(k);
            for (gv, &wv) in g.iter_mut().zip(w) {
                *gv += l2 * wv;
            }
        }

        if l > 0 {
            // propagate through the layer and the previous ReLU
            let mut prev = FeatureMatrix::zeros(n, in_dim);
            for i in 0..n {
                let drow = delta.row(i);
                let prow = prev.row_mut(i);
                for k in 0..out_dim {
                    let dv = drow[k];
                    let w = layers[l].weights.row(k);
                    for (pv, &wv) in prow.iter_mut().zip(w) {
                        *pv += dv * wv;
                    }
                }
                let act = activations[l].row(i);
                for (pv, &av) in prow.iter_mut().zip(act) {
                    if av <= 0.0 {
                        *pv = 0.0;
                    }
                }
            }
            delta = prev;
        }
        grads.push(Layer { weights: gw, bias: gb });
    }
    grads.reverse();
    (loss, grads)
}

struct AdamState {
    m: Vec<Layer>,
    v: Vec<Layer>,
    t: u64,
}

impl AdamState {
    fn new(layers: &[Layer]) -> Self {
        let zeros = layers
            .iter()
            .map(|l| Layer {
                weights: FeatureMatrix::zeros(l.weights.n_rows(), l.weights.n_cols()),
                bias: vec![0.0; l.bias.len()],
            })
            .collect::<Vec<_>>();
        AdamState { m: zeros.clone(), v: zeros, t: 0 }
    }

    fn step(&mut self, layers: &mut [Layer], grads: &[Layer], lr: f64) {
        const B1: f64 = 0.9;
        const B2: f64 = 0.999;
        const EPS: f64 = 1e-8;
        self.t += 1;
        let bc1 = 1.0 - B1.powi(self.t as i32);
        let bc2 = 1.0 - B2.powi(self.t as i32);
        for (l, layer) in layers.iter_mut().enumerate() {
            let g = &grads[l];
            let m = &mut self.m[l];
            let v = &mut self.v[l];
            for idx in 0..layer.weights.as_slice().len() {
                let row = idx / layer.weights.n_cols();
                let col = idx % layer.weights.n_cols();
                let gv = g.weights.get(row, col);
                let mv = B1 * m.weights.get(row, col) + (1.0 - B1) * gv;
                let vv = B2 * v.weights.get(row, col) + (1.0 - B2) * gv * gv;
                m.weights.set(row, col, mv);
                v.weights.set(row, col, vv);
                let update = lr * (mv / bc1) / ((vv / bc2).sqrt() + EPS);
                layer.weights.set(row, col, layer.weights.get(row, col) - update);
            }
            for k in 0..layer.bias.len() {
                let gv = g.bias[k];
                m.bias[k] = B1 * m.bias[k] + (1.0 - B1) * gv;
                v.bias[k] = B2 * v.bias[k] + (1.0 - B2) * gv * gv;
                let update = lr * (m.bias[k] / bc1) / ((v.bias[k] / bc2).sqrt() + EPS);
                layer.bias[k] -= update;
            }
        }
    }
}

/// He-scaled seeded initialization: `W ~ N(0, 2 / fan_in)`, biases zero.
pub fn init_layers(
    n_features: usize,
    hidden_sizes: &[usize],
    num_classes: usize,
    seed: u64,
) -> Vec<Layer> {
    let mut dims = vec![n_features];
    dims.extend_from_slice(hidden_sizes);
    dims.push(num_classes);
    (0..dims.len() - 1)
        .map(|l| {
            let (fan_in, fan_out) = (dims[l], dims[l + 1]);
            let scale = (2.0 / fan_in as f64).sqrt();
            let mut rng = stream_rng(seed, 100 + l as u64);
            let mut weights = FeatureMatrix::zeros(fan_out, fan_in);
            for k in 0..fan_out {
                for v in weights.row_mut(k) {
                    *v = scale * standard_normal(&mut rng);
                }
            }
            Layer { weights, bias: vec![0.0; fan_out] }
        })
        .collect()
}

pub fn fit_mlp(
    x: &FeatureMatrix,
    y: &[usize],
    num_classes: usize,
    params: &MlpParams,
    seed: u64,
) -> Result<MlpModel, ModelError> {
    let n = x.n_rows();
    let mut layers = init_layers(x.n_cols(), &params.hidden_sizes, num_classes, seed);
    let mut adam = AdamState::new(&layers);
    let mut order: Vec<usize> = (0..n).collect();
    let mut shuffle_rng = stream_rng(seed, 7);

    for epoch in 0..params.epochs {
        shuffle(&mut order, &mut shuffle_rng);
        for chunk in order.chunks(params.batch_size) {
            let xb = x.select_rows(chunk);
            let yb: Vec<usize> = chunk.iter().map(|&i| y[i]).collect();
            let (loss, grads) = mlp_loss_and_gradient(&layers, &xb, &yb, params.l2);
            if !loss.is_finite() {
                return Err(ModelError::NonFiniteLoss { context: format!("epoch {epoch}") });
            }
            adam.step(&mut layers, &grads, params.lr);
        }
    }
    Ok(MlpModel { layers, num_classes })
}

impl MlpModel {
    pub fn predict_proba(&self, x: &FeatureMatrix) -> ProbMatrix {
        let n_layers = self.layers.len();
        let mut current = x.clone();
        for (l, layer) in self.layers.iter().enumerate() {
            let mut z = forward_linear(layer, &current);
            if l + 1 < n_layers {
                relu_inplace(&mut z);
            }
            current = z;
        }
        for i in 0..current.n_rows() {
            softmax_inplace(current.row_mut(i));
        }
        current
    }
}

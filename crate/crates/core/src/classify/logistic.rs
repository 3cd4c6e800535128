//! One-vs-rest logistic regression, L2-regularized, solved by gradient
//! descent with backtracking line search.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{
    fit_standardizer, Dataset, ModelKind, ModelParams, TrainConfig, TrainedModel,
    MODEL_LAYOUT_VERSION,
};

pub const GRAD_TOLERANCE: f64 = 1e-6;
pub const MAX_ITERATIONS: usize = 1000;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogisticParams {
    /// One weight vector per class (one-vs-rest).
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
}

impl LogisticParams {
    pub fn scores(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.biases)
            .map(|(w, &b)| {
                let z: f64 = w.iter().zip(x).map(|(wi, xi)| wi * xi).sum::<f64>() + b;
                sigmoid(z)
            })
            .collect()
    }
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// log(1 + exp(z)) without overflow.
#[inline]
fn log1p_exp(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Regularized negative log-likelihood and its analytic gradient for one
/// binary problem. Targets are 0/1; the intercept is not regularized.
/// Returns (loss, grad_w, grad_b).
pub fn logistic_loss_grad(
    features: &[Vec<f64>],
    targets: &[f64],
    w: &[f64],
    b: f64,
    l2: f64,
) -> (f64, Vec<f64>, f64) {
    let dim = w.len();
    let mut loss = 0.0f64;
    let mut grad_w = vec![0.0f64; dim];
    let mut grad_b = 0.0f64;
    for (x, &y) in features.iter().zip(targets) {
        let z: f64 = w.iter().zip(x).map(|(wi, xi)| wi * xi).sum::<f64>() + b;
        loss += log1p_exp(z) - y * z;
        let err = sigmoid(z) - y;
        for j in 0..dim {
            grad_w[j] += err * x[j];
        }
        grad_b += err;
    }
    for j in 0..dim {
        loss += 0.5 * l2 * w[j] * w[j];
        grad_w[j] += l2 * w[j];
    }
    (loss, grad_w, grad_b)
}

fn train_binary(features: &[Vec<f64>], targets: &[f64], l2: f64) -> (Vec<f64>, f64) {
    let dim = features[0].len();
    let mut w = vec![0.0f64; dim];
    let mut b = 0.0f64;
    let mut loss = logistic_loss_grad(features, targets, &w, b, l2).0;

    for _ in 0..MAX_ITERATIONS {
        let (_, grad_w, grad_b) = logistic_loss_grad(features, targets, &w, b, l2);
        let g_inf = grad_w
            .iter()
            .fold(grad_b.abs(), |acc, g| acc.max(g.abs()));
        if g_inf < GRAD_TOLERANCE {
            break;
        }
        let g2: f64 = grad_w.iter().map(|g| g * g).sum::<f64>() + grad_b * grad_b;
        let mut step = 1.0f64;
        loop {
            let w_try: Vec<f64> = w.iter().zip(&grad_w).map(|(wi, gi)| wi - step * gi).collect();
            let b_try = b - step * grad_b;
            let loss_try = logistic_loss_grad(features, targets, &w_try, b_try, l2).0;
            if loss_try <= loss - 1e-4 * step * g2 || step < 1e-14 {
                w = w_try;
                b = b_try;
                loss = loss_try;
                break;
            }
            step *= 0.5;
        }
    }
    (w, b)
}

/// Train one-vs-rest logistic regression. The seed is recorded for artifact
/// provenance; optimization itself is deterministic (zero initialization).
pub fn train_lr(train: &Dataset, l2: f64, seed: u64) -> Result<TrainedModel> {
    if train.n_classes() < 2 {
        return Err(Error::NeedTwoClasses);
    }
    if l2 < 0.0 {
        return Err(Error::invalid_param("l2 strength must be non-negative"));
    }
    let standardizer = fit_standardizer(train)?;
    let features = standardizer.apply_all(train.features());
    let k = train.n_classes();

    let mut weights = Vec::with_capacity(k);
    let mut biases = Vec::with_capacity(k);
    for c in 0..k {
        let targets: Vec<f64> = train
            .class_ids()
            .iter()
            .map(|&id| if id == c { 1.0 } else { 0.0 })
            .collect();
        let (w, b) = train_binary(&features, &targets, l2);
        weights.push(w);
        biases.push(b);
    }

    Ok(TrainedModel {
        layout_version: MODEL_LAYOUT_VERSION,
        kind: ModelKind::Lr,
        classes: train.classes().to_vec(),
        dim: train.dim(),
        seed,
        standardizer,
        train_config: TrainConfig::Logistic { l2 },
        params: ModelParams::Logistic(LogisticParams { weights, biases }),
    })
}

//! RBF-kernel SVM trained by sequential minimal optimization, multiclass by
//! one-vs-one pairwise voting.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{
    derive_seed, fit_standardizer, Dataset, Gamma, ModelKind, ModelParams, TrainConfig,
    TrainedModel, MODEL_LAYOUT_VERSION,
};

pub const KKT_TOLERANCE: f64 = 1e-3;
const MIN_ALPHA_STEP: f64 = 1e-8;
const QUIET_PASSES: usize = 3;
const MAX_PASSES: usize = 2000;

#[inline]
pub fn rbf_kernel(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let mut d2 = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        d2 += d * d;
    }
    (-gamma * d2).exp()
}

/// Solution of one binary soft-margin dual problem.
#[derive(Debug, Clone)]
pub struct BinarySvm {
    pub alphas: Vec<f64>,
    pub bias: f64,
}

impl BinarySvm {
    /// Decision value sum_i alpha_i y_i K(x_i, q) + b over the training set
    /// the duals were fit on.
    pub fn decision(&self, x: &[Vec<f64>], y: &[f64], gamma: f64, query: &[f64]) -> f64 {
        let mut f = self.bias;
        for i in 0..x.len() {
            if self.alphas[i] > 0.0 {
                f += self.alphas[i] * y[i] * rbf_kernel(&x[i], query, gamma);
            }
        }
        f
    }
}

/// Simplified SMO on a binary problem with labels in {-1, +1}.
///
/// Iterates KKT-violating points; for each, partners j are tried in a seeded
/// random order until one admits a productive step. Converged when
/// `QUIET_PASSES` consecutive full passes make no update, i.e. no violation
/// beyond `tol` remains fixable.
pub fn smo_train_binary(
    x: &[Vec<f64>],
    y: &[f64],
    c: f64,
    gamma: f64,
    tol: f64,
    seed: u64,
) -> BinarySvm {
    let n = x.len();
    assert!(n >= 2, "binary SMO needs at least two points");
    assert!(y.iter().all(|&v| v == 1.0 || v == -1.0));

    let mut kernel = vec![0.0f64; n * n];
    for i in 0..n {
        for j in i..n {
            let k = rbf_kernel(&x[i], &x[j], gamma);
            kernel[i * n + j] = k;
            kernel[j * n + i] = k;
        }
    }

    let mut alphas = vec![0.0f64; n];
    let mut bias = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();

    let decision = |alphas: &[f64], bias: f64, i: usize, kernel: &[f64]| -> f64 {
        let mut f = bias;
        let row = &kernel[i * n..(i + 1) * n];
        for j in 0..n {
            if alphas[j] > 0.0 {
                f += alphas[j] * y[j] * row[j];
            }
        }
        f
    };

    let mut quiet = 0usize;
    let mut passes = 0usize;
    while quiet < QUIET_PASSES && passes < MAX_PASSES {
        passes += 1;
        let mut changed = 0usize;
        for i in 0..n {
            let e_i = decision(&alphas, bias, i, &kernel) - y[i];
            let r_i = y[i] * e_i;
            let violates = (r_i < -tol && alphas[i] < c) || (r_i > tol && alphas[i] > 0.0);
            if !violates {
                continue;
            }
            order.shuffle(&mut rng);
            for &j in &order {
                if j == i {
                    continue;
                }
                let e_j = decision(&alphas, bias, j, &kernel) - y[j];
                let (a_i_old, a_j_old) = (alphas[i], alphas[j]);
                let (lo, hi) = if y[i] != y[j] {
                    (
                        (a_j_old - a_i_old).max(0.0),
                        (c + a_j_old - a_i_old).min(c),
                    )
                } else {
                    (
                        (a_i_old + a_j_old - c).max(0.0),
                        (a_i_old + a_j_old).min(c),
                    )
                };
                if lo >= hi {
                    continue;
                }
                let k_ii = kernel[i * n + i];
                let k_jj = kernel[j * n + j];
                let k_ij = kernel[i * n + j];
                let eta = 2.0 * k_ij - k_ii - k_jj;
                if eta >= 0.0 {
                    continue;
                }
                let mut a_j = a_j_old - y[j] * (e_i - e_j) / eta;
                a_j = a_j.clamp(lo, hi);
                if (a_j - a_j_old).abs() < MIN_ALPHA_STEP {
                    continue;
                }
                let a_i = a_i_old + y[i] * y[j] * (a_j_old - a_j);
                alphas[i] = a_i;
                alphas[j] = a_j;

                let b1 = bias - e_i - y[i] * (a_i - a_i_old) * k_ii - y[j] * (a_j - a_j_old) * k_ij;
                let b2 = bias - e_j - y[i] * (a_i - a_i_old) * k_ij - y[j] * (a_j - a_j_old) * k_jj;
                bias = if a_i > 0.0 && a_i < c {
                    b1
                } else if a_j > 0.0 && a_j < c {
                    b2
                } else {
                    (b1 + b2) / 2.0
                };
                changed += 1;
                break;
            }
        }
        if changed == 0 {
            quiet += 1;
        } else {
            quiet = 0;
        }
    }

    BinarySvm { alphas, bias }
}

/// One binary classifier of the one-vs-one ensemble. The decision value is
/// positive for `class_a` (the lower id).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SvmPair {
    pub class_a: usize,
    pub class_b: usize,
    pub support_vectors: Vec<Vec<f64>>,
    /// alpha_i * y_i for each support vector.
    pub coefficients: Vec<f64>,
    pub bias: f64,
}

impl SvmPair {
    pub fn decision(&self, x: &[f64], gamma: f64) -> f64 {
        let mut f = self.bias;
        for (sv, coeff) in self.support_vectors.iter().zip(&self.coefficients) {
            f += coeff * rbf_kernel(sv, x, gamma);
        }
        f
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SvmParams {
    pub gamma: f64,
    pub pairs: Vec<SvmPair>,
}

impl SvmParams {
    /// Pairwise votes per class.
    pub fn scores(&self, x: &[f64], n_classes: usize) -> Vec<f64> {
        let mut votes = vec![0.0f64; n_classes];
        for pair in &self.pairs {
            if pair.decision(x, self.gamma) >= 0.0 {
                votes[pair.class_a] += 1.0;
            } else {
                votes[pair.class_b] += 1.0;
            }
        }
        votes
    }
}

/// Train a one-vs-one RBF SVM. Pair problems run in parallel with seeds
/// derived from the master seed, so results do not depend on thread count.
pub fn train_svm(train: &Dataset, c: f64, gamma: Gamma, seed: u64) -> Result<TrainedModel> {
    if train.n_classes() < 2 {
        return Err(Error::NeedTwoClasses);
    }
    if c <= 0.0 {
        return Err(Error::invalid_param("svm penalty C must be positive"));
    }
    let standardizer = fit_standardizer(train)?;
    let features = standardizer.apply_all(train.features());
    let gamma_value = gamma.resolve(&features, train.dim());

    let k = train.n_classes();
    let mut pair_ids = Vec::new();
    for a in 0..k {
        for b in a + 1..k {
            pair_ids.push((a, b));
        }
    }

    let pairs: Vec<SvmPair> = pair_ids
        .par_iter()
        .enumerate()
        .map(|(pi, &(a, b))| {
            let mut x = Vec::new();
            let mut y = Vec::new();
            for (i, &cid) in train.class_ids().iter().enumerate() {
                if cid == a {
                    x.push(features[i].clone());
                    y.push(1.0);
                } else if cid == b {
                    x.push(features[i].clone());
                    y.push(-1.0);
                }
            }
            let solution = smo_train_binary(
                &x,
                &y,
                c,
                gamma_value,
                KKT_TOLERANCE,
                derive_seed(seed, pi as u64),
            );
            let mut support_vectors = Vec::new();
            let mut coefficients = Vec::new();
            for i in 0..x.len() {
                if solution.alphas[i] > 1e-12 {
                    support_vectors.push(x[i].clone());
                    coefficients.push(solution.alphas[i] * y[i]);
                }
            }
            SvmPair {
                class_a: a,
                class_b: b,
                support_vectors,
                coefficients,
                bias: solution.bias,
            }
        })
        .collect();

    Ok(TrainedModel {
        layout_version: MODEL_LAYOUT_VERSION,
        kind: ModelKind::Svm,
        classes: train.classes().to_vec(),
        dim: train.dim(),
        seed,
        standardizer,
        train_config: TrainConfig::Svm { c, gamma },
        params: ModelParams::Svm(SvmParams {
            gamma: gamma_value,
            pairs,
        }),
    })
}

/// KKT conditions of the binary dual at tolerance `tol`; used by oracle tests.
pub fn kkt_violations(
    svm: &BinarySvm,
    x: &[Vec<f64>],
    y: &[f64],
    c: f64,
    gamma: f64,
    tol: f64,
) -> usize {
    let mut violations = 0;
    for i in 0..x.len() {
        let yf = y[i] * svm.decision(x, y, gamma, &x[i]);
        let a = svm.alphas[i];
        let ok = if a <= 0.0 {
            yf >= 1.0 - tol
        } else if a >= c {
            yf <= 1.0 + tol
        } else {
            (yf - 1.0).abs() <= tol
        };
        if !ok {
            violations += 1;
        }
    }
    violations
}

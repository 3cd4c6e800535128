//! Per-feature z-score standardization fit on training data only.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::Dataset;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Standardizer {
    /// Identity transform of the given dimension.
    pub fn identity(dim: usize) -> Self {
        Standardizer {
            means: vec![0.0; dim],
            stds: vec![1.0; dim],
        }
    }

    #[inline]
    fn divisor(&self, j: usize) -> f64 {
        // Zero-variance features pass through centered, divisor 1.
        if self.stds[j] > 0.0 {
            self.stds[j]
        } else {
            1.0
        }
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        (0..v.len())
            .map(|j| (v[j] - self.means[j]) / self.divisor(j))
            .collect()
    }

    pub fn unapply(&self, v: &[f64]) -> Vec<f64> {
        (0..v.len())
            .map(|j| v[j] * self.divisor(j) + self.means[j])
            .collect()
    }

    pub fn apply_all(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.apply(r)).collect()
    }
}

/// Population mean/stddev per feature column.
pub fn fit_standardizer(train: &Dataset) -> Result<Standardizer> {
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = train.len() as f64;
    let dim = train.dim();
    let mut means = vec![0.0f64; dim];
    for row in train.features() {
        for j in 0..dim {
            means[j] += row[j];
        }
    }
    for m in means.iter_mut() {
        *m /= n;
    }
    let mut vars = vec![0.0f64; dim];
    for row in train.features() {
        for j in 0..dim {
            let d = row[j] - means[j];
            vars[j] += d * d;
        }
    }
    let stds = vars.iter().map(|v| (v / n).sqrt()).collect();
    Ok(Standardizer { means, stds })
}

//! Classifier training and evaluation.
//!
//! Four classifiers over standardized feature vectors: SVM with an RBF
//! kernel (one-vs-one SMO), random forest (Gini CART with bootstrap),
//! distance-weighted KNN, and L2-regularized logistic regression
//! (one-vs-rest). Every tie-break resolves to the lowest class id and all
//! training is deterministic for a fixed seed, independent of thread count.

mod eval;
mod forest;
mod knn;
mod logistic;
mod split;
mod standardize;
mod svm;

pub use eval::{evaluate, ClassMetrics, ErrorCase, EvalReport, EvalTiming};
pub use forest::{train_rf, train_rf_with_oob, ForestParams, Tree, TreeNode};
pub use knn::{train_knn, KnnParams};
pub use logistic::{logistic_loss_grad, train_lr, LogisticParams};
pub use split::stratified_split;
pub use standardize::{fit_standardizer, Standardizer};
pub use svm::{rbf_kernel, smo_train_binary, train_svm, BinarySvm, SvmPair, SvmParams};

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::featvec::FeatureVector;

/// Labeled feature matrix. Class ids are contiguous 0..K in sorted label
/// order; subsets inherit the parent's class table so ids stay stable
/// across a split.
#[derive(Debug, Clone)]
pub struct Dataset {
    features: Vec<Vec<f64>>,
    labels: Vec<String>,
    sources: Vec<String>,
    classes: Vec<String>,
    class_ids: Vec<usize>,
    dim: usize,
}

impl Dataset {
    pub fn new(
        features: Vec<Vec<f64>>,
        labels: Vec<String>,
        sources: Vec<String>,
    ) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if features.len() != labels.len() || features.len() != sources.len() {
            return Err(Error::invalid_param(format!(
                "features/labels/sources lengths differ: {}/{}/{}",
                features.len(),
                labels.len(),
                sources.len()
            )));
        }
        let dim = features[0].len();
        if features.iter().any(|f| f.len() != dim) {
            return Err(Error::invalid_param("feature rows have differing lengths"));
        }
        let mut classes: Vec<String> = labels.clone();
        classes.sort();
        classes.dedup();
        let class_ids = labels
            .iter()
            .map(|l| classes.binary_search(l).expect("label present"))
            .collect();
        Ok(Dataset {
            features,
            labels,
            sources,
            classes,
            class_ids,
            dim,
        })
    }

    pub fn from_feature_vectors(
        vectors: &[FeatureVector],
        labels: Vec<String>,
        sources: Vec<String>,
    ) -> Result<Self> {
        Dataset::new(
            vectors.iter().map(|v| v.values().to_vec()).collect(),
            labels,
            sources,
        )
    }

    /// Rows without meaningful sources get empty source tags.
    pub fn from_rows(features: Vec<Vec<f64>>, labels: Vec<String>) -> Result<Self> {
        let n = features.len();
        Dataset::new(features, labels, vec![String::new(); n])
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn sources(&self) -> &[String] {
        &self.sources
    }

    pub fn class_ids(&self) -> &[usize] {
        &self.class_ids
    }

    /// Subset by row indices, keeping the parent's class table.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i].clone()).collect(),
            sources: indices.iter().map(|&i| self.sources[i].clone()).collect(),
            classes: self.classes.clone(),
            class_ids: indices.iter().map(|&i| self.class_ids[i]).collect(),
            dim: self.dim,
        }
    }
}

/// RBF kernel width: a fixed value or the data-driven "scale" rule
/// 1/(dim * mean feature variance).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gamma {
    Scale,
    Fixed(f64),
}

impl Gamma {
    /// Resolve to a numeric width on (standardized) training features.
    pub fn resolve(&self, features: &[Vec<f64>], dim: usize) -> f64 {
        match *self {
            Gamma::Fixed(v) => v,
            Gamma::Scale => {
                let n = features.len() as f64;
                let mut mean_var = 0.0;
                for j in 0..dim {
                    let mean: f64 = features.iter().map(|f| f[j]).sum::<f64>() / n;
                    let var: f64 =
                        features.iter().map(|f| (f[j] - mean) * (f[j] - mean)).sum::<f64>() / n;
                    mean_var += var;
                }
                mean_var /= dim as f64;
                if mean_var > 0.0 {
                    1.0 / (dim as f64 * mean_var)
                } else {
                    1.0 / dim as f64
                }
            }
        }
    }
}

impl fmt::Display for Gamma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gamma::Scale => write!(f, "scale"),
            Gamma::Fixed(v) => write!(f, "{v}"),
        }
    }
}

impl std::str::FromStr for Gamma {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.eq_ignore_ascii_case("scale") {
            return Ok(Gamma::Scale);
        }
        s.parse::<f64>()
            .map(Gamma::Fixed)
            .map_err(|_| format!("gamma must be a number or \"scale\", got {s:?}"))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum GammaRepr {
    Num(f64),
    Text(String),
}

impl Serialize for Gamma {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Gamma::Scale => GammaRepr::Text("scale".into()).serialize(s),
            Gamma::Fixed(v) => GammaRepr::Num(*v).serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for Gamma {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match GammaRepr::deserialize(d)? {
            GammaRepr::Num(v) => Ok(Gamma::Fixed(v)),
            GammaRepr::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Svm,
    Rf,
    Knn,
    Lr,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ModelKind::Svm => "svm",
            ModelKind::Rf => "rf",
            ModelKind::Knn => "knn",
            ModelKind::Lr => "lr",
        };
        write!(f, "{s}")
    }
}

impl std::str::FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "svm" => Ok(ModelKind::Svm),
            "rf" | "forest" => Ok(ModelKind::Rf),
            "knn" => Ok(ModelKind::Knn),
            "lr" | "logistic" => Ok(ModelKind::Lr),
            other => Err(format!("unknown model kind {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainConfig {
    Svm { c: f64, gamma: Gamma },
    Forest { n_trees: usize },
    Knn { k: usize },
    Logistic { l2: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelParams {
    Svm(SvmParams),
    Forest(ForestParams),
    Knn(KnnParams),
    Logistic(LogisticParams),
}

pub const MODEL_LAYOUT_VERSION: u32 = 1;

/// A trained classifier with its standardizer and provenance. Predictions
/// are a pure function of the serialized bytes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainedModel {
    pub layout_version: u32,
    pub kind: ModelKind,
    pub classes: Vec<String>,
    pub dim: usize,
    pub seed: u64,
    pub standardizer: Standardizer,
    pub train_config: TrainConfig,
    pub params: ModelParams,
}

/// Prediction output: winning label and one score per class.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub class_id: usize,
    pub label: String,
    pub scores: Vec<f64>,
}

impl TrainedModel {
    /// Predict a label for a raw (unstandardized) feature vector.
    pub fn predict(&self, features: &[f64]) -> Result<Prediction> {
        if features.len() != self.dim {
            return Err(Error::FeatureLength {
                expected: self.dim,
                found: features.len(),
            });
        }
        let x = self.standardizer.apply(features);
        let scores = match &self.params {
            ModelParams::Svm(p) => p.scores(&x, self.classes.len()),
            ModelParams::Forest(p) => p.scores(&x, self.classes.len()),
            ModelParams::Knn(p) => p.scores(&x, self.classes.len()),
            ModelParams::Logistic(p) => p.scores(&x),
        };
        let class_id = argmax_lowest(&scores);
        Ok(Prediction {
            class_id,
            label: self.classes[class_id].clone(),
            scores,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<TrainedModel> {
        let text = std::fs::read_to_string(path)?;
        let model: TrainedModel = serde_json::from_str(&text)?;
        if model.layout_version != MODEL_LAYOUT_VERSION {
            return Err(Error::UnsupportedVersion {
                expected: MODEL_LAYOUT_VERSION,
                found: model.layout_version,
            });
        }
        Ok(model)
    }
}

/// Index of the maximum score; ties resolve to the lowest class id.
pub(crate) fn argmax_lowest(scores: &[f64]) -> usize {
    let mut best = 0usize;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

pub(crate) use crate::derive_seed;

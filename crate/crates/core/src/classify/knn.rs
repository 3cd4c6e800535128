//! K-nearest-neighbor classifier with inverse-distance weighting.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{
    fit_standardizer, Dataset, ModelKind, ModelParams, TrainConfig, TrainedModel,
    MODEL_LAYOUT_VERSION,
};

const DISTANCE_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KnnParams {
    pub k: usize,
    /// Standardized training features.
    pub features: Vec<Vec<f64>>,
    pub class_ids: Vec<usize>,
}

impl KnnParams {
    /// Class scores sum 1/(d + 1e-12) over the k nearest neighbors. An exact
    /// match (d = 0) returns its own label outright via a dominant score.
    /// Neighbor ties at equal distance resolve by training index.
    pub fn scores(&self, x: &[f64], n_classes: usize) -> Vec<f64> {
        let n = self.features.len();
        let mut dist: Vec<(f64, usize)> = (0..n)
            .map(|i| {
                let mut d2 = 0.0;
                for (a, b) in self.features[i].iter().zip(x) {
                    let d = a - b;
                    d2 += d * d;
                }
                (d2, i)
            })
            .collect();
        dist.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        let mut scores = vec![0.0f64; n_classes];
        if let Some(&(d2, i)) = dist.first() {
            if d2 == 0.0 {
                scores[self.class_ids[i]] = f64::INFINITY;
                return scores;
            }
        }
        let k = self.k.min(n);
        for &(d2, i) in &dist[..k] {
            scores[self.class_ids[i]] += 1.0 / (d2.sqrt() + DISTANCE_GUARD);
        }
        scores
    }
}

/// "Train" KNN: store the standardized training set.
pub fn train_knn(train: &Dataset, k: usize) -> Result<TrainedModel> {
    if k == 0 {
        return Err(Error::invalid_param("k must be >= 1"));
    }
    if train.n_classes() < 2 {
        return Err(Error::NeedTwoClasses);
    }
    let standardizer = fit_standardizer(train)?;
    let features = standardizer.apply_all(train.features());
    Ok(TrainedModel {
        layout_version: MODEL_LAYOUT_VERSION,
        kind: ModelKind::Knn,
        classes: train.classes().to_vec(),
        dim: train.dim(),
        seed: 0,
        standardizer,
        train_config: TrainConfig::Knn { k },
        params: ModelParams::Knn(KnnParams {
            k,
            features,
            class_ids: train.class_ids().to_vec(),
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Dataset {
        let rows = vec![
            vec![0.0, 0.0],
            vec![0.5, 0.0],
            vec![0.0, 0.5],
            vec![5.0, 5.0],
            vec![5.5, 5.0],
            vec![5.0, 5.5],
        ];
        let labels = vec!["a", "a", "a", "b", "b", "b"]
            .into_iter()
            .map(String::from)
            .collect();
        Dataset::from_rows(rows, labels).unwrap()
    }

    #[test]
    fn training_point_returns_own_label() {
        let d = toy();
        let model = train_knn(&d, 5).unwrap();
        for (row, label) in d.features().iter().zip(d.labels()) {
            assert_eq!(&model.predict(row).unwrap().label, label);
        }
    }

    #[test]
    fn k1_is_nearest_neighbor() {
        let d = toy();
        let model = train_knn(&d, 1).unwrap();
        assert_eq!(model.predict(&[0.6, 0.1]).unwrap().label, "a");
        assert_eq!(model.predict(&[4.9, 5.1]).unwrap().label, "b");
    }

    #[test]
    fn k_larger_than_training_uses_all_points() {
        let d = toy();
        let model = train_knn(&d, 50).unwrap();
        let p = model.predict(&[0.1, 0.1]).unwrap();
        assert_eq!(p.label, "a");
    }

    #[test]
    fn wrong_dimension_rejected() {
        let d = toy();
        let model = train_knn(&d, 3).unwrap();
        assert!(model.predict(&[1.0]).is_err());
    }
}

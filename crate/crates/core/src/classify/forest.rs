//! Random forest of Gini CART trees with bootstrap resampling.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{
    argmax_lowest, derive_seed, fit_standardizer, Dataset, ModelKind, ModelParams, TrainConfig,
    TrainedModel, MODEL_LAYOUT_VERSION,
};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum TreeNode {
    Leaf {
        class: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn predict(&self, x: &[f64]) -> usize {
        let mut i = 0usize;
        loop {
            match &self.nodes[i] {
                TreeNode::Leaf { class } => return *class,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForestParams {
    pub trees: Vec<Tree>,
}

impl ForestParams {
    /// Fraction of trees voting for each class.
    pub fn scores(&self, x: &[f64], n_classes: usize) -> Vec<f64> {
        let mut votes = vec![0.0f64; n_classes];
        for tree in &self.trees {
            votes[tree.predict(x)] += 1.0;
        }
        let n = self.trees.len().max(1) as f64;
        for v in votes.iter_mut() {
            *v /= n;
        }
        votes
    }
}

struct TreeBuilder<'a> {
    features: &'a [Vec<f64>],
    class_ids: &'a [usize],
    n_classes: usize,
    n_split_features: usize,
    rng: ChaCha8Rng,
    nodes: Vec<TreeNode>,
    feature_pool: Vec<usize>,
}

impl<'a> TreeBuilder<'a> {
    fn build(&mut self, indices: Vec<usize>) -> usize {
        let counts = self.class_counts(&indices);
        let majority = argmax_lowest(&counts.iter().map(|&c| c as f64).collect::<Vec<_>>());
        if indices.len() < 2 || counts.iter().filter(|&&c| c > 0).count() <= 1 {
            self.nodes.push(TreeNode::Leaf { class: majority });
            return self.nodes.len() - 1;
        }

        match self.best_split(&indices, &counts) {
            None => {
                self.nodes.push(TreeNode::Leaf { class: majority });
                self.nodes.len() - 1
            }
            Some((feature, threshold)) => {
                let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
                    .into_iter()
                    .partition(|&i| self.features[i][feature] <= threshold);
                let slot = self.nodes.len();
                self.nodes.push(TreeNode::Leaf { class: majority }); // placeholder
                let left = self.build(left_idx);
                let right = self.build(right_idx);
                self.nodes[slot] = TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                };
                slot
            }
        }
    }

    fn class_counts(&self, indices: &[usize]) -> Vec<usize> {
        let mut counts = vec![0usize; self.n_classes];
        for &i in indices {
            counts[self.class_ids[i]] += 1;
        }
        counts
    }

    /// Best Gini split over a random feature subset. Candidate thresholds are
    /// midpoints between distinct consecutive sorted values; ties on gain
    /// break to the lower feature then lower threshold.
    fn best_split(&mut self, indices: &[usize], counts: &[usize]) -> Option<(usize, f64)> {
        let n = indices.len() as f64;
        let parent_gini = gini(counts, indices.len());

        // Partial Fisher-Yates: first m entries become the feature sample.
        let d = self.feature_pool.len();
        let m = self.n_split_features.min(d);
        for i in 0..m {
            let j = self.rng.gen_range(i..d);
            self.feature_pool.swap(i, j);
        }
        let mut chosen: Vec<usize> = self.feature_pool[..m].to_vec();
        chosen.sort_unstable();

        let mut best: Option<(f64, usize, f64)> = None; // (gain, feature, threshold)
        let mut column: Vec<(f64, usize)> = Vec::with_capacity(indices.len());
        for &feature in &chosen {
            column.clear();
            column.extend(
                indices
                    .iter()
                    .map(|&i| (self.features[i][feature], self.class_ids[i])),
            );
            column.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));

            let mut left_counts = vec![0usize; self.n_classes];
            let mut left_n = 0usize;
            for w in 0..column.len() - 1 {
                left_counts[column[w].1] += 1;
                left_n += 1;
                let (v, next_v) = (column[w].0, column[w + 1].0);
                if v == next_v {
                    continue;
                }
                let right_n = indices.len() - left_n;
                let mut right_counts = vec![0usize; self.n_classes];
                for (rc, (&total, &lc)) in right_counts
                    .iter_mut()
                    .zip(counts.iter().zip(left_counts.iter()))
                {
                    *rc = total - lc;
                }
                let weighted = (left_n as f64 * gini(&left_counts, left_n)
                    + right_n as f64 * gini(&right_counts, right_n))
                    / n;
                let gain = parent_gini - weighted;
                if gain > 1e-12 {
                    let threshold = (v + next_v) / 2.0;
                    let better = match best {
                        None => true,
                        Some((bg, bf, bt)) => {
                            gain > bg
                                || (gain == bg && (feature < bf || (feature == bf && threshold < bt)))
                        }
                    };
                    if better {
                        best = Some((gain, feature, threshold));
                    }
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }
}

fn gini(counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    1.0 - counts
        .iter()
        .map(|&c| {
            let p = c as f64 / nf;
            p * p
        })
        .sum::<f64>()
}

fn grow_tree(
    features: &[Vec<f64>],
    class_ids: &[usize],
    n_classes: usize,
    dim: usize,
    tree_seed: u64,
) -> (Tree, Vec<bool>) {
    let mut rng = ChaCha8Rng::seed_from_u64(tree_seed);
    let n = features.len();
    let mut in_bag = vec![false; n];
    let bootstrap: Vec<usize> = (0..n)
        .map(|_| {
            let i = rng.gen_range(0..n);
            in_bag[i] = true;
            i
        })
        .collect();

    let n_split_features = (dim as f64).sqrt().floor().max(1.0) as usize;
    let mut builder = TreeBuilder {
        features,
        class_ids,
        n_classes,
        n_split_features,
        rng,
        nodes: Vec::new(),
        feature_pool: (0..dim).collect(),
    };
    builder.build(bootstrap);
    (
        Tree {
            nodes: builder.nodes,
        },
        in_bag,
    )
}

/// Train a random forest. Trees grow in parallel with per-tree seeds derived
/// from the master seed, so the forest is identical for any thread count.
pub fn train_rf(train: &Dataset, n_trees: usize, seed: u64) -> Result<TrainedModel> {
    train_rf_with_oob(train, n_trees, seed).map(|(model, _)| model)
}

/// Like [`train_rf`], also returning the out-of-bag accuracy (samples with no
/// out-of-bag vote are skipped).
pub fn train_rf_with_oob(
    train: &Dataset,
    n_trees: usize,
    seed: u64,
) -> Result<(TrainedModel, f64)> {
    if train.n_classes() < 2 {
        return Err(Error::NeedTwoClasses);
    }
    if n_trees == 0 {
        return Err(Error::invalid_param("forest needs at least one tree"));
    }
    let standardizer = fit_standardizer(train)?;
    let features = standardizer.apply_all(train.features());
    let n_classes = train.n_classes();
    let dim = train.dim();

    let grown: Vec<(Tree, Vec<bool>)> = (0..n_trees)
        .into_par_iter()
        .map(|t| {
            grow_tree(
                &features,
                train.class_ids(),
                n_classes,
                dim,
                derive_seed(seed, t as u64),
            )
        })
        .collect();

    let n = train.len();
    let mut oob_votes = vec![vec![0usize; n_classes]; n];
    for (tree, in_bag) in &grown {
        for i in 0..n {
            if !in_bag[i] {
                oob_votes[i][tree.predict(&features[i])] += 1;
            }
        }
    }
    let mut correct = 0usize;
    let mut counted = 0usize;
    for i in 0..n {
        let total: usize = oob_votes[i].iter().sum();
        if total == 0 {
            continue;
        }
        counted += 1;
        let pred = argmax_lowest(&oob_votes[i].iter().map(|&v| v as f64).collect::<Vec<_>>());
        if pred == train.class_ids()[i] {
            correct += 1;
        }
    }
    let oob_accuracy = if counted > 0 {
        correct as f64 / counted as f64
    } else {
        0.0
    };

    let trees = grown.into_iter().map(|(t, _)| t).collect();
    Ok((
        TrainedModel {
            layout_version: MODEL_LAYOUT_VERSION,
            kind: ModelKind::Rf,
            classes: train.classes().to_vec(),
            dim,
            seed,
            standardizer,
            train_config: TrainConfig::Forest { n_trees },
            params: ModelParams::Forest(ForestParams { trees }),
        },
        oob_accuracy,
    ))
}

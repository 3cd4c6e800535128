//! Stratified train/test splitting.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

use super::Dataset;

/// Split per class: round(n * train_frac) samples to train (kept within
/// [1, n-1] so both sides see every class), remainder to test. Shuffling is
/// seeded and iterates classes in id order, so the split is reproducible.
pub fn stratified_split(
    d: &Dataset,
    train_frac: f64,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    if !(train_frac > 0.0 && train_frac < 1.0) {
        return Err(Error::invalid_param(format!(
            "train fraction must be in (0,1), got {train_frac}"
        )));
    }
    let k = d.n_classes();
    let mut per_class: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, &c) in d.class_ids().iter().enumerate() {
        per_class[c].push(i);
    }
    for (c, members) in per_class.iter().enumerate() {
        if members.len() < 2 {
            return Err(Error::ClassTooSmall {
                label: d.classes()[c].clone(),
                count: members.len(),
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train_idx = Vec::new();
    let mut test_idx = Vec::new();
    for members in per_class.iter_mut() {
        members.shuffle(&mut rng);
        let n = members.len();
        let n_train = ((n as f64 * train_frac).round() as usize).clamp(1, n - 1);
        train_idx.extend_from_slice(&members[..n_train]);
        test_idx.extend_from_slice(&members[n_train..]);
    }
    Ok((d.subset(&train_idx), d.subset(&test_idx)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn herd(classes: usize, per_class: usize) -> Dataset {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for c in 0..classes {
            for i in 0..per_class {
                rows.push(vec![c as f64, i as f64]);
                labels.push(format!("pig_{c:02}"));
            }
        }
        Dataset::from_rows(rows, labels).unwrap()
    }

    #[test]
    fn herd_splits_640_160() {
        let d = herd(20, 40);
        let (train, test) = stratified_split(&d, 0.8, 7).unwrap();
        assert_eq!(train.len(), 640);
        assert_eq!(test.len(), 160);
        // 32/8 per class.
        for c in 0..20 {
            let tr = train.class_ids().iter().filter(|&&x| x == c).count();
            let te = test.class_ids().iter().filter(|&&x| x == c).count();
            assert_eq!((tr, te), (32, 8), "class {c}");
        }
    }

    #[test]
    fn same_seed_same_split() {
        let d = herd(5, 9);
        let (tr1, te1) = stratified_split(&d, 0.8, 42).unwrap();
        let (tr2, te2) = stratified_split(&d, 0.8, 42).unwrap();
        assert_eq!(tr1.labels(), tr2.labels());
        assert_eq!(tr1.features(), tr2.features());
        assert_eq!(te1.features(), te2.features());
        let (tr3, _) = stratified_split(&d, 0.8, 43).unwrap();
        assert!(tr1.features() != tr3.features(), "different seed should differ");
    }

    #[test]
    fn two_sample_class_splits_one_one() {
        let d = herd(3, 2);
        let (train, test) = stratified_split(&d, 0.5, 1).unwrap();
        assert_eq!(train.len(), 3);
        assert_eq!(test.len(), 3);
    }

    #[test]
    fn single_sample_class_rejected() {
        let d = Dataset::from_rows(
            vec![vec![0.0], vec![1.0], vec![2.0]],
            vec!["a".into(), "a".into(), "b".into()],
        )
        .unwrap();
        assert!(matches!(
            stratified_split(&d, 0.8, 0),
            Err(Error::ClassTooSmall { .. })
        ));
    }

    #[test]
    fn both_sides_nonempty_even_at_high_fraction() {
        let d = herd(2, 2);
        let (train, test) = stratified_split(&d, 0.9, 0).unwrap();
        assert_eq!(train.len(), 2);
        assert_eq!(test.len(), 2);
    }
}

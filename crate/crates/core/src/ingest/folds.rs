use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Stratified `k`-fold assignment.
///
/// Rows of each class (in increasing class order) are shuffled with a
/// `ChaCha8Rng` seeded by `seed` and dealt round-robin to folds; the deal
/// continues where the previous class stopped so fold sizes stay within one.
pub fn stratified_folds(targets: &[usize], k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {k}")));
    }
    let n_classes = targets.iter().max().map_or(0, |m| m + 1);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (row, &t) in targets.iter().enumerate() {
        by_class[t].push(row);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold_of = vec![0; targets.len()];
    let mut next = 0;
    for rows in &mut by_class {
        rows.shuffle(&mut rng);
        for &row in rows.iter() {
            fold_of[row] = next;
            next = (next + 1) % k;
        }
    }
    Ok(fold_of)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn counts(targets: &[usize], folds: &[usize], k: usize, class: usize) -> Vec<usize> {
        let mut c = vec![0; k];
        for (t, f) in targets.iter().zip(folds) {
            if *t == class {
                c[*f] += 1;
            }
        }
        c
    }

    #[test]
    fn divisible_classes_split_evenly() {
        let targets: Vec<usize> = (0..100).map(|i| usize::from(i < 30)).collect();
        let folds = stratified_folds(&targets, 10, 7).unwrap();
        assert_eq!(counts(&targets, &folds, 10, 1), vec![3; 10]);
        assert_eq!(counts(&targets, &folds, 10, 0), vec![7; 10]);
        assert_eq!(folds, stratified_folds(&targets, 10, 7).unwrap());
        assert!(matches!(
            stratified_folds(&targets, 1, 7),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn proportions_within_one_instance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let targets: Vec<usize> = (0..10_000)
            .map(|_| usize::from(rng.gen_bool(0.23)))
            .collect();
        let folds = stratified_folds(&targets, 10, 99).unwrap();
        // counting oracle: per-class expected share is n_class / k
        for class in 0..2 {
            let n_class = targets.iter().filter(|&&t| t == class).count() as f64;
            for c in counts(&targets, &folds, 10, class) {
                assert!((c as f64 - n_class / 10.0).abs() <= 1.0);
            }
        }
        // partition: every row in exactly one fold, sizes within one
        let sizes = (0..10)
            .map(|f| folds.iter().filter(|&&x| x == f).count())
            .collect::<Vec<_>>();
        assert_eq!(sizes.iter().sum::<usize>(), 10_000);
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    }
}

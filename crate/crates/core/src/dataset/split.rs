use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::encoded::Dataset;
use super::raw::RawDataset;
use crate::error::{Error, Result};

pub const DEFAULT_TRAIN_FRACTION: f64 = 0.7;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    /// Classes with a single instance; they are placed in the training part.
    pub singleton_classes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split<T> {
    pub train: T,
    pub test: T,
    pub singleton_classes: Vec<usize>,
}

/// Stratified train/test partition of `labels`.
///
/// Each class contributes `floor(fraction * count)` training rows, and the
/// rows still needed to reach `round(fraction * total)` go to the classes
/// with the largest fractional remainders. Index lists are returned sorted.
pub fn stratified_indices(
    labels: &[usize],
    n_classes: usize,
    fraction: f64,
    seed: u64,
) -> Result<SplitIndices> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::OutOfRange(format!(
            "train fraction {fraction} not in (0,1)"
        )));
    }
    let total = labels.len();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, &c) in labels.iter().enumerate() {
        members.get_mut(c).ok_or(Error::UnknownClass(c))?.push(i);
    }

    let target = (fraction * total as f64).round() as usize;
    let mut quota: Vec<usize> = Vec::with_capacity(n_classes);
    let mut remainders: Vec<(f64, usize)> = Vec::new();
    let mut singleton_classes = Vec::new();
    for (c, m) in members.iter().enumerate() {
        let exact = fraction * m.len() as f64;
        let base = exact.floor() as usize;
        if m.len() == 1 {
            singleton_classes.push(c);
            quota.push(1);
        } else {
            quota.push(base);
            if base < m.len() {
                remainders.push((exact - base as f64, c));
            }
        }
    }
    // largest remainder first, class order on ties
    remainders.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let assigned: usize = quota.iter().sum();
    for &(_, c) in remainders.iter().take(target.saturating_sub(assigned)) {
        quota[c] += 1;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::with_capacity(target);
    let mut test = Vec::with_capacity(total - target.min(total));
    for (m, &q) in members.iter_mut().zip(&quota) {
        m.shuffle(&mut rng);
        train.extend_from_slice(&m[..q]);
        test.extend_from_slice(&m[q..]);
    }
    if train.is_empty() || test.is_empty() {
        return Err(Error::EmptyPartition);
    }
    train.sort_unstable();
    test.sort_unstable();
    if !singleton_classes.is_empty() {
        log::warn!(
            "{} class(es) with a single instance kept in the training part",
            singleton_classes.len()
        );
    }
    Ok(SplitIndices {
        train,
        test,
        singleton_classes,
    })
}

/// Seeded stratified split of an encoded dataset.
pub fn split(data: &Dataset, train_fraction: f64, seed: u64) -> Result<Split<Dataset>> {
    let idx = stratified_indices(data.labels(), data.n_classes(), train_fraction, seed)?;
    Ok(Split {
        train: data.subset(&idx.train),
        test: data.subset(&idx.test),
        singleton_classes: idx.singleton_classes,
    })
}

/// Seeded stratified split of raw rows, used when preprocessing must be
/// fitted on the training part only.
pub fn split_raw(raw: &RawDataset, train_fraction: f64, seed: u64) -> Result<Split<RawDataset>> {
    let classes = raw.class_labels();
    let labels: Vec<usize> = (0..raw.n_rows())
        .map(|i| {
            classes
                .binary_search_by(|c| c.as_str().cmp(raw.label(i)))
                .unwrap()
        })
        .collect();
    let idx = stratified_indices(&labels, classes.len(), train_fraction, seed)?;
    Ok(Split {
        train: raw.select(&idx.train),
        test: raw.select(&idx.test),
        singleton_classes: idx.singleton_classes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(counts: &[usize]) -> Vec<usize> {
        counts
            .iter()
            .enumerate()
            .flat_map(|(c, &n)| std::iter::repeat_n(c, n))
            .collect()
    }

    #[test]
    fn deterministic_for_seed() {
        let l = labels(&[50, 50]);
        let a = stratified_indices(&l, 2, 0.7, 42).unwrap();
        let b = stratified_indices(&l, 2, 0.7, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn stratified_counts() {
        let l = labels(&[50, 50]);
        let s = stratified_indices(&l, 2, 0.7, 42).unwrap();
        let per_class = |idx: &[usize], c| idx.iter().filter(|&&i| l[i] == c).count();
        assert_eq!(per_class(&s.train, 0), 35);
        assert_eq!(per_class(&s.train, 1), 35);
        assert_eq!(s.test.len(), 30);
    }

    #[test]
    fn different_seeds_differ() {
        let l = labels(&[50, 50]);
        let a = stratified_indices(&l, 2, 0.7, 1).unwrap();
        let b = stratified_indices(&l, 2, 0.7, 2).unwrap();
        assert_ne!(a.train, b.train);
    }

    #[test]
    fn singleton_class_goes_to_train() {
        let l = labels(&[10, 1]);
        let s = stratified_indices(&l, 2, 0.7, 3).unwrap();
        assert_eq!(s.singleton_classes, vec![1]);
        assert!(s.train.contains(&10));
    }

    #[test]
    fn partition_is_disjoint_and_complete() {
        let l = labels(&[7, 13, 4]);
        let s = stratified_indices(&l, 3, 0.7, 9).unwrap();
        let mut all: Vec<usize> = s.train.iter().chain(&s.test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..24).collect::<Vec<_>>());
        assert_eq!(s.train.len(), 17);
    }

    #[test]
    fn bad_fraction_and_empty_partition() {
        let l = labels(&[2, 2]);
        assert!(stratified_indices(&l, 2, 1.0, 0).is_err());
        assert!(stratified_indices(&l, 2, 0.0, 0).is_err());
        assert!(matches!(
            stratified_indices(&labels(&[1, 1]), 2, 0.5, 0),
            Err(Error::EmptyPartition)
        ));
    }
}

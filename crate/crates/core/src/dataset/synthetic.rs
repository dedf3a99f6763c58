use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::encoded::{Attribute, Dataset};
use crate::error::Result;

/// Size limits for [`random_dataset`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyntheticShape {
    pub max_instances: usize,
    pub max_attributes: usize,
    pub max_classes: usize,
    pub max_values: usize,
}

impl Default for SyntheticShape {
    fn default() -> Self {
        Self {
            max_instances: 200,
            max_attributes: 8,
            max_classes: 4,
            max_values: 5,
        }
    }
}

/// Seeded categorical dataset with class-dependent value distributions.
///
/// Each (attribute, class) pair has a preferred value drawn with a random
/// affinity, so attributes range from informative to pure noise. Every
/// class occurs at least once.
pub fn random_dataset(seed: u64, shape: SyntheticShape) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.random_range(2..=shape.max_classes.max(2));
    let n = rng.random_range(1..=shape.max_attributes.max(1));
    let m = rng.random_range((4 * k).min(shape.max_instances)..=shape.max_instances.max(k));
    let sizes: Vec<usize> = (0..n)
        .map(|_| rng.random_range(2..=shape.max_values.max(2)))
        .collect();
    let affinity: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..0.9)).collect();
    let preferred: Vec<Vec<usize>> = sizes
        .iter()
        .map(|&v| (0..k).map(|_| rng.random_range(0..v)).collect())
        .collect();

    let mut labels: Vec<usize> = (0..k).collect();
    labels.extend((k..m).map(|_| rng.random_range(0..k)));
    let instances = labels
        .iter()
        .map(|&c| {
            (0..n)
                .map(|j| {
                    if rng.random_bool(affinity[j]) {
                        preferred[j][c]
                    } else {
                        rng.random_range(0..sizes[j])
                    }
                })
                .collect()
        })
        .collect();
    let attributes = sizes
        .iter()
        .enumerate()
        .map(|(j, &v)| Attribute {
            name: format!("a{j}"),
            values: (0..v).map(|i| format!("v{i}")).collect(),
        })
        .collect();
    let classes = (0..k).map(|c| format!("c{c}")).collect();
    Dataset::new(attributes, "class", classes, instances, labels)
}

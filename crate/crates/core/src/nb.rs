//! Laplace-smoothed naive Bayes estimates and weighted log-domain scoring.

use serde::{Deserialize, Serialize};

use crate::dataset::{Attribute, Dataset};
use crate::error::{Error, Result};

/// One weight per attribute, shared by every class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightVector(pub Vec<f64>);

impl WeightVector {
    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Count statistics of a training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyModel {
    attributes: Vec<Attribute>,
    classes: Vec<String>,
    class_counts: Vec<u64>,
    /// `joint_counts[j][a][c]`: rows with value `a` on attribute `j` and label `c`.
    joint_counts: Vec<Vec<Vec<u64>>>,
    m: u64,
    /// Distinct values of each attribute observed in training.
    alphabet_sizes: Vec<usize>,
}

/// Log-domain class scores of one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassScores(pub Vec<f64>);

/// Scores this close count as tied. Equal posteriors reached through
/// different factorizations differ by rounding in the log domain.
pub const TIE_TOLERANCE: f64 = 1e-9;

impl ClassScores {
    /// Earliest class whose score is within [`TIE_TOLERANCE`] of the highest.
    pub fn argmax(&self) -> usize {
        let max = self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        self.0
            .iter()
            .position(|&s| s >= max - TIE_TOLERANCE)
            .unwrap_or(0)
    }
}

impl FrequencyModel {
    pub fn fit(train: &Dataset) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let k = train.n_classes();
        let mut class_counts = vec![0u64; k];
        let mut joint_counts: Vec<Vec<Vec<u64>>> = train
            .attributes()
            .iter()
            .map(|a| vec![vec![0u64; k]; a.values.len()])
            .collect();
        for (x, &c) in train.instances().iter().zip(train.labels()) {
            class_counts[c] += 1;
            for (j, &v) in x.iter().enumerate() {
                joint_counts[j][v][c] += 1;
            }
        }
        let alphabet_sizes = joint_counts
            .iter()
            .map(|vals| {
                vals.iter()
                    .filter(|per_class| per_class.iter().any(|&n| n > 0))
                    .count()
            })
            .collect();
        Ok(Self {
            attributes: train.attributes().to_vec(),
            classes: train.classes().to_vec(),
            class_counts,
            joint_counts,
            m: train.len() as u64,
            alphabet_sizes,
        })
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn n_attributes(&self) -> usize {
        self.attributes.len()
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn n_instances(&self) -> u64 {
        self.m
    }

    pub fn class_count(&self, c: usize) -> u64 {
        self.class_counts[c]
    }

    pub fn joint_count(&self, j: usize, a: usize, c: usize) -> u64 {
        self.joint_counts[j]
            .get(a)
            .map_or(0, |per_class| per_class[c])
    }

    pub fn alphabet_size(&self, j: usize) -> usize {
        self.alphabet_sizes[j]
    }

    /// `(count_c + 1) / (m + K)`.
    pub fn prior(&self, c: usize) -> Result<f64> {
        let count = *self.class_counts.get(c).ok_or(Error::UnknownClass(c))?;
        Ok((count + 1) as f64 / (self.m + self.n_classes() as u64) as f64)
    }

    /// `(joint + 1) / (count_c + |A_j|)`. Values never seen in training
    /// count as zero and do not enlarge the alphabet.
    pub fn conditional(&self, j: usize, a: usize, c: usize) -> Result<f64> {
        if c >= self.n_classes() {
            return Err(Error::UnknownClass(c));
        }
        if j >= self.n_attributes() {
            return Err(Error::OutOfRange(format!("attribute index {j}")));
        }
        let num = self.joint_count(j, a, c) + 1;
        let den = self.class_counts[c] + self.alphabet_sizes[j] as u64;
        Ok(num as f64 / den as f64)
    }

    pub(crate) fn log_prior(&self, c: usize) -> f64 {
        ((self.class_counts[c] + 1) as f64 / (self.m + self.n_classes() as u64) as f64).ln()
    }

    pub(crate) fn log_conditional(&self, j: usize, a: usize, c: usize) -> f64 {
        let num = self.joint_count(j, a, c) + 1;
        let den = self.class_counts[c] + self.alphabet_sizes[j] as u64;
        (num as f64 / den as f64).ln()
    }

    fn check_arity(&self, x: &[usize]) -> Result<()> {
        if x.len() != self.n_attributes() {
            return Err(Error::ArityMismatch {
                got: x.len(),
                expected: self.n_attributes(),
            });
        }
        Ok(())
    }

    /// `log P(c) + Σ_j w_j · log P(x_j | c)` for every class.
    pub fn class_scores(&self, weights: &WeightVector, x: &[usize]) -> Result<ClassScores> {
        self.check_arity(x)?;
        if weights.len() != self.n_attributes() {
            return Err(Error::LengthMismatch(format!(
                "{} weights for {} attributes",
                weights.len(),
                self.n_attributes()
            )));
        }
        let scores = (0..self.n_classes())
            .map(|c| {
                x.iter()
                    .zip(weights.as_slice())
                    .enumerate()
                    .fold(self.log_prior(c), |acc, (j, (&a, &w))| {
                        acc + w * self.log_conditional(j, a, c)
                    })
            })
            .collect();
        Ok(ClassScores(scores))
    }

    pub fn predict(&self, weights: &WeightVector, x: &[usize]) -> Result<usize> {
        Ok(self.class_scores(weights, x)?.argmax())
    }

    /// Fraction of `data` predicted correctly. `data` must be coded against
    /// this model's alphabets (see [`Dataset::conform_to`]).
    pub fn accuracy(&self, weights: &WeightVector, data: &Dataset) -> Result<f64> {
        Ok(self.correct_count(weights, data)? as f64 / data.len() as f64)
    }

    pub fn correct_count(&self, weights: &WeightVector, data: &Dataset) -> Result<usize> {
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut correct = 0;
        for (x, &c) in data.instances().iter().zip(data.labels()) {
            if self.predict(weights, x)? == c {
                correct += 1;
            }
        }
        Ok(correct)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Ten rows: four of class `p`, six of `q`; attribute `a` takes x/y/z.
    fn toy() -> Dataset {
        let rows: Vec<(&[&str], &str)> = vec![
            (&["x", "u"], "p"),
            (&["x", "u"], "p"),
            (&["x", "v"], "p"),
            (&["y", "v"], "p"),
            (&["y", "u"], "q"),
            (&["z", "u"], "q"),
            (&["z", "v"], "q"),
            (&["z", "v"], "q"),
            (&["y", "v"], "q"),
            (&["z", "v"], "q"),
        ];
        Dataset::from_symbols(&["a", "b"], &rows).unwrap()
    }

    #[test]
    fn counts() {
        let m = FrequencyModel::fit(&toy()).unwrap();
        assert_eq!(m.class_count(0), 4);
        assert_eq!(m.n_instances(), 10);
        assert_eq!(m.alphabet_size(0), 3);
        assert_eq!(m.joint_count(0, 0, 0), 3);
    }

    #[test]
    fn empty_dataset_errors() {
        let d = toy().subset(&[]);
        assert!(matches!(FrequencyModel::fit(&d), Err(Error::EmptyDataset)));
    }

    #[test]
    fn prior_arithmetic() {
        let m = FrequencyModel::fit(&toy()).unwrap();
        assert_eq!(m.prior(0).unwrap(), 5.0 / 12.0);
        assert!(m.prior(2).is_err());
        let absent = FrequencyModel::fit(&toy().subset(&[4, 5, 6, 7, 8, 9, 4, 5, 6, 7])).unwrap();
        assert_eq!(absent.prior(0).unwrap(), 1.0 / 12.0);
        assert_relative_eq!(m.prior(0).unwrap() + m.prior(1).unwrap(), 1.0);
    }

    #[test]
    fn conditional_arithmetic() {
        let m = FrequencyModel::fit(&toy()).unwrap();
        // x given p: joint 3, class count 4, alphabet 3
        assert_eq!(m.conditional(0, 0, 0).unwrap(), 4.0 / 7.0);
        // z given p: never seen together
        assert_eq!(m.conditional(0, 2, 0).unwrap(), 1.0 / 7.0);
        // code outside the training alphabet entirely
        assert_eq!(m.conditional(0, 99, 0).unwrap(), 1.0 / 7.0);
        let sum: f64 = (0..3).map(|a| m.conditional(0, a, 0).unwrap()).sum();
        assert_relative_eq!(sum, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn weighted_score_substitution() {
        let m = FrequencyModel::fit(&toy()).unwrap();
        let w = WeightVector(vec![1.0, 2.0]);
        let x = [1, 0];
        let s = m.class_scores(&w, &x).unwrap();
        for c in 0..2 {
            let expected = m.prior(c).unwrap().ln()
                + m.conditional(0, 1, c).unwrap().ln()
                + 2.0 * m.conditional(1, 0, c).unwrap().ln();
            assert_relative_eq!(s.0[c], expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_weights_pick_majority_class() {
        let m = FrequencyModel::fit(&toy()).unwrap();
        let w = WeightVector(vec![0.0, 0.0]);
        for x in toy().instances() {
            assert_eq!(m.predict(&w, x).unwrap(), 1);
        }
    }

    #[test]
    fn argmax_ties_go_to_first_class() {
        assert_eq!(ClassScores(vec![-1.0, -2.0]).argmax(), 0);
        assert_eq!(ClassScores(vec![-2.0, -1.0]).argmax(), 1);
        assert_eq!(ClassScores(vec![-1.0, -1.0, -1.0]).argmax(), 0);
    }

    #[test]
    fn arity_mismatch() {
        let m = FrequencyModel::fit(&toy()).unwrap();
        let w = WeightVector::uniform(2);
        assert!(matches!(
            m.class_scores(&w, &[0]),
            Err(Error::ArityMismatch { .. })
        ));
        assert!(m.class_scores(&WeightVector::uniform(3), &[0, 0]).is_err());
    }

    #[test]
    fn accuracy_extremes() {
        let d = Dataset::from_symbols(&["a"], &[(&["x"], "p"), (&["y"], "q")]).unwrap();
        let m = FrequencyModel::fit(&d).unwrap();
        let w = WeightVector::uniform(1);
        assert_eq!(m.accuracy(&w, &d).unwrap(), 1.0);
        let flipped = Dataset::from_symbols(&["a"], &[(&["x"], "q"), (&["y"], "p")])
            .unwrap()
            .conform_to(&d)
            .unwrap();
        assert_eq!(m.accuracy(&w, &flipped).unwrap(), 0.0);
        assert!(m.accuracy(&w, &d.subset(&[])).is_err());
    }

    #[test]
    fn accuracy_hand_tally() {
        // uniform NB on the toy set, predictions counted by hand from the
        // smoothed tables: rows 3 (y,v|p) and 8 (y,v|q) share features, so
        // exactly one of them is wrong; every other row is right.
        let d = toy();
        let m = FrequencyModel::fit(&d).unwrap();
        let w = WeightVector::uniform(2);
        assert_eq!(m.correct_count(&w, &d).unwrap(), 9);
    }

    #[test]
    fn json_roundtrip() {
        let m = FrequencyModel::fit(&toy()).unwrap();
        assert_eq!(FrequencyModel::from_json(&m.to_json().unwrap()).unwrap(), m);
    }
}

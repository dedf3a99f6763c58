//! Class-attribute (CA) and attribute-attribute (AA) correlation indexes.
//!
//! Entropies and mutual information use base-2 logarithms with
//! `0 · log 0 = 0`. Pearson correlation runs on the ordinal value codes of
//! the discretized attributes.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Rounding noise below this magnitude is clamped to zero for
/// quantities that are non-negative in exact arithmetic.
const NEGATIVE_FLOOR: f64 = -1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaIndex {
    InfoGain,
    GainRatio,
    MutualInfo,
    KlWeight,
    Pearson,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AaIndex {
    Pearson,
    MutualInfo,
}

impl CaIndex {
    pub const ALL: [CaIndex; 5] = [
        CaIndex::InfoGain,
        CaIndex::GainRatio,
        CaIndex::MutualInfo,
        CaIndex::KlWeight,
        CaIndex::Pearson,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CaIndex::InfoGain => "info_gain",
            CaIndex::GainRatio => "gain_ratio",
            CaIndex::MutualInfo => "mutual_info",
            CaIndex::KlWeight => "kl_weight",
            CaIndex::Pearson => "pearson",
        }
    }
}

impl AaIndex {
    pub const ALL: [AaIndex; 2] = [AaIndex::Pearson, AaIndex::MutualInfo];

    pub fn name(self) -> &'static str {
        match self {
            AaIndex::Pearson => "pearson",
            AaIndex::MutualInfo => "mutual_info",
        }
    }
}

impl fmt::Display for CaIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for AaIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn normalise_key(s: &str) -> String {
    s.trim().to_ascii_lowercase().replace('-', "_")
}

impl FromStr for CaIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match normalise_key(s).as_str() {
            "info_gain" | "ig" | "i" => Ok(CaIndex::InfoGain),
            "gain_ratio" | "gr" | "g" => Ok(CaIndex::GainRatio),
            "mutual_info" | "mi" | "m" => Ok(CaIndex::MutualInfo),
            "kl_weight" | "kl" | "k" => Ok(CaIndex::KlWeight),
            "pearson" | "p" => Ok(CaIndex::Pearson),
            other => Err(Error::InvalidScheme(format!(
                "unknown class-attribute index `{other}`"
            ))),
        }
    }
}

impl FromStr for AaIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match normalise_key(s).as_str() {
            "pearson" | "p" => Ok(AaIndex::Pearson),
            "mutual_info" | "mi" | "m" => Ok(AaIndex::MutualInfo),
            other => Err(Error::InvalidScheme(format!(
                "unknown attribute-attribute index `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexKind {
    Ca,
    AaAggregate,
}

/// One index value per attribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexVector {
    pub kind: IndexKind,
    pub index_name: String,
    pub values: Vec<f64>,
}

impl IndexVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Symmetric matrix of raw pairwise attribute-attribute values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairMatrix {
    pub index_name: String,
    pub n: usize,
    /// Row-major, `n * n` entries.
    pub values: Vec<f64>,
}

impl PairMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn compute(data: &Dataset, index: AaIndex) -> Self {
        let n = data.n_attributes();
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                (0..n)
                    .map(|j| {
                        // fill the upper triangle, mirror below so both halves are bit-identical
                        let (a, b) = if i <= j { (i, j) } else { (j, i) };
                        match index {
                            AaIndex::Pearson => pearson_aa(data, a, b),
                            AaIndex::MutualInfo => mutual_information_aa(data, a, b),
                        }
                    })
                    .collect()
            })
            .collect();
        Self {
            index_name: index.name().to_string(),
            n,
            values: rows.concat(),
        }
    }

    /// Min-max normalization over all off-diagonal entries jointly; the
    /// diagonal of the result is zero.
    pub fn normalized(&self) -> PairMatrix {
        let n = self.n;
        let off: Vec<f64> = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| self.get(i, j))
            .collect();
        let lo = off.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = off.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j && hi > lo {
                    values[i * n + j] = (self.get(i, j) - lo) / (hi - lo);
                }
            }
        }
        PairMatrix {
            index_name: self.index_name.clone(),
            n,
            values,
        }
    }
}

fn clamp_non_negative(v: f64) -> f64 {
    if (NEGATIVE_FLOOR..0.0).contains(&v) {
        0.0
    } else {
        v
    }
}

/// Shannon entropy (bits) of a count vector.
pub fn entropy(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let total = total as f64;
    counts
        .iter()
        .filter(|&&n| n > 0)
        .map(|&n| {
            let p = n as f64 / total;
            -p * p.log2()
        })
        .sum()
}

fn class_counts(data: &Dataset) -> Vec<u64> {
    let mut counts = vec![0u64; data.n_classes()];
    for &c in data.labels() {
        counts[c] += 1;
    }
    counts
}

fn value_counts(data: &Dataset, j: usize) -> Vec<u64> {
    let mut counts = vec![0u64; data.attribute(j).values.len()];
    for v in data.column(j) {
        counts[v] += 1;
    }
    counts
}

/// `table[a][c]` for attribute `j` against the class.
fn value_class_table(data: &Dataset, j: usize) -> Vec<Vec<u64>> {
    let mut table = vec![vec![0u64; data.n_classes()]; data.attribute(j).values.len()];
    for (x, &c) in data.instances().iter().zip(data.labels()) {
        table[x[j]][c] += 1;
    }
    table
}

fn mutual_information_table(table: &[Vec<u64>]) -> f64 {
    let total: u64 = table.iter().flatten().sum();
    if total == 0 {
        return 0.0;
    }
    let total = total as f64;
    let rows: Vec<f64> = table.iter().map(|r| r.iter().sum::<u64>() as f64).collect();
    let width = table.first().map_or(0, Vec::len);
    let cols: Vec<f64> = (0..width)
        .map(|b| table.iter().map(|r| r[b]).sum::<u64>() as f64)
        .collect();
    let mut mi = 0.0;
    for (r, row) in table.iter().enumerate() {
        for (b, &n) in row.iter().enumerate() {
            if n > 0 {
                let n = n as f64;
                mi += n / total * (n * total / (rows[r] * cols[b])).log2();
            }
        }
    }
    clamp_non_negative(mi)
}

/// Entropy of the class distribution.
pub fn class_entropy(data: &Dataset) -> f64 {
    entropy(&class_counts(data))
}

/// `Ent(D) − Σ_v |D^v|/|D| · Ent(D^v)`.
pub fn information_gain(data: &Dataset, j: usize) -> f64 {
    let n = data.len() as f64;
    if data.is_empty() {
        return 0.0;
    }
    let conditional: f64 = value_class_table(data, j)
        .iter()
        .map(|row| row.iter().sum::<u64>() as f64 / n * entropy(row))
        .sum();
    clamp_non_negative(class_entropy(data) - conditional)
}

/// Entropy of the attribute's own value distribution.
pub fn split_information(data: &Dataset, j: usize) -> f64 {
    entropy(&value_counts(data, j))
}

/// Information gain over split information; zero when the attribute is constant.
pub fn gain_ratio(data: &Dataset, j: usize) -> f64 {
    let split = split_information(data, j);
    if split <= 0.0 {
        return 0.0;
    }
    information_gain(data, j) / split
}

pub fn mutual_information_ca(data: &Dataset, j: usize) -> f64 {
    mutual_information_table(&value_class_table(data, j))
}

pub fn mutual_information_aa(data: &Dataset, i: usize, j: usize) -> f64 {
    let mut table =
        vec![vec![0u64; data.attribute(j).values.len()]; data.attribute(i).values.len()];
    for x in data.instances() {
        table[x[i]][x[j]] += 1;
    }
    mutual_information_table(&table)
}

/// Absolute Pearson correlation of two code sequences; zero when either
/// has no variance.
pub fn abs_pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return 0.0;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return 0.0;
    }
    (sxy / (sxx * syy).sqrt()).abs().min(1.0)
}

pub fn pearson_aa(data: &Dataset, i: usize, j: usize) -> f64 {
    let xs: Vec<f64> = data.column(i).map(|v| v as f64).collect();
    let ys: Vec<f64> = data.column(j).map(|v| v as f64).collect();
    abs_pearson(&xs, &ys)
}

/// Absolute Pearson correlation between attribute codes and class codes.
pub fn pearson_ca(data: &Dataset, j: usize) -> f64 {
    let xs: Vec<f64> = data.column(j).map(|v| v as f64).collect();
    let ys: Vec<f64> = data.labels().iter().map(|&c| c as f64).collect();
    abs_pearson(&xs, &ys)
}

/// Expected KL divergence of the class posterior from the class prior,
/// over the attribute's values, divided by the attribute's entropy.
pub fn kl_weight(data: &Dataset, j: usize) -> f64 {
    if data.is_empty() {
        return 0.0;
    }
    let n = data.len() as f64;
    let prior: Vec<f64> = class_counts(data).iter().map(|&c| c as f64 / n).collect();
    let table = value_class_table(data, j);
    let mut numerator = 0.0;
    let mut denominator = 0.0;
    for row in &table {
        let n_a: u64 = row.iter().sum();
        if n_a == 0 {
            continue;
        }
        let p_a = n_a as f64 / n;
        let kl: f64 = row
            .iter()
            .zip(&prior)
            .filter(|(&n_ac, _)| n_ac > 0)
            .map(|(&n_ac, &p_c)| {
                let post = n_ac as f64 / n_a as f64;
                post * (post / p_c).log2()
            })
            .sum();
        numerator += p_a * kl;
        denominator -= p_a * p_a.log2();
    }
    if denominator <= 0.0 {
        return 0.0;
    }
    clamp_non_negative(numerator) / denominator
}

/// Min-max normalization to `[0, 1]`; a degenerate range maps to zeros.
pub fn normalize_values(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        return vec![0.0; values.len()];
    }
    values.iter().map(|&v| (v - lo) / (hi - lo)).collect()
}

pub fn normalize(v: &IndexVector) -> IndexVector {
    IndexVector {
        kind: v.kind,
        index_name: v.index_name.clone(),
        values: normalize_values(&v.values),
    }
}

/// Mean of the (already normalized) entries linking attribute `j` to every
/// other attribute; zero for a single attribute.
pub fn avg_redundancy(matrix: &PairMatrix, j: usize) -> f64 {
    if matrix.n < 2 {
        return 0.0;
    }
    let sum: f64 = (0..matrix.n)
        .filter(|&i| i != j)
        .map(|i| matrix.get(i, j))
        .sum();
    sum / (matrix.n - 1) as f64
}

/// Raw class-attribute index for every attribute.
pub fn ca_vector(data: &Dataset, index: CaIndex) -> IndexVector {
    let values = (0..data.n_attributes())
        .into_par_iter()
        .map(|j| match index {
            CaIndex::InfoGain => information_gain(data, j),
            CaIndex::GainRatio => gain_ratio(data, j),
            CaIndex::MutualInfo => mutual_information_ca(data, j),
            CaIndex::KlWeight => kl_weight(data, j),
            CaIndex::Pearson => pearson_ca(data, j),
        })
        .collect();
    IndexVector {
        kind: IndexKind::Ca,
        index_name: index.name().to_string(),
        values,
    }
}

/// Averaged normalized redundancy of every attribute against the others.
pub fn aa_vector(matrix: &PairMatrix) -> IndexVector {
    let normalized = matrix.normalized();
    IndexVector {
        kind: IndexKind::AaAggregate,
        index_name: matrix.index_name.clone(),
        values: (0..matrix.n)
            .map(|j| avg_redundancy(&normalized, j))
            .collect(),
    }
}

/// Normalized CA vector and aggregated AA vector ready for fusion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexPair {
    pub ca_raw: IndexVector,
    pub ca: IndexVector,
    pub aa_matrix: PairMatrix,
    pub aa: IndexVector,
}

impl IndexPair {
    pub fn compute(data: &Dataset, ca: CaIndex, aa: AaIndex) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let ca_raw = ca_vector(data, ca);
        let aa_matrix = PairMatrix::compute(data, aa);
        Ok(Self {
            ca: normalize(&ca_raw),
            aa: aa_vector(&aa_matrix),
            ca_raw,
            aa_matrix,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn data(rows: &[(&[&str], &str)], names: &[&str]) -> Dataset {
        Dataset::from_symbols(names, rows).unwrap()
    }

    fn h(ps: &[f64]) -> f64 {
        ps.iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.log2())
            .sum()
    }

    #[test]
    fn ig_identity_constant_and_partial() {
        let d = data(
            &[
                (&["a", "c", "x"], "a"),
                (&["a", "c", "x"], "a"),
                (&["b", "c", "x"], "b"),
                (&["b", "c", "y"], "b"),
            ],
            &["same", "const", "mixed"],
        );
        assert_abs_diff_eq!(information_gain(&d, 0), class_entropy(&d), epsilon = 1e-15);
        assert_eq!(information_gain(&d, 1), 0.0);
        let expected = 1.0 - 0.75 * h(&[2.0 / 3.0, 1.0 / 3.0]);
        assert_abs_diff_eq!(information_gain(&d, 2), expected, epsilon = 1e-12);
        assert_abs_diff_eq!(information_gain(&d, 2), 0.3113, epsilon = 5e-5);
    }

    #[test]
    fn gain_ratio_cases() {
        let d = data(
            &[
                (&["a", "c", "x"], "a"),
                (&["a", "c", "x"], "a"),
                (&["b", "c", "x"], "b"),
                (&["b", "c", "y"], "b"),
            ],
            &["same", "const", "mixed"],
        );
        assert_eq!(gain_ratio(&d, 1), 0.0);
        assert_abs_diff_eq!(gain_ratio(&d, 0), 1.0, epsilon = 1e-15);
        let ig = 1.0 - 0.75 * h(&[2.0 / 3.0, 1.0 / 3.0]);
        let expected = ig / h(&[0.75, 0.25]);
        assert_abs_diff_eq!(gain_ratio(&d, 2), expected, epsilon = 1e-12);
        assert_abs_diff_eq!(gain_ratio(&d, 2), 0.3837, epsilon = 5e-5);
    }

    #[test]
    fn mi_ca_cases() {
        // round-robin values over balanced classes: independent
        let d = data(
            &[(&["u"], "a"), (&["v"], "a"), (&["u"], "b"), (&["v"], "b")],
            &["rr"],
        );
        assert_eq!(mutual_information_ca(&d, 0), 0.0);

        let same = data(&[(&["a"], "a"), (&["b"], "b"), (&["b"], "b")], &["s"]);
        assert_abs_diff_eq!(
            mutual_information_ca(&same, 0),
            class_entropy(&same),
            epsilon = 1e-12
        );

        // joint {0.4, 0.1, 0.1, 0.4}
        let mut rows: Vec<(&[&str], &str)> = Vec::new();
        rows.extend(std::iter::repeat_n((&["u"][..], "a"), 4));
        rows.push((&["u"][..], "b"));
        rows.push((&["v"][..], "a"));
        rows.extend(std::iter::repeat_n((&["v"][..], "b"), 4));
        let d = data(&rows, &["x"]);
        let cells = [0.4, 0.1, 0.1, 0.4];
        let brute: f64 = cells.iter().map(|&p: &f64| p * (p / 0.25).log2()).sum();
        assert_abs_diff_eq!(mutual_information_ca(&d, 0), brute, epsilon = 1e-12);
        assert_abs_diff_eq!(brute, 0.2781, epsilon = 5e-5);
    }

    #[test]
    fn mi_aa_cases() {
        let d = data(
            &[
                (&["u", "u", "p"], "a"),
                (&["v", "v", "p"], "a"),
                (&["u", "u", "q"], "b"),
                (&["v", "v", "q"], "b"),
                (&["w", "w", "p"], "b"),
            ],
            &["x", "dup", "other"],
        );
        assert_abs_diff_eq!(
            mutual_information_aa(&d, 0, 1),
            split_information(&d, 0),
            epsilon = 1e-12
        );
        assert_eq!(
            mutual_information_aa(&d, 0, 2),
            mutual_information_aa(&d, 2, 0)
        );
        let indep = data(
            &[
                (&["u", "p"], "a"),
                (&["u", "q"], "a"),
                (&["v", "p"], "b"),
                (&["v", "q"], "b"),
            ],
            &["x", "y"],
        );
        assert_eq!(mutual_information_aa(&indep, 0, 1), 0.0);
    }

    #[test]
    fn pearson_cases() {
        assert_eq!(
            abs_pearson(&[0.0, 1.0, 2.0, 3.0], &[3.0, 2.0, 1.0, 0.0]),
            1.0
        );
        assert_eq!(abs_pearson(&[1.0, 1.0, 1.0], &[0.0, 1.0, 2.0]), 0.0);
        let d = data(
            &[(&["0", "k"], "a"), (&["1", "k"], "a"), (&["2", "k"], "b")],
            &["x", "const"],
        );
        assert_eq!(pearson_aa(&d, 0, 0), 1.0);
        assert_eq!(pearson_aa(&d, 0, 1), 0.0);
    }

    #[test]
    fn kl_weight_cases() {
        let indep = data(
            &[(&["u"], "a"), (&["v"], "a"), (&["u"], "b"), (&["v"], "b")],
            &["rr"],
        );
        assert_eq!(kl_weight(&indep, 0), 0.0);
        let same = data(
            &[(&["a"], "a"), (&["a"], "a"), (&["b"], "b"), (&["b"], "b")],
            &["s"],
        );
        // KL part: each value's posterior is a point mass, KL = log2(1/0.5) = 1
        // entropy part: two equiprobable values, 1 bit
        assert_abs_diff_eq!(kl_weight(&same, 0), 1.0, epsilon = 1e-15);
        let constant = data(&[(&["k"], "a"), (&["k"], "b")], &["c"]);
        assert_eq!(kl_weight(&constant, 0), 0.0);
    }

    #[test]
    fn normalization_cases() {
        assert_eq!(normalize_values(&[2.0, 4.0, 6.0]), vec![0.0, 0.5, 1.0]);
        assert_eq!(normalize_values(&[5.0, 5.0, 5.0]), vec![0.0; 3]);
        assert_eq!(normalize_values(&[3.0]), vec![0.0]);
    }

    #[test]
    fn redundancy_average() {
        // column j = 0 holds {0.2, 0.8} from the other two attributes
        let m = PairMatrix {
            index_name: "pearson".into(),
            n: 3,
            values: vec![0.0, 0.2, 0.8, 0.2, 0.0, 0.5, 0.8, 0.5, 0.0],
        };
        assert_abs_diff_eq!(avg_redundancy(&m, 0), 0.5, epsilon = 1e-15);
        let zeros = PairMatrix {
            index_name: "pearson".into(),
            n: 3,
            values: vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
        };
        assert_eq!(avg_redundancy(&zeros, 1), 0.0);
        let single = PairMatrix {
            index_name: "pearson".into(),
            n: 1,
            values: vec![1.0],
        };
        assert_eq!(avg_redundancy(&single, 0), 0.0);
    }

    #[test]
    fn normalized_matrix_uses_one_global_range() {
        let m = PairMatrix {
            index_name: "mutual_info".into(),
            n: 3,
            values: vec![9.0, 1.0, 3.0, 1.0, 9.0, 2.0, 3.0, 2.0, 9.0],
        };
        let n = m.normalized();
        assert_eq!(n.get(0, 1), 0.0);
        assert_eq!(n.get(0, 2), 1.0);
        assert_eq!(n.get(1, 2), 0.5);
        assert_eq!(n.get(2, 1), 0.5);
        assert_eq!(n.get(1, 1), 0.0);
    }

    #[test]
    fn index_names_parse() {
        for ca in CaIndex::ALL {
            assert_eq!(ca.name().parse::<CaIndex>().unwrap(), ca);
        }
        for aa in AaIndex::ALL {
            assert_eq!(aa.name().parse::<AaIndex>().unwrap(), aa);
        }
        assert!("entropy".parse::<CaIndex>().is_err());
        assert!("info_gain".parse::<AaIndex>().is_err());
    }
}

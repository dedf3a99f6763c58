use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::encoded::{Attribute, Dataset};
use super::raw::{Cell, ColumnKind, RawDataset};
use crate::error::{Error, Result};

pub const DEFAULT_SIGNIFICANCE: f64 = 0.05;

/// Guard for zero expected counts in the chi-square statistic.
const EXPECTED_FLOOR: f64 = 1e-10;

/// Ascending cut points of one numeric attribute. Bin `i` is the half-open
/// range `[cuts[i-1], cuts[i])`, open-ended at both extremes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeCuts {
    pub cuts: Vec<f64>,
    pub bins: usize,
}

impl AttributeCuts {
    pub fn new(cuts: Vec<f64>) -> Self {
        let bins = cuts.len() + 1;
        Self { cuts, bins }
    }

    /// Values equal to a cut point fall into the upper bin.
    pub fn bin_of(&self, value: f64) -> usize {
        self.cuts.partition_point(|&c| c <= value)
    }

    pub fn bin_labels(&self) -> Vec<String> {
        (0..=self.cuts.len())
            .map(|i| {
                let lo = if i == 0 {
                    "(-inf".to_string()
                } else {
                    format!("[{}", self.cuts[i - 1])
                };
                let hi = self
                    .cuts
                    .get(i)
                    .map_or("inf".to_string(), |c| c.to_string());
                format!("{lo},{hi})")
            })
            .collect()
    }

    fn validate(&self, name: &str) -> Result<()> {
        let increasing = self.cuts.windows(2).all(|w| w[0] < w[1]);
        if !increasing
            || self.bins != self.cuts.len() + 1
            || self.cuts.iter().any(|c| !c.is_finite())
        {
            return Err(Error::OutOfRange(format!(
                "malformed cut points for `{name}`"
            )));
        }
        Ok(())
    }
}

/// Cut points per numeric attribute, keyed by column name.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DiscretizationMap(IndexMap<String, AttributeCuts>);

impl DiscretizationMap {
    pub fn insert(&mut self, name: impl Into<String>, cuts: AttributeCuts) {
        self.0.insert(name.into(), cuts);
    }

    pub fn get(&self, name: &str) -> Option<&AttributeCuts> {
        self.0.get(name)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &AttributeCuts)> {
        self.0.iter()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let map: Self = serde_json::from_str(text)?;
        for (name, cuts) in map.iter() {
            cuts.validate(name)?;
        }
        Ok(map)
    }
}

#[derive(Debug, Clone)]
struct Interval {
    lo: f64,
    hi: f64,
    counts: Vec<u64>,
}

fn chi_square(a: &[u64], b: &[u64]) -> f64 {
    let ra: u64 = a.iter().sum();
    let rb: u64 = b.iter().sum();
    let total = (ra + rb) as f64;
    let mut chi = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        let col = (x + y) as f64;
        for (obs, row) in [(x, ra), (y, rb)] {
            let expected = (row as f64 * col / total).max(EXPECTED_FLOOR);
            let d = obs as f64 - expected;
            chi += d * d / expected;
        }
    }
    chi
}

/// Heap key: lowest statistic first, leftmost pair on ties.
#[derive(Debug, Clone, Copy, PartialEq)]
struct PairKey(f64, usize);

impl Eq for PairKey {}

impl PartialOrd for PairKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PairKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

/// Outcome of ChiMerge on a single attribute.
#[derive(Debug, Clone, PartialEq)]
pub struct ChiMergeOutcome {
    pub cuts: Vec<f64>,
    /// Merges performed although the pair's statistic exceeded the
    /// significance threshold, to reach the target bin count.
    pub forced_merges: usize,
}

/// Bottom-up ChiMerge: start from one interval per distinct value and merge
/// the adjacent pair with the lowest chi-square statistic until
/// `target_bins` intervals remain. Cut points sit midway between the
/// neighbouring intervals' extreme values.
pub fn chimerge_cuts(
    values: &[f64],
    labels: &[usize],
    n_classes: usize,
    target_bins: usize,
    threshold: f64,
) -> ChiMergeOutcome {
    let mut by_value: BTreeMap<u64, (f64, Vec<u64>)> = BTreeMap::new();
    for (&v, &c) in values.iter().zip(labels) {
        // total-order key so -0.0 and 0.0 stay distinct but sorted
        let key = ordered_bits(v);
        let entry = by_value
            .entry(key)
            .or_insert_with(|| (v, vec![0; n_classes]));
        entry.1[c] += 1;
    }
    let mut intervals: Vec<Interval> = by_value
        .into_values()
        .map(|(v, counts)| Interval {
            lo: v,
            hi: v,
            counts,
        })
        .collect();
    let target = target_bins.max(1);
    let mut forced_merges = 0;

    if intervals.len() > target {
        let n = intervals.len();
        let mut next: Vec<Option<usize>> = (0..n).map(|i| (i + 1 < n).then_some(i + 1)).collect();
        let mut prev: Vec<Option<usize>> = (0..n).map(|i| i.checked_sub(1)).collect();
        let mut stat = vec![f64::NAN; n];
        let mut queue = BTreeSet::new();
        for i in 0..n - 1 {
            stat[i] = chi_square(&intervals[i].counts, &intervals[i + 1].counts);
            queue.insert(PairKey(stat[i], i));
        }
        let mut alive = n;
        while alive > target {
            let PairKey(chi, left) = queue.pop_first().expect("pairs remain while intervals > 1");
            if chi > threshold {
                forced_merges += 1;
            }
            let right = next[left].expect("queued pairs have a right neighbour");
            if let Some(after) = next[right] {
                queue.remove(&PairKey(stat[right], right));
                prev[after] = Some(left);
            }
            let absorbed = std::mem::take(&mut intervals[right].counts);
            for (a, b) in intervals[left].counts.iter_mut().zip(absorbed) {
                *a += b;
            }
            intervals[left].hi = intervals[right].hi;
            next[left] = next[right];
            alive -= 1;

            if let Some(after) = next[left] {
                stat[left] = chi_square(&intervals[left].counts, &intervals[after].counts);
                queue.insert(PairKey(stat[left], left));
            }
            if let Some(before) = prev[left] {
                queue.remove(&PairKey(stat[before], before));
                stat[before] = chi_square(&intervals[before].counts, &intervals[left].counts);
                queue.insert(PairKey(stat[before], before));
            }
        }
        let mut kept = Vec::with_capacity(alive);
        let mut cursor = Some(0);
        while let Some(i) = cursor {
            kept.push(intervals[i].clone());
            cursor = next[i];
        }
        intervals = kept;
    }

    let cuts = intervals
        .windows(2)
        .map(|w| w[0].hi + (w[1].lo - w[0].hi) / 2.0)
        .collect();
    ChiMergeOutcome {
        cuts,
        forced_merges,
    }
}

fn ordered_bits(v: f64) -> u64 {
    let bits = v.to_bits();
    if bits >> 63 == 1 {
        !bits
    } else {
        bits | (1 << 63)
    }
}

fn chi_threshold(significance: f64, n_classes: usize) -> Result<f64> {
    if !(significance > 0.0 && significance < 1.0) {
        return Err(Error::OutOfRange(format!(
            "significance {significance} not in (0,1)"
        )));
    }
    let dof = (n_classes.max(2) - 1) as f64;
    let dist = ChiSquared::new(dof).map_err(|e| Error::OutOfRange(e.to_string()))?;
    Ok(dist.inverse_cdf(1.0 - significance))
}

/// Discretizes every numeric attribute into as many bins as there are class
/// labels (fewer when the attribute has fewer distinct values).
/// Categorical attributes pass through unchanged.
pub fn chimerge_discretize(
    raw: &RawDataset,
    significance: f64,
) -> Result<(Dataset, DiscretizationMap)> {
    let classes = raw.class_labels();
    let threshold = chi_threshold(significance, classes.len())?;
    let labels: Vec<usize> = (0..raw.n_rows())
        .map(|i| {
            classes
                .binary_search_by(|c| c.as_str().cmp(raw.label(i)))
                .unwrap()
        })
        .collect();
    let mut map = DiscretizationMap::default();
    for j in raw.attribute_columns() {
        let col = &raw.columns()[j];
        if col.kind != ColumnKind::Numeric {
            continue;
        }
        let values = numeric_column(raw, j)?;
        let outcome = chimerge_cuts(&values, &labels, classes.len(), classes.len(), threshold);
        if outcome.forced_merges > 0 {
            log::debug!(
                "`{}`: {} merges above the chi-square threshold {threshold:.4}",
                col.name,
                outcome.forced_merges
            );
        }
        map.insert(col.name.clone(), AttributeCuts::new(outcome.cuts));
    }
    let data = apply_discretization(raw, &map)?;
    Ok((data, map))
}

fn numeric_column(raw: &RawDataset, j: usize) -> Result<Vec<f64>> {
    raw.rows()
        .iter()
        .map(|r| match r[j] {
            Cell::Number(v) => Ok(v),
            _ => Err(Error::UnexpectedMissing(raw.columns()[j].name.clone())),
        })
        .collect()
}

/// Maps numeric values to bins with `map`; categorical attributes get a
/// sorted alphabet of their observed symbols.
pub fn apply_discretization(raw: &RawDataset, map: &DiscretizationMap) -> Result<Dataset> {
    encode(raw, map, None)
}

/// Like [`apply_discretization`], but codes values and labels against the
/// alphabets of `schema` (typically the training set). Symbols the schema
/// has never seen are appended after its own.
pub fn apply_discretization_like(
    raw: &RawDataset,
    map: &DiscretizationMap,
    schema: &Dataset,
) -> Result<Dataset> {
    encode(raw, map, Some(schema))
}

fn encode(raw: &RawDataset, map: &DiscretizationMap, schema: Option<&Dataset>) -> Result<Dataset> {
    let attr_cols: Vec<usize> = raw.attribute_columns().collect();
    if let Some(s) = schema {
        if s.n_attributes() != attr_cols.len() {
            return Err(Error::ArityMismatch {
                got: attr_cols.len(),
                expected: s.n_attributes(),
            });
        }
    }
    let mut attributes = Vec::with_capacity(attr_cols.len());
    let mut columns: Vec<Vec<usize>> = Vec::with_capacity(attr_cols.len());
    for (pos, &j) in attr_cols.iter().enumerate() {
        let col = &raw.columns()[j];
        let (alphabet, codes) = match col.kind {
            ColumnKind::Numeric => {
                let cuts = map
                    .get(&col.name)
                    .ok_or_else(|| Error::UnmappedAttribute(col.name.clone()))?;
                cuts.validate(&col.name)?;
                let codes = numeric_column(raw, j)?
                    .into_iter()
                    .map(|v| cuts.bin_of(v))
                    .collect();
                (cuts.bin_labels(), codes)
            }
            ColumnKind::Categorical => {
                let mut symbols = Vec::with_capacity(raw.n_rows());
                for r in raw.rows() {
                    match &r[j] {
                        Cell::Symbol(s) => symbols.push(s.as_str()),
                        _ => return Err(Error::UnexpectedMissing(col.name.clone())),
                    }
                }
                let mut alphabet: Vec<String> = match schema {
                    Some(s) => s.attribute(pos).values.clone(),
                    None => symbols
                        .iter()
                        .copied()
                        .collect::<BTreeSet<_>>()
                        .into_iter()
                        .map(str::to_string)
                        .collect(),
                };
                let codes = symbols.iter().map(|s| code_of(&mut alphabet, s)).collect();
                (alphabet, codes)
            }
        };
        if let Some(s) = schema {
            if s.attribute(pos).name != col.name {
                return Err(Error::UnmappedAttribute(col.name.clone()));
            }
        }
        attributes.push(Attribute {
            name: col.name.clone(),
            values: alphabet,
        });
        columns.push(codes);
    }
    let mut classes = match schema {
        Some(s) => s.classes().to_vec(),
        None => raw.class_labels(),
    };
    let labels = (0..raw.n_rows())
        .map(|i| code_of(&mut classes, raw.label(i)))
        .collect();
    let instances = (0..raw.n_rows())
        .map(|i| columns.iter().map(|c| c[i]).collect())
        .collect();
    Dataset::new(attributes, raw.class_name(), classes, instances, labels)
}

fn code_of(alphabet: &mut Vec<String>, symbol: &str) -> usize {
    match alphabet.iter().position(|s| s == symbol) {
        Some(i) => i,
        None => {
            alphabet.push(symbol.to_string());
            alphabet.len() - 1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::raw::{ClassColumn, CsvOptions};

    fn raw(text: &str) -> RawDataset {
        RawDataset::from_reader(text.as_bytes(), &ClassColumn::Last, &CsvOptions::default())
            .unwrap()
    }

    /// Brute force over every single cut between sorted distinct values:
    /// the cut with the fewest misclassified rows under majority labelling.
    fn purest_single_cut(values: &[f64], labels: &[usize]) -> f64 {
        let mut distinct: Vec<f64> = values.to_vec();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        let mut best = (usize::MAX, f64::NAN);
        for w in distinct.windows(2) {
            let cut = (w[0] + w[1]) / 2.0;
            let mut errors = 0;
            for side in [true, false] {
                let mut counts = [0usize; 2];
                for (&v, &c) in values.iter().zip(labels) {
                    if (v < cut) == side {
                        counts[c] += 1;
                    }
                }
                errors += counts.iter().sum::<usize>() - counts.iter().max().unwrap();
            }
            if errors < best.0 {
                best = (errors, cut);
            }
        }
        best.1
    }

    #[test]
    fn four_values_two_classes_single_cut() {
        let values = [1.0, 2.0, 3.0, 4.0];
        let labels = [0, 0, 1, 1];
        let expected = purest_single_cut(&values, &labels);
        assert_eq!(expected, 2.5);
        let out = chimerge_cuts(&values, &labels, 2, 2, 3.84);
        assert_eq!(out.cuts, vec![expected]);

        let (data, map) = chimerge_discretize(&raw("x,label\n1,a\n2,a\n3,b\n4,b\n"), 0.05).unwrap();
        assert_eq!(map.get("x").unwrap().cuts, vec![2.5]);
        assert_eq!(data.column(0).collect::<Vec<_>>(), vec![0, 0, 1, 1]);
    }

    #[test]
    fn categorical_passes_through() {
        let r = raw("color,label\nred,a\nblue,b\nred,a\n");
        let (data, map) = chimerge_discretize(&r, 0.05).unwrap();
        assert!(map.is_empty());
        assert_eq!(data.attribute(0).values, vec!["blue", "red"]);
    }

    #[test]
    fn constant_column_is_one_bin() {
        let r = raw("x,label\n5,a\n5,b\n5,c\n5,a\n");
        let (data, map) = chimerge_discretize(&r, 0.05).unwrap();
        let cuts = map.get("x").unwrap();
        assert!(cuts.cuts.is_empty());
        assert_eq!(cuts.bins, 1);
        assert_eq!(data.attribute(0).values.len(), 1);
    }

    #[test]
    fn fewer_distinct_values_than_classes() {
        let r = raw("x,label\n1,a\n2,b\n1,c\n2,c\n");
        let (_, map) = chimerge_discretize(&r, 0.05).unwrap();
        assert_eq!(map.get("x").unwrap().bins, 2);
    }

    #[test]
    fn bin_boundaries_are_half_open() {
        let c = AttributeCuts::new(vec![2.5]);
        assert_eq!(c.bin_of(1.0), 0);
        assert_eq!(c.bin_of(2.5), 1);
        let c = AttributeCuts::new(vec![2.5, 7.0]);
        assert_eq!(c.bin_of(100.0), 2);
        assert_eq!(c.bin_of(-1e9), 0);
        assert_eq!(c.bin_of(7.0), 2);
    }

    #[test]
    fn missing_map_entry_errors() {
        let r = raw("x,y,label\n1,2,a\n2,3,b\n");
        let mut map = DiscretizationMap::default();
        map.insert("x", AttributeCuts::new(vec![1.5]));
        assert!(
            matches!(apply_discretization(&r, &map), Err(Error::UnmappedAttribute(n)) if n == "y")
        );
    }

    #[test]
    fn map_json_shape() {
        let mut map = DiscretizationMap::default();
        map.insert("x", AttributeCuts::new(vec![2.5, 7.0]));
        let json: serde_json::Value = serde_json::from_str(&map.to_json().unwrap()).unwrap();
        assert_eq!(
            json,
            serde_json::json!({"x": {"cuts": [2.5, 7.0], "bins": 3}})
        );
        assert_eq!(
            DiscretizationMap::from_json(&map.to_json().unwrap()).unwrap(),
            map
        );
        assert!(DiscretizationMap::from_json(r#"{"x": {"cuts": [3.0, 1.0], "bins": 3}}"#).is_err());
    }

    #[test]
    fn pure_runs_merge_before_mixed_boundary() {
        // three well separated groups, K = 3
        let values = [1.0, 1.5, 2.0, 10.0, 10.5, 11.0, 20.0, 20.5, 21.0];
        let labels = [0, 0, 0, 1, 1, 1, 2, 2, 2];
        let out = chimerge_cuts(&values, &labels, 3, 3, 5.99);
        assert_eq!(out.cuts, vec![6.0, 15.5]);
    }

    #[test]
    fn missing_cells_are_rejected() {
        let r = raw("x,label\n1,a\n?,b\n");
        assert!(matches!(
            chimerge_discretize(&r, 0.05),
            Err(Error::UnexpectedMissing(_))
        ));
    }

    #[test]
    fn like_schema_keeps_training_codes() {
        let train = raw("x,c,label\n1,u,a\n2,v,a\n3,u,b\n4,v,b\n");
        let (schema, map) = chimerge_discretize(&train, 0.05).unwrap();
        let test = raw("x,c,label\n0,w,b\n9,v,a\n");
        let t = apply_discretization_like(&test, &map, &schema).unwrap();
        assert_eq!(t.classes(), schema.classes());
        assert_eq!(t.instances(), &[vec![0, 2], vec![1, 1]]);
        assert_eq!(t.attribute(1).values, vec!["u", "v", "w"]);
    }
}

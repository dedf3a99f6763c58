//! Repeated-split benchmarking, significance tests and summary tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Read;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::dataset::{split_raw, RawDataset, DEFAULT_SIGNIFICANCE, DEFAULT_TRAIN_FRACTION};
use crate::error::{Error, Result};
use crate::framework::{Preprocessor, WeightedNb};
use crate::weighting::SchemeSpec;

/// Placeholder for percentages over an empty bucket.
pub const UNDEFINED: &str = "n/a";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub dataset: String,
    pub algorithm: String,
    pub run_index: usize,
    pub seed: u64,
    pub accuracy: f64,
    pub beta_interval: Option<[f64; 2]>,
    pub beta: Option<f64>,
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub algorithms: Vec<SchemeSpec>,
    pub repeats: usize,
    pub master_seed: u64,
    pub train_fraction: f64,
    pub significance: f64,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            algorithms: Vec::new(),
            repeats: 30,
            master_seed: 0,
            train_fraction: DEFAULT_TRAIN_FRACTION,
            significance: DEFAULT_SIGNIFICANCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetFailure {
    pub dataset: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkOutput {
    pub records: Vec<RunRecord>,
    pub failures: Vec<DatasetFailure>,
}

/// Split seed shared by every algorithm in one run of one dataset.
pub fn run_seed(master_seed: u64, dataset: &str, run_index: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(master_seed.to_le_bytes());
    h.update((dataset.len() as u64).to_le_bytes());
    h.update(dataset.as_bytes());
    h.update((run_index as u64).to_le_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

fn run_once(
    name: &str,
    raw: &RawDataset,
    run_index: usize,
    config: &BenchmarkConfig,
) -> Result<Vec<RunRecord>> {
    let seed = run_seed(config.master_seed, name, run_index);
    let parts = split_raw(raw, config.train_fraction, seed)?;
    let (pre, train) = Preprocessor::fit(&parts.train, config.significance)?;
    let test = pre.transform(&parts.test)?;
    config
        .algorithms
        .iter()
        .map(|spec| {
            let start = Instant::now();
            let clf = WeightedNb::fit(&train, spec)?;
            let accuracy = clf.accuracy(&test)?;
            Ok(RunRecord {
                dataset: name.to_string(),
                algorithm: spec.name(),
                run_index,
                seed,
                accuracy,
                beta_interval: clf.qsf.as_ref().map(|q| [q.optimal.lo, q.optimal.hi]),
                beta: clf.beta,
                wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
            })
        })
        .collect()
}

/// Runs every algorithm on `repeats` seeded splits of each dataset.
/// Preprocessing is fitted on each training part only. A dataset whose
/// run fails is dropped whole and listed in `failures`.
pub fn run_benchmark(
    datasets: &[(String, RawDataset)],
    config: &BenchmarkConfig,
) -> Result<BenchmarkOutput> {
    if config.repeats == 0 {
        return Err(Error::OutOfRange("repeats must be at least 1".into()));
    }
    if config.algorithms.is_empty() {
        return Err(Error::InvalidScheme("no algorithms to benchmark".into()));
    }
    let tasks: Vec<(usize, usize)> = (0..datasets.len())
        .flat_map(|d| (0..config.repeats).map(move |r| (d, r)))
        .collect();
    let results: Vec<Result<Vec<RunRecord>>> = tasks
        .par_iter()
        .map(|&(d, r)| run_once(&datasets[d].0, &datasets[d].1, r, config))
        .collect();

    let mut per_dataset: Vec<Result<Vec<RunRecord>>> =
        (0..datasets.len()).map(|_| Ok(Vec::new())).collect();
    for (&(d, _), result) in tasks.iter().zip(results) {
        match (&mut per_dataset[d], result) {
            (Ok(acc), Ok(records)) => acc.extend(records),
            (slot @ Ok(_), Err(e)) => *slot = Err(e),
            (Err(_), _) => {}
        }
    }
    let mut out = BenchmarkOutput {
        records: Vec::new(),
        failures: Vec::new(),
    };
    for ((name, _), result) in datasets.iter().zip(per_dataset) {
        match result {
            Ok(records) => out.records.extend(records),
            Err(e) => {
                log::warn!("dataset `{name}` skipped: {e}");
                out.failures.push(DatasetFailure {
                    dataset: name.clone(),
                    error: e.to_string(),
                });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    A,
    B,
    Neither,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    pub p_value: f64,
    pub significant: bool,
    pub direction: Direction,
}

/// Two-tailed paired t-test on per-run accuracies. With `corrected`, the
/// variance is inflated by `1/R + test/train` for overlapping resamples.
pub fn paired_t_test(
    a: &[f64],
    b: &[f64],
    alpha: f64,
    train_fraction: f64,
    corrected: bool,
) -> Result<TTest> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(format!(
            "{} vs {} accuracies",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::OutOfRange(
            "t-test needs at least 2 paired values".into(),
        ));
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::OutOfRange(format!(
            "train fraction {train_fraction} not in (0,1)"
        )));
    }
    let r = a.len() as f64;
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = d.iter().sum::<f64>() / r;
    let var = d.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (r - 1.0);
    let direction = if mean > 0.0 {
        Direction::A
    } else if mean < 0.0 {
        Direction::B
    } else {
        Direction::Neither
    };
    if var == 0.0 {
        let significant = mean != 0.0;
        return Ok(TTest {
            t: if significant {
                mean.signum() * f64::INFINITY
            } else {
                0.0
            },
            p_value: if significant { 0.0 } else { 1.0 },
            significant,
            direction,
        });
    }
    let inflation = if corrected {
        1.0 / r + (1.0 - train_fraction) / train_fraction
    } else {
        1.0 / r
    };
    let t = mean / (var * inflation).sqrt();
    let dist = StudentsT::new(0.0, 1.0, r - 1.0).map_err(|e| Error::OutOfRange(e.to_string()))?;
    let p_value = 2.0 * (1.0 - dist.cdf(t.abs()));
    let significant = p_value < alpha;
    Ok(TTest {
        t,
        p_value,
        significant,
        direction: if significant {
            direction
        } else {
            Direction::Neither
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wilcoxon {
    pub n: usize,
    /// Rank sum of pairs where `a` is larger.
    pub r_plus: f64,
    pub r_minus: f64,
    pub critical: Option<u64>,
    pub significant: bool,
}

/// Differences are compared after rounding to this many units per 1.0, so
/// values printed to a few decimals tie exactly.
const DIFF_QUANTUM: f64 = 1e9;

/// Signed-rank sums with average ranks for tied magnitudes; zero differences
/// are ranked and their ranks split evenly between both sums.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64], critical: Option<u64>) -> Result<Wilcoxon> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(format!(
            "{} vs {} values",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let diffs: Vec<i64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| ((x - y) * DIFF_QUANTUM).round() as i64)
        .collect();
    let mut order: Vec<usize> = (0..diffs.len()).collect();
    order.sort_by_key(|&i| diffs[i].unsigned_abs());
    let mut ranks = vec![0.0; diffs.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len()
            && diffs[order[end + 1]].unsigned_abs() == diffs[order[start]].unsigned_abs()
        {
            end += 1;
        }
        let avg = (start + end) as f64 / 2.0 + 1.0;
        for &i in &order[start..=end] {
            ranks[i] = avg;
        }
        start = end + 1;
    }
    let (mut r_plus, mut r_minus) = (0.0, 0.0);
    for (d, rank) in diffs.iter().zip(&ranks) {
        match d.signum() {
            1 => r_plus += rank,
            -1 => r_minus += rank,
            _ => {
                r_plus += rank / 2.0;
                r_minus += rank / 2.0;
            }
        }
    }
    let significant = critical.is_some_and(|c| r_plus.min(r_minus) <= c as f64);
    Ok(Wilcoxon {
        n: a.len(),
        r_plus,
        r_minus,
        critical,
        significant,
    })
}

/// Two-tailed critical values at α = 0.05 for N = 5..=50; `None` for N = 5.
const CRITICAL_005: [Option<u64>; 46] = {
    const V: [u64; 45] = [
        0, 2, 3, 5, 8, 10, 13, 17, 21, 25, 29, 34, 40, 46, 52, 58, 65, 73, 81, 89, 98, 107, 116,
        126, 137, 147, 159, 170, 182, 195, 208, 221, 235, 249, 264, 279, 294, 310, 327, 343, 361,
        378, 396, 415, 434,
    ];
    let mut out = [None; 46];
    let mut i = 0;
    while i < 45 {
        out[i + 1] = Some(V[i]);
        i += 1;
    }
    out
};

/// Exact null distribution of the signed-rank statistic: the largest `T`
/// with `P(W ≤ T) ≤ α/2`.
pub fn exact_critical_value(n: usize, alpha: f64) -> Option<u64> {
    let max = n * (n + 1) / 2;
    let mut ways = vec![0f64; max + 1];
    ways[0] = 1.0;
    for k in 1..=n {
        for s in (k..=max).rev() {
            ways[s] += ways[s - k];
        }
    }
    let total = 2f64.powi(n as i32);
    let mut cumulative = 0.0;
    let mut best = None;
    for (t, w) in ways.iter().enumerate() {
        cumulative += w;
        if cumulative / total <= alpha / 2.0 {
            best = Some(t as u64);
        } else {
            break;
        }
    }
    best
}

/// Built-in table at α = 0.05 for N ≤ 50, the exact distribution for other
/// α, and the normal approximation above 50.
pub fn critical_value(n: usize, alpha: f64) -> Option<u64> {
    if n > 50 {
        let nf = n as f64;
        let mu = nf * (nf + 1.0) / 4.0;
        let sigma = (nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0).sqrt();
        let z = Normal::standard().inverse_cdf(1.0 - alpha / 2.0);
        let t = (mu - z * sigma).floor();
        return (t >= 0.0).then_some(t as u64);
    }
    if alpha == 0.05 {
        return n.checked_sub(5).and_then(|i| CRITICAL_005[i]);
    }
    exact_critical_value(n, alpha)
}

/// Mean accuracies, one row per dataset and one column per algorithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyTable {
    pub algorithms: Vec<String>,
    pub datasets: Vec<String>,
    pub values: Vec<Vec<Option<f64>>>,
}

impl AccuracyTable {
    /// CSV with a `dataset` column followed by one column per algorithm.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        if headers.len() < 2 {
            return Err(Error::NoAttributes);
        }
        let mut table = Self {
            algorithms: headers[1..].to_vec(),
            datasets: Vec::new(),
            values: Vec::new(),
        };
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != headers.len() {
                return Err(Error::RaggedRow {
                    row: i + 2,
                    got: rec.len(),
                    expected: headers.len(),
                });
            }
            table.datasets.push(rec[0].to_string());
            let row = rec
                .iter()
                .skip(1)
                .map(|cell| {
                    if cell.is_empty() {
                        Ok(None)
                    } else {
                        cell.parse::<f64>()
                            .map(Some)
                            .map_err(|_| Error::OutOfRange(format!("`{cell}` is not an accuracy")))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            table.values.push(row);
        }
        if table.datasets.is_empty() {
            return Err(Error::EmptyDataset);
        }
        Ok(table)
    }

    /// Per-dataset means of run records, in first-seen order.
    pub fn from_records(records: &[RunRecord]) -> Self {
        let mut algorithms: Vec<String> = Vec::new();
        let mut datasets: Vec<String> = Vec::new();
        let mut sums: BTreeMap<(usize, usize), (f64, usize)> = BTreeMap::new();
        for r in records {
            let a = index_or_push(&mut algorithms, &r.algorithm);
            let d = index_or_push(&mut datasets, &r.dataset);
            let e = sums.entry((d, a)).or_insert((0.0, 0));
            e.0 += r.accuracy;
            e.1 += 1;
        }
        let values = (0..datasets.len())
            .map(|d| {
                (0..algorithms.len())
                    .map(|a| sums.get(&(d, a)).map(|(s, n)| s / *n as f64))
                    .collect()
            })
            .collect();
        Self {
            algorithms,
            datasets,
            values,
        }
    }

    pub fn column_index(&self, algorithm: &str) -> Result<usize> {
        self.algorithms
            .iter()
            .position(|a| a.eq_ignore_ascii_case(algorithm))
            .ok_or_else(|| Error::InvalidScheme(format!("no column `{algorithm}`")))
    }

    pub fn column(&self, algorithm: &str) -> Result<Vec<Option<f64>>> {
        let j = self.column_index(algorithm)?;
        Ok(self.values.iter().map(|r| r[j]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("dataset,{}\n", self.algorithms.join(","));
        for (name, row) in self.datasets.iter().zip(&self.values) {
            let cells: Vec<String> = row
                .iter()
                .map(|v| v.map_or(String::new(), |x| format!("{x:.4}")))
                .collect();
            let _ = writeln!(out, "{name},{}", cells.join(","));
        }
        out
    }
}

fn index_or_push(list: &mut Vec<String>, item: &str) -> usize {
    match list.iter().position(|x| x == item) {
        Some(i) => i,
        None => {
            list.push(item.to_string());
            list.len() - 1
        }
    }
}

/// Per-run accuracies by (dataset, algorithm), runs sorted by index.
pub fn run_matrix(records: &[RunRecord]) -> BTreeMap<(String, String), Vec<f64>> {
    let mut sorted: Vec<&RunRecord> = records.iter().collect();
    sorted.sort_by(|a, b| {
        (a.dataset.as_str(), a.algorithm.as_str(), a.run_index).cmp(&(
            b.dataset.as_str(),
            b.algorithm.as_str(),
            b.run_index,
        ))
    });
    let mut out: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
    for r in sorted {
        out.entry((r.dataset.clone(), r.algorithm.clone()))
            .or_default()
            .push(r.accuracy);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryOptions {
    /// Algorithms compared against each other; all table columns when empty.
    pub compare: Vec<String>,
    /// Algorithm that the W/L counts are relative to.
    pub reference: String,
    pub alpha: f64,
    pub train_fraction: f64,
    pub corrected_t_test: bool,
    /// Overrides the tabulated Wilcoxon critical value.
    pub critical: Option<u64>,
}

impl Default for SummaryOptions {
    fn default() -> Self {
        Self {
            compare: Vec::new(),
            reference: "ATFNB".into(),
            alpha: 0.05,
            train_fraction: DEFAULT_TRAIN_FRACTION,
            corrected_t_test: true,
            critical: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gwl {
    pub algorithm: String,
    pub best: usize,
    /// `None` for the reference itself.
    pub wins: Option<usize>,
    pub losses: Option<usize>,
}

/// Count of datasets where the column algorithm beats the row algorithm,
/// and how many of those wins are significant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WinCell {
    pub wins: usize,
    pub significant: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub algorithms: Vec<String>,
    pub datasets: Vec<String>,
    pub excluded: Vec<String>,
    /// `means[d][a]` over `algorithms` (all table columns).
    pub means: Vec<Vec<f64>>,
    pub averages: Vec<f64>,
    pub compared: Vec<String>,
    pub reference: String,
    pub gwl: Vec<Gwl>,
    /// `wilcoxon[i][j]`: test of compared `i` (as `a`) against `j`; `None` on the diagonal.
    pub wilcoxon: Vec<Vec<Option<Wilcoxon>>>,
    /// `t_test[row][col]`; only present when per-run accuracies were supplied.
    pub t_test: Option<Vec<Vec<Option<WinCell>>>>,
}

/// Builds the report from mean accuracies and, optionally, per-run
/// accuracies for the t-test matrix. Datasets with a missing cell among the
/// compared algorithms are excluded.
pub fn summarize(
    table: &AccuracyTable,
    runs: Option<&BTreeMap<(String, String), Vec<f64>>>,
    options: &SummaryOptions,
) -> Result<EvalReport> {
    let compared: Vec<String> = if options.compare.is_empty() {
        table.algorithms.clone()
    } else {
        options
            .compare
            .iter()
            .map(|c| table.column_index(c).map(|j| table.algorithms[j].clone()))
            .collect::<Result<_>>()?
    };
    let cols: Vec<usize> = compared
        .iter()
        .map(|c| table.column_index(c))
        .collect::<Result<_>>()?;
    let reference = table.algorithms[table.column_index(&options.reference)?].clone();
    let ref_col = table.column_index(&reference)?;

    let mut datasets = Vec::new();
    let mut excluded = Vec::new();
    let mut means = Vec::new();
    for (name, row) in table.datasets.iter().zip(&table.values) {
        let needed = cols.iter().chain([&ref_col]);
        if needed.map(|&j| row[j]).any(|v| v.is_none()) {
            log::warn!("dataset `{name}` excluded: missing accuracy");
            excluded.push(name.clone());
            continue;
        }
        datasets.push(name.clone());
        means.push(
            row.iter()
                .map(|v| v.unwrap_or(f64::NAN))
                .collect::<Vec<f64>>(),
        );
    }
    if datasets.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let averages = (0..table.algorithms.len())
        .map(|j| means.iter().map(|r| r[j]).sum::<f64>() / means.len() as f64)
        .collect();

    let gwl = cols
        .iter()
        .map(|&j| {
            let best = means
                .iter()
                .filter(|r| cols.iter().all(|&k| k == j || r[j] > r[k]))
                .count();
            let (wins, losses) = if j == ref_col {
                (None, None)
            } else {
                (
                    Some(means.iter().filter(|r| r[j] > r[ref_col]).count()),
                    Some(means.iter().filter(|r| r[j] < r[ref_col]).count()),
                )
            };
            Gwl {
                algorithm: table.algorithms[j].clone(),
                best,
                wins,
                losses,
            }
        })
        .collect();

    let critical = options
        .critical
        .or_else(|| critical_value(datasets.len(), options.alpha));
    let wilcoxon = cols
        .iter()
        .map(|&i| {
            cols.iter()
                .map(|&j| {
                    if i == j {
                        return Ok(None);
                    }
                    let a: Vec<f64> = means.iter().map(|r| r[i]).collect();
                    let b: Vec<f64> = means.iter().map(|r| r[j]).collect();
                    wilcoxon_signed_rank(&a, &b, critical).map(Some)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let t_test = runs
        .map(|runs| {
            cols.iter()
                .map(|&row| {
                    cols.iter()
                        .map(|&col| {
                            if row == col {
                                return Ok(None);
                            }
                            let mut cell = WinCell {
                                wins: 0,
                                significant: 0,
                            };
                            for d in &datasets {
                                let get = |j: usize| {
                                    runs.get(&(d.clone(), table.algorithms[j].clone()))
                                        .ok_or_else(|| {
                                            Error::LengthMismatch(format!("no runs for `{d}`"))
                                        })
                                };
                                let (c, r) = (get(col)?, get(row)?);
                                let t = paired_t_test(
                                    c,
                                    r,
                                    options.alpha,
                                    options.train_fraction,
                                    options.corrected_t_test,
                                )?;
                                let (mc, mr) = (mean(c), mean(r));
                                if mc > mr {
                                    cell.wins += 1;
                                    if t.significant {
                                        cell.significant += 1;
                                    }
                                }
                            }
                            Ok(Some(cell))
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()
        })
        .transpose()?;

    Ok(EvalReport {
        algorithms: table.algorithms.clone(),
        datasets,
        excluded,
        means,
        averages,
        compared,
        reference,
        gwl,
        wilcoxon,
        t_test,
    })
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

impl EvalReport {
    pub fn average(&self, algorithm: &str) -> Option<f64> {
        let j = self
            .algorithms
            .iter()
            .position(|a| a.eq_ignore_ascii_case(algorithm))?;
        Some(self.averages[j])
    }

    pub fn wilcoxon_between(&self, a: &str, b: &str) -> Option<Wilcoxon> {
        let i = self
            .compared
            .iter()
            .position(|x| x.eq_ignore_ascii_case(a))?;
        let j = self
            .compared
            .iter()
            .position(|x| x.eq_ignore_ascii_case(b))?;
        self.wilcoxon[i][j]
    }

    pub fn gwl_of(&self, algorithm: &str) -> Option<&Gwl> {
        self.gwl
            .iter()
            .find(|g| g.algorithm.eq_ignore_ascii_case(algorithm))
    }

    /// Aligned plain-text rendering: means, G/W/L, Wilcoxon ranks and marks,
    /// and the t-test matrix when present.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let name_w = self
            .datasets
            .iter()
            .map(String::len)
            .max()
            .unwrap_or(7)
            .max(7);
        let col_w = self
            .algorithms
            .iter()
            .map(String::len)
            .max()
            .unwrap_or(6)
            .max(8);

        let _ = write!(out, "{:<name_w$}", "dataset");
        for a in &self.algorithms {
            let _ = write!(out, "  {a:>col_w$}");
        }
        out.push('\n');
        for (d, row) in self.datasets.iter().zip(&self.means) {
            let _ = write!(out, "{d:<name_w$}");
            for v in row {
                let _ = write!(out, "  {v:>col_w$.4}");
            }
            out.push('\n');
        }
        let _ = write!(out, "{:<name_w$}", "Average");
        for v in &self.averages {
            let _ = write!(out, "  {v:>col_w$.4}");
        }
        out.push('\n');
        let _ = write!(out, "{:<name_w$}", "G/W/L");
        for a in &self.algorithms {
            let cell = match self.gwl_of(a) {
                Some(g) => match (g.wins, g.losses) {
                    (Some(w), Some(l)) => format!("{}/{w}/{l}", g.best),
                    _ => format!("{}/-/-", g.best),
                },
                None => String::new(),
            };
            let _ = write!(out, "  {cell:>col_w$}");
        }
        out.push('\n');
        if !self.excluded.is_empty() {
            let _ = writeln!(out, "excluded: {}", self.excluded.join(", "));
        }

        let cw = self
            .compared
            .iter()
            .map(String::len)
            .max()
            .unwrap_or(6)
            .max(9);
        let header = |out: &mut String, title: &str| {
            let _ = writeln!(out, "\n{title}");
            let _ = write!(out, "{:<cw$}", "");
            for c in &self.compared {
                let _ = write!(out, "  {c:>cw$}");
            }
            out.push('\n');
        };

        header(&mut out, "Wilcoxon rank sums (row better than column)");
        for (i, r) in self.compared.iter().enumerate() {
            let _ = write!(out, "{r:<cw$}");
            for cell in &self.wilcoxon[i] {
                let text = cell.map_or("---".to_string(), |w| format_rank(w.r_plus));
                let _ = write!(out, "  {text:>cw$}");
            }
            out.push('\n');
        }
        let critical = self
            .wilcoxon
            .iter()
            .flatten()
            .flatten()
            .next()
            .and_then(|w| w.critical);
        header(
            &mut out,
            &format!(
                "Wilcoxon significance (o: row better, *: column better; critical {})",
                critical.map_or(UNDEFINED.to_string(), |c| c.to_string())
            ),
        );
        for (i, r) in self.compared.iter().enumerate() {
            let _ = write!(out, "{r:<cw$}");
            for cell in &self.wilcoxon[i] {
                let text = match cell {
                    None => "---",
                    Some(w) if w.significant && w.r_plus > w.r_minus => "o",
                    Some(w) if w.significant => "*",
                    Some(_) => "",
                };
                let _ = write!(out, "  {text:>cw$}");
            }
            out.push('\n');
        }
        if let Some(t) = &self.t_test {
            header(&mut out, "t-test wins(significant) of column over row");
            for (i, r) in self.compared.iter().enumerate() {
                let _ = write!(out, "{r:<cw$}");
                for cell in &t[i] {
                    let text = cell.map_or("---".to_string(), |c| {
                        format!("{}({})", c.wins, c.significant)
                    });
                    let _ = write!(out, "  {text:>cw$}");
                }
                out.push('\n');
            }
        }
        out
    }
}

fn format_rank(v: f64) -> String {
    if v.fract() == 0.0 {
        format!("{v:.0}")
    } else {
        format!("{v}")
    }
}

/// Size of one benchmark dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub instances: usize,
    pub attributes: usize,
    pub classes: usize,
}

/// Reads `dataset,instances,attributes,classes`; names are keyed lowercase.
pub fn load_meta<R: Read>(reader: R) -> Result<BTreeMap<String, DatasetMeta>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut out = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let num = |i: usize| -> Result<usize> {
            rec.get(i).and_then(|s| s.parse().ok()).ok_or_else(|| {
                Error::OutOfRange(format!(
                    "bad metadata row `{}`",
                    rec.iter().collect::<Vec<_>>().join(",")
                ))
            })
        };
        out.insert(
            rec.get(0).unwrap_or_default().to_ascii_lowercase(),
            DatasetMeta {
                instances: num(1)?,
                attributes: num(2)?,
                classes: num(3)?,
            },
        );
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bucket {
    pub label: String,
    pub n_datasets: usize,
    pub best: usize,
    /// Share of datasets in the bucket where the target is strictly best, in percent.
    pub percentage: Option<f64>,
}

impl Bucket {
    pub fn percentage_text(&self) -> String {
        self.percentage
            .map_or(UNDEFINED.to_string(), |p| format!("{p:.2}"))
    }
}

pub const INSTANCE_SPLIT: usize = 500;
pub const ATTRIBUTE_SPLIT: usize = 15;

/// Percentage of datasets where `target` is strictly best among `compared`,
/// within instance-count and attribute-count buckets and their crossings.
pub fn bucket_analysis(
    table: &AccuracyTable,
    meta: &BTreeMap<String, DatasetMeta>,
    target: &str,
    compared: &[String],
) -> Result<Vec<Bucket>> {
    let t = table.column_index(target)?;
    let cols: Vec<usize> = if compared.is_empty() {
        (0..table.algorithms.len()).collect()
    } else {
        compared
            .iter()
            .map(|c| table.column_index(c))
            .collect::<Result<_>>()?
    };
    let mut rows = Vec::new();
    for (name, vals) in table.datasets.iter().zip(&table.values) {
        let m = meta
            .get(&name.to_ascii_lowercase())
            .ok_or_else(|| Error::OutOfRange(format!("no metadata for `{name}`")))?;
        let Some(tv) = vals[t] else { continue };
        let best = cols
            .iter()
            .filter(|&&k| k != t)
            .all(|&k| vals[k].is_some_and(|v| tv > v));
        rows.push((
            m.instances < INSTANCE_SPLIT,
            m.attributes < ATTRIBUTE_SPLIT,
            best,
        ));
    }
    type Pred = fn(bool, bool) -> bool;
    let specs: [(&str, Pred); 8] = [
        ("instances<500", |i, _| i),
        ("instances>=500", |i, _| !i),
        ("attributes<15", |_, a| a),
        ("attributes>=15", |_, a| !a),
        ("instances<500&attributes<15", |i, a| i && a),
        ("instances<500&attributes>=15", |i, a| i && !a),
        ("instances>=500&attributes<15", |i, a| !i && a),
        ("instances>=500&attributes>=15", |i, a| !i && !a),
    ];
    Ok(specs
        .iter()
        .map(|(label, pred)| {
            let members: Vec<bool> = rows
                .iter()
                .filter(|(i, a, _)| pred(*i, *a))
                .map(|r| r.2)
                .collect();
            let best = members.iter().filter(|&&b| b).count();
            Bucket {
                label: label.to_string(),
                n_datasets: members.len(),
                best,
                percentage: (!members.is_empty())
                    .then(|| 100.0 * best as f64 / members.len() as f64),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn t_test_formula() {
        let a = [0.51, 0.52, 0.53];
        let b = [0.5, 0.5, 0.5];
        let t = paired_t_test(&a, &b, 0.05, 0.7, true).unwrap();
        let expected = 0.02 / (0.0001f64 * (1.0 / 3.0 + 0.3 / 0.7)).sqrt();
        assert_abs_diff_eq!(t.t, expected, epsilon = 1e-9);
        assert_abs_diff_eq!(t.t, 2.2913, epsilon = 5e-4);
        let same = paired_t_test(&a, &a, 0.05, 0.7, true).unwrap();
        assert_eq!((same.t, same.significant), (0.0, false));
        let shifted: Vec<f64> = b.iter().map(|x| x + 0.2).collect();
        let s = paired_t_test(&shifted, &b, 0.05, 0.7, true).unwrap();
        assert!(s.significant);
        assert_eq!(s.direction, Direction::A);
    }

    #[test]
    fn t_test_antisymmetry() {
        let a = [0.8, 0.82, 0.79, 0.85, 0.81];
        let b = [0.78, 0.8, 0.8, 0.8, 0.77];
        let ab = paired_t_test(&a, &b, 0.05, 0.7, true).unwrap();
        let ba = paired_t_test(&b, &a, 0.05, 0.7, true).unwrap();
        assert_eq!(ab.t, -ba.t);
        assert_eq!(ab.significant, ba.significant);
    }

    #[test]
    fn wilcoxon_small_cases() {
        let w = wilcoxon_signed_rank(&[1.0, 2.0, 3.0], &[0.0, 1.0, 2.0], None).unwrap();
        assert_eq!((w.r_plus, w.r_minus), (6.0, 0.0));
        let a = [0.3, 0.5, 0.9, 0.1];
        let w = wilcoxon_signed_rank(&a, &a, Some(0)).unwrap();
        assert_eq!((w.r_plus, w.r_minus), (5.0, 5.0));
        assert!(!w.significant);
    }

    #[test]
    fn critical_table_matches_exact_distribution() {
        for n in 5..=50 {
            assert_eq!(
                critical_value(n, 0.05),
                exact_critical_value(n, 0.05),
                "n = {n}"
            );
        }
        assert_eq!(critical_value(50, 0.05), Some(434));
        assert_eq!(critical_value(15, 0.05), Some(25));
        assert_eq!(critical_value(5, 0.05), None);
        assert!(critical_value(60, 0.05).unwrap() > 434);
    }

    #[test]
    fn normal_approximation_near_table_edge() {
        let approx = {
            let n = 50.0f64;
            let mu = n * (n + 1.0) / 4.0;
            let sigma = (n * (n + 1.0) * (2.0 * n + 1.0) / 24.0).sqrt();
            (mu - 1.959963984540054 * sigma).floor()
        };
        assert_eq!(approx, 434.0);
    }

    #[test]
    fn seeds_depend_on_every_input() {
        let s = run_seed(7, "iris", 0);
        assert_eq!(s, run_seed(7, "iris", 0));
        assert_ne!(s, run_seed(8, "iris", 0));
        assert_ne!(s, run_seed(7, "wine", 0));
        assert_ne!(s, run_seed(7, "iris", 1));
    }

    #[test]
    fn single_dataset_single_algorithm() {
        let table = AccuracyTable {
            algorithms: vec!["ATFNB".into()],
            datasets: vec!["d".into()],
            values: vec![vec![Some(0.9)]],
        };
        let r = summarize(&table, None, &SummaryOptions::default()).unwrap();
        assert_eq!(r.averages, vec![0.9]);
        assert_eq!(r.wilcoxon, vec![vec![None]]);
        assert_eq!(r.gwl[0].best, 1);
    }

    #[test]
    fn missing_cells_exclude_dataset() {
        let table =
            AccuracyTable::from_csv("dataset,ATFNB,NB\na,0.9,0.8\nb,,0.7\n".as_bytes()).unwrap();
        let r = summarize(&table, None, &SummaryOptions::default()).unwrap();
        assert_eq!(r.excluded, vec!["b"]);
        assert_eq!(r.datasets, vec!["a"]);
    }

    #[test]
    fn buckets_single_and_empty() {
        let table = AccuracyTable::from_csv("dataset,ATFNB,NB\nx,0.9,0.8\n".as_bytes()).unwrap();
        let meta =
            load_meta("dataset,instances,attributes,classes\nX,100,4,2\n".as_bytes()).unwrap();
        let b = bucket_analysis(&table, &meta, "ATFNB", &[]).unwrap();
        let small = b
            .iter()
            .find(|b| b.label == "instances<500&attributes<15")
            .unwrap();
        assert_eq!(small.percentage, Some(100.0));
        let empty = b
            .iter()
            .find(|b| b.label == "instances>=500&attributes>=15")
            .unwrap();
        assert_eq!(empty.percentage, None);
        assert_eq!(empty.percentage_text(), UNDEFINED);
    }

    #[test]
    fn records_to_table() {
        let rec = |d: &str, a: &str, r: usize, acc: f64| RunRecord {
            dataset: d.into(),
            algorithm: a.into(),
            run_index: r,
            seed: 0,
            accuracy: acc,
            beta_interval: None,
            beta: None,
            wall_time_ms: 0.0,
        };
        let records = vec![
            rec("d", "NB", 0, 0.5),
            rec("d", "NB", 1, 0.7),
            rec("d", "WNB", 0, 0.4),
        ];
        let t = AccuracyTable::from_records(&records);
        assert_eq!(t.algorithms, vec!["NB", "WNB"]);
        assert_abs_diff_eq!(t.values[0][0].unwrap(), 0.6, epsilon = 1e-15);
        assert_eq!(
            run_matrix(&records)[&("d".to_string(), "NB".to_string())],
            vec![0.5, 0.7]
        );
    }
}

//! Exact inference of the switching factor β, and the grid-search baseline.
//!
//! Under fusion weights every class score is affine in β:
//! `T(x,c) = β·K_c + M_c`. An instance is classified correctly exactly on an
//! interval of β, so the β maximizing training accuracy is found by sweeping
//! the interval endpoints.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::indexes::IndexVector;
use crate::nb::{FrequencyModel, TIE_TOLERANCE};
use crate::weighting::fusion_weights;

/// Slope and intercept of every class score of one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceCoeffs {
    pub k: Vec<f64>,
    pub m: Vec<f64>,
    pub label: usize,
}

impl InstanceCoeffs {
    pub fn score(&self, c: usize, beta: f64) -> f64 {
        beta * self.k[c] + self.m[c]
    }
}

/// A subinterval of `[0, 1]`, or the empty set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaInterval {
    pub lo: f64,
    pub hi: f64,
    pub empty: bool,
}

impl BetaInterval {
    pub fn full() -> Self {
        Self {
            lo: 0.0,
            hi: 1.0,
            empty: false,
        }
    }

    pub fn empty() -> Self {
        Self {
            lo: 0.0,
            hi: 0.0,
            empty: true,
        }
    }

    /// `[lo, hi]` clipped to `[0, 1]`; empty when nothing of positive length remains.
    pub fn new(lo: f64, hi: f64) -> Self {
        let (lo, hi) = (lo.max(0.0), hi.min(1.0));
        if lo < hi {
            Self {
                lo,
                hi,
                empty: false,
            }
        } else {
            Self::empty()
        }
    }

    pub fn width(&self) -> f64 {
        if self.empty {
            0.0
        } else {
            self.hi - self.lo
        }
    }

    pub fn midpoint(&self) -> f64 {
        self.lo + (self.hi - self.lo) / 2.0
    }

    pub fn contains_strictly(&self, beta: f64) -> bool {
        !self.empty && self.lo < beta && beta < self.hi
    }
}

/// One elementary subinterval of the endpoint sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub lo: f64,
    pub hi: f64,
    pub coverage: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QsfResult {
    pub optimal: BetaInterval,
    pub representative: f64,
    /// Intervals containing the optimal subinterval.
    pub coverage: usize,
    pub n_instances: usize,
    /// Set when every instance interval was empty.
    pub degenerate: bool,
    pub candidates: Vec<Candidate>,
}

/// `K_c = Σ_j (CA_j + AA_j)·ln P(x_j|c)` and `M_c = ln P(c) − Σ_j AA_j·ln P(x_j|c)`.
pub fn instance_coeffs(
    model: &FrequencyModel,
    ca: &IndexVector,
    aa: &IndexVector,
    x: &[usize],
    label: usize,
) -> Result<InstanceCoeffs> {
    let n = model.n_attributes();
    if x.len() != n {
        return Err(Error::ArityMismatch {
            got: x.len(),
            expected: n,
        });
    }
    if ca.len() != n || aa.len() != n {
        return Err(Error::LengthMismatch(format!(
            "index vectors of length {}/{} for {n} attributes",
            ca.len(),
            aa.len()
        )));
    }
    if label >= model.n_classes() {
        return Err(Error::UnknownClass(label));
    }
    let mut k = Vec::with_capacity(model.n_classes());
    let mut m = Vec::with_capacity(model.n_classes());
    for c in 0..model.n_classes() {
        let (mut kc, mut mc) = (0.0, model.log_prior(c));
        for (j, &a) in x.iter().enumerate() {
            let lc = model.log_conditional(j, a, c);
            kc += (ca.values[j] + aa.values[j]) * lc;
            mc -= aa.values[j] * lc;
        }
        k.push(kc);
        m.push(mc);
    }
    Ok(InstanceCoeffs { k, m, label })
}

/// The β range on which the instance's own label wins.
///
/// Each rival class `c` contributes `β·(K_l − K_c) > M_c − M_l`, shifted by
/// the prediction tie tolerance: an earlier rival must be beaten by more
/// than [`TIE_TOLERANCE`], a later one may come within it.
pub fn feasible_interval(coeffs: &InstanceCoeffs) -> BetaInterval {
    let l = coeffs.label;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for c in 0..coeffs.k.len() {
        if c == l {
            continue;
        }
        let a = coeffs.k[l] - coeffs.k[c];
        let b = coeffs.m[c] - coeffs.m[l] + if c < l { TIE_TOLERANCE } else { -TIE_TOLERANCE };
        if a > 0.0 {
            lo = lo.max(b / a);
        } else if a < 0.0 {
            hi = hi.min(b / a);
        } else if b > 0.0 || (b == 0.0 && c < l) {
            return BetaInterval::empty();
        }
    }
    BetaInterval::new(lo, hi)
}

/// Sweep over interval endpoints: the leftmost subinterval contained in the
/// most instance intervals, widened over neighbours with the same covering set.
pub fn optimal_interval(intervals: &[BetaInterval]) -> QsfResult {
    let live: Vec<&BetaInterval> = intervals.iter().filter(|iv| !iv.empty).collect();
    let mut points: Vec<f64> = live
        .iter()
        .flat_map(|iv| [iv.lo, iv.hi])
        .chain([0.0, 1.0])
        .collect();
    points.sort_by(f64::total_cmp);
    points.dedup();

    let slots = points.len() - 1;
    let locate = |v: f64| points.partition_point(|&p| p < v);
    let mut delta = vec![0i64; points.len()];
    let mut touching = vec![0usize; points.len()];
    for iv in &live {
        let (s, e) = (locate(iv.lo), locate(iv.hi));
        delta[s] += 1;
        delta[e] -= 1;
        touching[s] += 1;
        touching[e] += 1;
    }
    let mut candidates = Vec::with_capacity(slots);
    let mut running = 0i64;
    for i in 0..slots {
        running += delta[i];
        candidates.push(Candidate {
            lo: points[i],
            hi: points[i + 1],
            coverage: running as usize,
        });
    }

    if live.is_empty() {
        return QsfResult {
            optimal: BetaInterval::full(),
            representative: 0.5,
            coverage: 0,
            n_instances: intervals.len(),
            degenerate: true,
            candidates,
        };
    }

    let best = candidates.iter().map(|c| c.coverage).max().unwrap_or(0);
    let first = candidates
        .iter()
        .position(|c| c.coverage == best)
        .unwrap_or(0);
    let mut last = first;
    // an interior point no interval starts or ends at separates identical covering sets
    while last + 1 < slots && touching[last + 1] == 0 {
        last += 1;
    }
    let optimal = BetaInterval {
        lo: candidates[first].lo,
        hi: candidates[last].hi,
        empty: false,
    };
    QsfResult {
        representative: optimal.midpoint(),
        optimal,
        coverage: best,
        n_instances: intervals.len(),
        degenerate: false,
        candidates,
    }
}

/// Per-instance feasible intervals of `data` under `model`, in row order.
pub fn feasible_intervals(
    model: &FrequencyModel,
    data: &Dataset,
    ca: &IndexVector,
    aa: &IndexVector,
) -> Result<Vec<BetaInterval>> {
    data.instances()
        .par_iter()
        .zip(data.labels().par_iter())
        .map(|(x, &c)| instance_coeffs(model, ca, aa, x, c).map(|k| feasible_interval(&k)))
        .collect()
}

/// Optimal β interval for `data` scored by an already fitted `model`.
pub fn qsf_with_model(
    model: &FrequencyModel,
    data: &Dataset,
    ca: &IndexVector,
    aa: &IndexVector,
) -> Result<QsfResult> {
    Ok(optimal_interval(&feasible_intervals(model, data, ca, aa)?))
}

/// Fits the frequency model on `train` and infers the optimal β interval.
pub fn qsf(train: &Dataset, ca: &IndexVector, aa: &IndexVector) -> Result<QsfResult> {
    let model = FrequencyModel::fit(train)?;
    qsf_with_model(&model, train, ca, aa)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlsResult {
    pub best_betas: Vec<f64>,
    pub best_accuracy: f64,
    pub per_beta: Vec<(f64, f64)>,
}

/// `0, step, 2·step, …` up to 1, with 1 always included.
pub fn beta_grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step < 1.0) {
        return Err(Error::OutOfRange(format!("step {step} not in (0,1)")));
    }
    let n = (1.0 / step + 1e-9).floor() as usize;
    let mut grid: Vec<f64> = (0..=n).map(|k| (k as f64 * step).min(1.0)).collect();
    if *grid.last().expect("grid starts at 0") < 1.0 - 1e-12 {
        grid.push(1.0);
    } else {
        *grid.last_mut().expect("grid starts at 0") = 1.0;
    }
    Ok(grid)
}

/// Training accuracy at every grid point, evaluated by ordinary prediction.
pub fn sls_with_model(
    model: &FrequencyModel,
    data: &Dataset,
    ca: &IndexVector,
    aa: &IndexVector,
    step: f64,
) -> Result<SlsResult> {
    let grid = beta_grid(step)?;
    let correct: Vec<usize> = grid
        .par_iter()
        .map(|&beta| model.correct_count(&fusion_weights(ca, aa, beta)?, data))
        .collect::<Result<_>>()?;
    let best = correct.iter().copied().max().unwrap_or(0);
    let total = data.len() as f64;
    Ok(SlsResult {
        best_betas: grid
            .iter()
            .zip(&correct)
            .filter(|(_, &n)| n == best)
            .map(|(&b, _)| b)
            .collect(),
        best_accuracy: best as f64 / total,
        per_beta: grid
            .iter()
            .zip(&correct)
            .map(|(&b, &n)| (b, n as f64 / total))
            .collect(),
    })
}

pub fn sls(train: &Dataset, ca: &IndexVector, aa: &IndexVector, step: f64) -> Result<SlsResult> {
    let model = FrequencyModel::fit(train)?;
    sls_with_model(&model, train, ca, aa, step)
}

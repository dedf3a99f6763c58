//! Weight vectors: uniform, gain-ratio (WNB), sigmoid CFW and β-fusion.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::indexes::{self, AaIndex, CaIndex, IndexPair, IndexVector};
use crate::nb::WeightVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Uniform,
    Wnb,
    Cfw,
    Fusion,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaMode {
    Fixed(f64),
    Adaptive,
}

impl FromStr for BetaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("adaptive") {
            return Ok(BetaMode::Adaptive);
        }
        let beta: f64 = s.trim().parse().map_err(|_| {
            Error::InvalidScheme(format!("beta `{s}` is neither a number nor `adaptive`"))
        })?;
        check_beta(beta)?;
        Ok(BetaMode::Fixed(beta))
    }
}

impl fmt::Display for BetaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BetaMode::Fixed(b) => write!(f, "{b}"),
            BetaMode::Adaptive => f.write_str("adaptive"),
        }
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&beta) {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("beta {beta} not in [0,1]")))
    }
}

/// Which weighting scheme to train, with its indexes and β mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeSpec {
    pub scheme: Scheme,
    pub ca: Option<CaIndex>,
    pub aa: Option<AaIndex>,
    pub beta: Option<BetaMode>,
}

impl SchemeSpec {
    pub fn uniform() -> Self {
        Self {
            scheme: Scheme::Uniform,
            ca: None,
            aa: None,
            beta: None,
        }
    }

    pub fn wnb() -> Self {
        Self {
            scheme: Scheme::Wnb,
            ..Self::uniform()
        }
    }

    pub fn cfw() -> Self {
        Self {
            scheme: Scheme::Cfw,
            ca: Some(CaIndex::MutualInfo),
            aa: Some(AaIndex::MutualInfo),
            beta: None,
        }
    }

    pub fn fusion(ca: CaIndex, aa: AaIndex, beta: BetaMode) -> Result<Self> {
        let spec = Self {
            scheme: Scheme::Fusion,
            ca: Some(ca),
            aa: Some(aa),
            beta: Some(beta),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match self.scheme {
            Scheme::Uniform | Scheme::Wnb => {
                if self.ca.is_some() || self.aa.is_some() || self.beta.is_some() {
                    return Err(Error::InvalidScheme(format!(
                        "{:?} takes no indexes or beta",
                        self.scheme
                    )));
                }
            }
            Scheme::Cfw => {
                if self.ca != Some(CaIndex::MutualInfo)
                    || self.aa != Some(AaIndex::MutualInfo)
                    || self.beta.is_some()
                {
                    return Err(Error::InvalidScheme(
                        "cfw uses mutual_info for both indexes and no beta".into(),
                    ));
                }
            }
            Scheme::Fusion => match (self.ca, self.aa, self.beta) {
                (Some(_), Some(_), Some(BetaMode::Fixed(b))) => check_beta(b)?,
                (Some(_), Some(_), Some(BetaMode::Adaptive)) => {}
                _ => {
                    return Err(Error::InvalidScheme(
                        "fusion needs a ca index, an aa index and a beta".into(),
                    ))
                }
            },
        }
        Ok(())
    }

    pub fn is_adaptive(&self) -> bool {
        self.beta == Some(BetaMode::Adaptive)
    }

    /// Short name used in reports: `NB`, `WNB`, `CFW`, `ATFNB`, `CFW-beta`,
    /// `ATFNB-XY` for other adaptive index pairs, or the long form otherwise.
    pub fn name(&self) -> String {
        match self.scheme {
            Scheme::Uniform => "NB".into(),
            Scheme::Wnb => "WNB".into(),
            Scheme::Cfw => "CFW".into(),
            Scheme::Fusion => {
                let (ca, aa) = (self.ca.expect("validated"), self.aa.expect("validated"));
                match (ca, aa, self.beta) {
                    (CaIndex::InfoGain, AaIndex::Pearson, Some(BetaMode::Adaptive)) => {
                        "ATFNB".into()
                    }
                    (CaIndex::MutualInfo, AaIndex::MutualInfo, Some(BetaMode::Adaptive)) => {
                        "CFW-beta".into()
                    }
                    (_, _, Some(BetaMode::Adaptive)) => {
                        format!("ATFNB-{}{}", ca_letter(ca), aa_letter(aa))
                    }
                    (_, _, beta) => format!("fusion:{ca}:{aa}:{}", beta.expect("validated")),
                }
            }
        }
    }
}

fn ca_letter(ca: CaIndex) -> char {
    match ca {
        CaIndex::InfoGain => 'I',
        CaIndex::GainRatio => 'G',
        CaIndex::MutualInfo => 'M',
        CaIndex::KlWeight => 'K',
        CaIndex::Pearson => 'P',
    }
}

fn aa_letter(aa: AaIndex) -> char {
    match aa {
        AaIndex::Pearson => 'P',
        AaIndex::MutualInfo => 'M',
    }
}

impl fmt::Display for SchemeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Accepts `nb`/`uniform`, `wnb`, `cfw`, `atfnb`, `cfw-beta`, `atfnb-XY`
/// (X in I,G,M,K,P; Y in P,M) and `fusion:<ca>:<aa>:<beta>`.
impl FromStr for SchemeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        if let Some(rest) = key.strip_prefix("fusion:") {
            let parts: Vec<&str> = rest.split(':').collect();
            let [ca, aa, beta] = parts[..] else {
                return Err(Error::InvalidScheme(format!(
                    "expected fusion:<ca>:<aa>:<beta>, got `{s}`"
                )));
            };
            return SchemeSpec::fusion(ca.parse()?, aa.parse()?, beta.parse()?);
        }
        match key.as_str() {
            "nb" | "uniform" => Ok(SchemeSpec::uniform()),
            "wnb" => Ok(SchemeSpec::wnb()),
            "cfw" => Ok(SchemeSpec::cfw()),
            "atfnb" => SchemeSpec::fusion(CaIndex::InfoGain, AaIndex::Pearson, BetaMode::Adaptive),
            "cfw-beta" | "cfw_beta" | "cfwbeta" => {
                SchemeSpec::fusion(CaIndex::MutualInfo, AaIndex::MutualInfo, BetaMode::Adaptive)
            }
            other => {
                let letters: Vec<char> = other
                    .strip_prefix("atfnb-")
                    .map(|r| r.chars().collect())
                    .unwrap_or_default();
                match letters[..] {
                    [x, y] => SchemeSpec::fusion(
                        x.to_string().parse()?,
                        y.to_string().parse()?,
                        BetaMode::Adaptive,
                    ),
                    _ => Err(Error::InvalidScheme(format!("unknown scheme `{s}`"))),
                }
            }
        }
    }
}

pub fn uniform_weights(n: usize) -> WeightVector {
    WeightVector::uniform(n)
}

/// Gain ratios divided by their mean. The flag is set when every gain ratio
/// is zero and uniform weights were returned instead.
pub fn wnb_weights(data: &Dataset) -> (WeightVector, bool) {
    let ratios: Vec<f64> = (0..data.n_attributes())
        .map(|j| indexes::gain_ratio(data, j))
        .collect();
    wnb_from_ratios(&ratios)
}

pub fn wnb_from_ratios(ratios: &[f64]) -> (WeightVector, bool) {
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    if mean.is_nan() || mean <= 0.0 {
        log::warn!("all gain ratios are zero; using uniform weights");
        return (WeightVector::uniform(ratios.len()), true);
    }
    (
        WeightVector(ratios.iter().map(|r| r / mean).collect()),
        false,
    )
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `sigmoid(NI(A_j;C) − mean_{i≠j} NI(A_i;A_j))` over normalized mutual information.
pub fn cfw_weights(data: &Dataset) -> Result<WeightVector> {
    let pair = IndexPair::compute(data, CaIndex::MutualInfo, AaIndex::MutualInfo)?;
    Ok(cfw_from_indexes(&pair.ca, &pair.aa))
}

pub fn cfw_from_indexes(ca: &IndexVector, aa: &IndexVector) -> WeightVector {
    WeightVector(
        ca.values
            .iter()
            .zip(&aa.values)
            .map(|(c, a)| sigmoid(c - a))
            .collect(),
    )
}

/// `β·CA_j − (1−β)·AA_j`, unclamped.
pub fn fusion_weights(ca: &IndexVector, aa: &IndexVector, beta: f64) -> Result<WeightVector> {
    check_beta(beta)?;
    if ca.len() != aa.len() {
        return Err(Error::LengthMismatch(format!(
            "ca has {} entries, aa has {}",
            ca.len(),
            aa.len()
        )));
    }
    Ok(WeightVector(
        ca.values
            .iter()
            .zip(&aa.values)
            .map(|(c, a)| beta * c - (1.0 - beta) * a)
            .collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indexes::IndexKind;
    use approx::assert_abs_diff_eq;

    fn vector(values: &[f64], kind: IndexKind) -> IndexVector {
        IndexVector {
            kind,
            index_name: "test".into(),
            values: values.to_vec(),
        }
    }

    #[test]
    fn uniform_cases() {
        assert_eq!(uniform_weights(3).0, vec![1.0; 3]);
        assert_eq!(uniform_weights(1).0, vec![1.0]);
    }

    #[test]
    fn wnb_cases() {
        let (w, fallback) = wnb_from_ratios(&[0.2, 0.4]);
        assert!(!fallback);
        assert_abs_diff_eq!(w.0[0], 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(w.0[1], 4.0 / 3.0, epsilon = 1e-15);
        assert_eq!(wnb_from_ratios(&[0.3, 0.3, 0.3]).0 .0, vec![1.0; 3]);
        assert_eq!(
            wnb_from_ratios(&[0.0, 0.0]),
            (WeightVector(vec![1.0, 1.0]), true)
        );
    }

    #[test]
    fn cfw_cases() {
        let w = cfw_from_indexes(
            &vector(&[0.4], IndexKind::Ca),
            &vector(&[0.4], IndexKind::AaAggregate),
        );
        assert_eq!(w.0, vec![0.5]);
        let w = cfw_from_indexes(
            &vector(&[40.0], IndexKind::Ca),
            &vector(&[0.0], IndexKind::AaAggregate),
        );
        assert!(w.0[0] > 1.0 - 1e-15);
        let single = Dataset::from_symbols(&["x"], &[(&["u"], "a"), (&["v"], "b")]).unwrap();
        // one attribute: its normalized MI is 0 (degenerate range), redundancy 0
        assert_eq!(cfw_weights(&single).unwrap().0, vec![0.5]);
    }

    #[test]
    fn fusion_cases() {
        let ca = vector(&[0.6, 0.1], IndexKind::Ca);
        let aa = vector(&[0.2, 0.9], IndexKind::AaAggregate);
        assert_eq!(fusion_weights(&ca, &aa, 1.0).unwrap().0, ca.values);
        assert_eq!(fusion_weights(&ca, &aa, 0.0).unwrap().0, vec![-0.2, -0.9]);
        let w = fusion_weights(
            &vector(&[0.6], IndexKind::Ca),
            &vector(&[0.2], IndexKind::AaAggregate),
            0.5,
        )
        .unwrap();
        assert_abs_diff_eq!(w.0[0], 0.2, epsilon = 1e-15);
        assert!(fusion_weights(&ca, &aa, 1.5).is_err());
        assert!(fusion_weights(&ca, &vector(&[0.1], IndexKind::AaAggregate), 0.5).is_err());
    }

    #[test]
    fn presets_parse_and_name() {
        for (text, name) in [
            ("nb", "NB"),
            ("WNB", "WNB"),
            ("cfw", "CFW"),
            ("atfnb", "ATFNB"),
            ("cfw-beta", "CFW-beta"),
            ("atfnb-ip", "ATFNB"),
            ("atfnb-mm", "CFW-beta"),
            ("atfnb-pp", "ATFNB-PP"),
            ("atfnb-mp", "ATFNB-MP"),
            (
                "fusion:info_gain:pearson:0.5",
                "fusion:info_gain:pearson:0.5",
            ),
        ] {
            let spec: SchemeSpec = text.parse().unwrap();
            assert_eq!(spec.name(), name, "{text}");
            assert_eq!(spec.name().parse::<SchemeSpec>().unwrap(), spec);
        }
        assert!("fusion:info_gain:pearson:2".parse::<SchemeSpec>().is_err());
        assert!("atfnb-xx".parse::<SchemeSpec>().is_err());
        assert!("bayes".parse::<SchemeSpec>().is_err());
    }

    #[test]
    fn validation_rejects_inconsistent_specs() {
        let mut spec = SchemeSpec::uniform();
        spec.beta = Some(BetaMode::Adaptive);
        assert!(spec.validate().is_err());
        let mut spec = SchemeSpec::cfw();
        spec.aa = Some(AaIndex::Pearson);
        assert!(spec.validate().is_err());
    }
}

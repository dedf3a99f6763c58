//! Trainable weighted naive Bayes and the raw-data pipeline around it.

use serde::{Deserialize, Serialize};

use crate::dataset::{
    apply_discretization_like, chimerge_discretize, Cell, Column, ColumnKind, Dataset,
    DiscretizationMap, Imputer, RawDataset,
};
use crate::error::{Error, Result};
use crate::indexes::IndexPair;
use crate::nb::{FrequencyModel, WeightVector};
use crate::qsf::{qsf_with_model, QsfResult};
use crate::weighting::{
    cfw_from_indexes, fusion_weights, uniform_weights, wnb_weights, BetaMode, Scheme, SchemeSpec,
};

/// A fitted frequency model together with its attribute weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedNb {
    pub spec: SchemeSpec,
    pub model: FrequencyModel,
    pub weights: WeightVector,
    /// The β used for fusion weights, fixed or inferred.
    pub beta: Option<f64>,
    pub qsf: Option<QsfResult>,
    pub indexes: Option<IndexPair>,
    /// Set when WNB fell back to uniform weights.
    pub uniform_fallback: bool,
}

impl WeightedNb {
    pub fn fit(train: &Dataset, spec: &SchemeSpec) -> Result<Self> {
        spec.validate()?;
        let model = FrequencyModel::fit(train)?;
        let mut out = Self {
            spec: *spec,
            weights: uniform_weights(train.n_attributes()),
            model,
            beta: None,
            qsf: None,
            indexes: None,
            uniform_fallback: false,
        };
        match spec.scheme {
            Scheme::Uniform => {}
            Scheme::Wnb => {
                let (w, fallback) = wnb_weights(train);
                out.weights = w;
                out.uniform_fallback = fallback;
            }
            Scheme::Cfw => {
                let pair = IndexPair::compute(
                    train,
                    spec.ca.expect("validated"),
                    spec.aa.expect("validated"),
                )?;
                out.weights = cfw_from_indexes(&pair.ca, &pair.aa);
                out.indexes = Some(pair);
            }
            Scheme::Fusion => {
                let pair = IndexPair::compute(
                    train,
                    spec.ca.expect("validated"),
                    spec.aa.expect("validated"),
                )?;
                let beta = match spec.beta.expect("validated") {
                    BetaMode::Fixed(b) => b,
                    BetaMode::Adaptive => {
                        let found = qsf_with_model(&out.model, train, &pair.ca, &pair.aa)?;
                        let b = found.representative;
                        out.qsf = Some(found);
                        b
                    }
                };
                out.weights = fusion_weights(&pair.ca, &pair.aa, beta)?;
                out.beta = Some(beta);
                out.indexes = Some(pair);
            }
        }
        Ok(out)
    }

    pub fn predict(&self, x: &[usize]) -> Result<usize> {
        self.model.predict(&self.weights, x)
    }

    pub fn accuracy(&self, data: &Dataset) -> Result<f64> {
        self.model.accuracy(&self.weights, data)
    }

    pub fn correct_count(&self, data: &Dataset) -> Result<usize> {
        self.model.correct_count(&self.weights, data)
    }
}

/// Imputation and discretization fitted on training rows, replayable on new rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preprocessor {
    pub columns: Vec<Column>,
    pub class_name: String,
    pub imputer: Imputer,
    pub cuts: DiscretizationMap,
    pub schema: Dataset,
}

impl Preprocessor {
    /// Fits on `train` and returns the discretized training set alongside.
    pub fn fit(train: &RawDataset, significance: f64) -> Result<(Self, Dataset)> {
        let imputer = Imputer::fit(train)?;
        let filled = imputer.apply(train)?;
        let (data, cuts) = chimerge_discretize(&filled, significance)?;
        let columns = train
            .attribute_columns()
            .map(|j| train.columns()[j].clone())
            .collect();
        let pre = Self {
            columns,
            class_name: train.class_name().to_string(),
            imputer,
            cuts,
            schema: data.clone(),
        };
        Ok((pre, data))
    }

    /// Labelled rows coded against the training alphabets.
    pub fn transform(&self, raw: &RawDataset) -> Result<Dataset> {
        let filled = self.imputer.apply(raw)?;
        apply_discretization_like(&filled, &self.cuts, &self.schema)
    }

    /// Codes one row of attribute cells (class column excluded). Symbols the
    /// training set never saw get a code past the end of the alphabet.
    pub fn encode_row(&self, cells: &[Cell]) -> Result<Vec<usize>> {
        if cells.len() != self.columns.len() {
            return Err(Error::ArityMismatch {
                got: cells.len(),
                expected: self.columns.len(),
            });
        }
        let mut cells = cells.to_vec();
        self.imputer.apply_row(&mut cells);
        self.columns
            .iter()
            .zip(&cells)
            .enumerate()
            .map(|(j, (col, cell))| {
                let alphabet = &self.schema.attribute(j).values;
                match (col.kind, cell) {
                    (ColumnKind::Numeric, Cell::Number(v)) => {
                        let cuts = self
                            .cuts
                            .get(&col.name)
                            .ok_or_else(|| Error::UnmappedAttribute(col.name.clone()))?;
                        Ok(cuts.bin_of(*v))
                    }
                    (ColumnKind::Numeric, Cell::Symbol(s)) => Err(Error::NonNumeric {
                        column: col.name.clone(),
                        value: s.clone(),
                    }),
                    (ColumnKind::Categorical, Cell::Symbol(s)) => Ok(alphabet
                        .iter()
                        .position(|a| a == s)
                        .unwrap_or(alphabet.len())),
                    _ => Err(Error::UnexpectedMissing(col.name.clone())),
                }
            })
            .collect()
    }
}

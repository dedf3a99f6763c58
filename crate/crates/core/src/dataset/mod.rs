//! Ingestion and preprocessing: CSV loading, imputation, ChiMerge
//! discretization, stratified splits and synthetic data.

mod chimerge;
mod encoded;
mod raw;
mod split;
mod synthetic;

pub use chimerge::{
    apply_discretization, apply_discretization_like, chimerge_cuts, chimerge_discretize,
    AttributeCuts, ChiMergeOutcome, DiscretizationMap, DEFAULT_SIGNIFICANCE,
};
pub use encoded::{Attribute, Dataset};
pub use raw::{
    impute_missing, load_csv, read_table, read_table_path, Cell, ClassColumn, Column, ColumnKind,
    CsvOptions, FillValue, Imputer, RawDataset,
};
pub use split::{
    split, split_raw, stratified_indices, Split, SplitIndices, DEFAULT_TRAIN_FRACTION,
};
pub use synthetic::{random_dataset, SyntheticShape};

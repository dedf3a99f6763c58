//! Attribute-weighted naive Bayes with adaptive two-index fusion.
//!
//! The crate is organised bottom-up:
//!
//! - [`dataset`]: CSV ingestion, mean/mode imputation, ChiMerge discretization
//!   and seeded stratified splits.
//! - [`nb`]: Laplace-smoothed frequency model and weighted log-space scoring.
//! - [`indexes`]: class-attribute and attribute-attribute correlation indexes.
//! - [`weighting`]: uniform, gain-ratio (WNB), CFW and β-fusion weight vectors.
//! - [`qsf`]: exact inference of the optimal switching-factor interval, plus the
//!   step-length grid search used as a baseline.
//! - [`framework`]: ties the above into a trainable classifier.
//! - [`eval`]: repeated-split benchmarking, t-tests, Wilcoxon signed-rank tests
//!   and summary tables.
//!
//! ```
//! use atfnb::dataset::Dataset;
//! use atfnb::framework::WeightedNb;
//! use atfnb::weighting::SchemeSpec;
//!
//! let data = Dataset::from_symbols(
//!     &["outlook", "windy"],
//!     &[
//!         (&["sunny", "no"][..], "play"),
//!         (&["sunny", "yes"][..], "stay"),
//!         (&["rain", "yes"][..], "stay"),
//!         (&["overcast", "no"][..], "play"),
//!     ],
//! )
//! .unwrap();
//! let spec: SchemeSpec = "atfnb".parse().unwrap();
//! let clf = WeightedNb::fit(&data, &spec).unwrap();
//! assert_eq!(clf.accuracy(&data).unwrap(), 1.0);
//! ```

pub mod dataset;
pub mod error;
pub mod eval;
pub mod fixtures;
pub mod framework;
pub mod indexes;
pub mod nb;
pub mod qsf;
pub mod weighting;

pub use error::{Error, Result};

/// Crate version recorded in reports and model bundles.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

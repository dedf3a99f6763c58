use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("row {row} has {got} cells, expected {expected}")]
    RaggedRow {
        row: usize,
        got: usize,
        expected: usize,
    },

    #[error("class column `{0}` not found")]
    UnknownClassColumn(String),

    #[error("class column has a missing value at row {0}")]
    MissingClassValue(usize),

    #[error("fewer than 2 classes")]
    TooFewClasses,

    #[error("no attributes besides the class column")]
    NoAttributes,

    #[error("column `{0}` is entirely missing")]
    AllMissing(String),

    #[error("dataset still contains missing values in column `{0}`")]
    UnexpectedMissing(String),

    #[error("attribute `{0}` is not covered by the discretization map")]
    UnmappedAttribute(String),

    #[error("non-numeric value `{value}` in numeric column `{column}`")]
    NonNumeric { column: String, value: String },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("instance has {got} values, model expects {expected}")]
    ArityMismatch { got: usize, expected: usize },

    #[error("unknown class index {0}")]
    UnknownClass(usize),

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("invalid scheme: {0}")]
    InvalidScheme(String),

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("split would leave an empty partition")]
    EmptyPartition,
}

impl Error {
    /// True for errors caused by the input data rather than by computation.
    pub fn is_ingestion(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::Csv(_)
                | Error::RaggedRow { .. }
                | Error::UnknownClassColumn(_)
                | Error::MissingClassValue(_)
                | Error::TooFewClasses
                | Error::NoAttributes
                | Error::AllMissing(_)
                | Error::UnmappedAttribute(_)
                | Error::ArityMismatch { .. }
                | Error::NonNumeric { .. }
                | Error::EmptyDataset
        )
    }
}

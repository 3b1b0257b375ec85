use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("line {line}: expected {expected} fields, found {found}")]
    RaggedRow {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("unknown ARFF attribute type `{0}`")]
    UnknownAttributeType(String),

    #[error("table is empty")]
    EmptyTable,

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("duplicate column name `{0}`")]
    DuplicateName(String),

    #[error("column `{name}` has {found} rows, expected {expected}")]
    ColumnLength {
        name: String,
        expected: usize,
        found: usize,
    },

    #[error("non-finite value in numeric column `{0}`")]
    NonFinite(String),

    #[error("column `{0}` is not numeric")]
    NotNumeric(String),

    #[error("unknown column `{0}`")]
    UnknownColumn(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("granule needs {needed} complete rows but only {found} exist")]
    GranuleUnderfull { needed: usize, found: usize },

    #[error("internal invariant violated: {0}")]
    InvariantBreach(String),

    #[error("table has no label column")]
    NoLabel,

    #[error("label column must hold exactly two classes, found {0}")]
    NotBinary(usize),

    #[error("training set contains a single class")]
    SingleClass,

    #[error("missing value at row {row}, column {col}")]
    MissingValue { row: usize, col: usize },

    #[error("non-finite feature at row {row}, column {col}")]
    NonFiniteFeature { row: usize, col: usize },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

//! Tables, ingestion, missingness masks, categorical encoding and standardization.

mod encode;
mod io;
mod mask;
mod standardize;
mod table;

pub use encode::{decode_categoricals, encode_categoricals, CategoryMap};
pub use io::{load_path, load_table, write_csv, Format, MissingTokens};
pub use mask::{build_mask, MaskMatrix};
pub use standardize::{inverse_standardize, standardize, ColumnMoments, StandardizationParams};
pub use table::{Column, FeatureKind, Table};

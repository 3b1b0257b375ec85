//! Missing-value imputation with granular semantics, and a bankruptcy
//! prediction pipeline built around it.
//!
//! The imputer fills each missing cell from a small block of the table: the
//! few features most correlated with the cell's column, restricted to the
//! nearest rows that are complete on those features. A local least-squares
//! fit on that block predicts the cell.
//!
//! ```
//! use granimpute::data_model::{load_table, Format, MissingTokens};
//! use granimpute::imputer::{impute_table, GranularConfig};
//!
//! let csv = "a,b,c\n1,3,0\n2,1,?\n3,4,3\n4,1,8\n5,5,6\n";
//! let table = load_table(csv.as_bytes(), Format::Csv, &MissingTokens::default())?;
//! let filled = impute_table(&table, GranularConfig::new(2, 4))?;
//! assert!((filled.table.value(1, 2).unwrap() - 4.0).abs() < 1e-6);
//! # Ok::<(), granimpute::Error>(())
//! ```

pub mod baselines;
pub mod data_model;
mod error;
pub mod fixtures;
pub mod granule;
pub mod imputer;
pub mod linalg;
pub mod pipeline;
pub mod semantics;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/data.md")]
    mod data {}
    #[doc = include_str!("../../../book/src/semantics.md")]
    mod semantics {}
    #[doc = include_str!("../../../book/src/granules.md")]
    mod granules {}
    #[doc = include_str!("../../../book/src/imputation.md")]
    mod imputation {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/pipeline.md")]
    mod pipeline {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}

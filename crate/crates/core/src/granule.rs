//! Row selection around a missing cell and assembly of the granule block.

use serde::Serialize;

use crate::data_model::{MaskMatrix, Table};
use crate::error::{Error, Result};
use crate::semantics::SemanticFeatureSet;

/// Default number of correlated predictor features per granule.
pub const DEFAULT_DELTA: usize = 5;
/// Default number of complete rows per granule.
pub const DEFAULT_ETA: usize = 7;
/// Default ceiling on `δ·η` cells per granule.
pub const DEFAULT_CELL_BUDGET: usize = 64;

/// Where a granule sits: the seed cell, its predictor features and its rows.
#[derive(Clone, Debug, PartialEq)]
pub struct GranuleSpec {
    pub alpha: usize,
    pub beta: usize,
    pub features: SemanticFeatureSet,
    /// Selected rows, nearest to `alpha` first.
    pub rows: Vec<usize>,
}

impl GranuleSpec {
    /// Predictor columns followed by the target column.
    pub fn block_columns(&self) -> Vec<usize> {
        let mut cols = self.features.members.clone();
        cols.push(self.beta);
        cols
    }

    pub fn record(&self) -> GranuleRecord {
        GranuleRecord {
            seed: [self.alpha, self.beta],
            rows: self.rows.clone(),
            features: self.features.members.clone(),
        }
    }
}

/// Serializable audit record of a granule.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GranuleRecord {
    pub seed: [usize; 2],
    pub rows: Vec<usize>,
    pub features: Vec<usize>,
}

/// An `η×(δ+1)` complete block: predictors in member order, target last.
#[derive(Clone, Debug, PartialEq)]
pub struct Granule {
    pub spec: GranuleSpec,
    block: Vec<f64>,
}

impl Granule {
    pub fn n_rows(&self) -> usize {
        self.spec.rows.len()
    }

    /// Predictor count `δ`.
    pub fn n_predictors(&self) -> usize {
        self.spec.features.members.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.n_predictors() + 1;
        &self.block[i * w..(i + 1) * w]
    }

    /// Row-major block, `δ+1` values per row.
    pub fn block(&self) -> &[f64] {
        &self.block
    }

    pub fn predictors(&self, i: usize) -> &[f64] {
        let r = self.row(i);
        &r[..r.len() - 1]
    }

    pub fn target(&self, i: usize) -> f64 {
        *self.row(i).last().expect("block rows are never empty")
    }
}

/// The `eta` rows nearest to `alpha` that are observed on every member
/// feature and on the target.
///
/// Scans outward from `alpha` by increasing row distance; on equal distance
/// the earlier row wins.
pub fn select_rows(
    t: &Table,
    mask: &MaskMatrix,
    alpha: usize,
    features: &SemanticFeatureSet,
    eta: usize,
) -> Result<Vec<usize>> {
    if eta < 2 {
        return Err(Error::InvalidParameter("eta must be at least 2".into()));
    }
    if alpha >= t.n_rows() {
        return Err(Error::InvalidParameter(format!("row {alpha} out of range")));
    }
    let mut cols = features.members.clone();
    cols.push(features.target);
    let n = t.n_rows();
    let mut rows = Vec::with_capacity(eta);
    let mut dist = 1;
    while rows.len() < eta && (dist <= alpha || alpha + dist < n) {
        if dist <= alpha && mask.row_complete_on(alpha - dist, &cols) {
            rows.push(alpha - dist);
        }
        if rows.len() < eta && alpha + dist < n && mask.row_complete_on(alpha + dist, &cols) {
            rows.push(alpha + dist);
        }
        dist += 1;
    }
    if rows.len() < eta {
        return Err(Error::GranuleUnderfull {
            needed: eta,
            found: rows.len(),
        });
    }
    Ok(rows)
}

/// Materializes the granule block from the table.
pub fn form_granule(t: &Table, spec: GranuleSpec) -> Result<Granule> {
    let cols = spec.block_columns();
    if spec.rows.contains(&spec.alpha) {
        return Err(Error::InvariantBreach(
            "seed row inside its own granule".into(),
        ));
    }
    let mut block = Vec::with_capacity(spec.rows.len() * cols.len());
    for &r in &spec.rows {
        for &c in &cols {
            match t.value(r, c) {
                Some(v) => block.push(v),
                None => {
                    return Err(Error::InvariantBreach(format!(
                        "granule cell ({r}, {c}) is missing"
                    )))
                }
            }
        }
    }
    Ok(Granule { spec, block })
}

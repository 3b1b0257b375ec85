//! Granular imputation: one local regression per missing cell.
//!
//! For a missing cell at `(alpha, beta)` the imputer picks the `δ` features
//! most correlated with `beta` that are observed in row `alpha`, gathers the
//! `η` nearest rows complete on those features and on `beta`, fits an affine
//! least-squares model on that block and evaluates it at row `alpha`.
//!
//! Every granule is formed against the original missingness mask, so values
//! imputed for one cell never feed another and the result does not depend on
//! the order in which cells are processed.

mod least_squares;

use rayon::prelude::*;
use serde::Serialize;

pub use least_squares::{fit_local, least_squares, Condition, LocalModel, Ridge};

use crate::data_model::{build_mask, MaskMatrix, Table};
use crate::error::{Error, Result};
use crate::granule::{
    form_granule, select_rows, GranuleRecord, GranuleSpec, DEFAULT_CELL_BUDGET, DEFAULT_DELTA,
    DEFAULT_ETA,
};
use crate::semantics::{correlation_matrix, CorrelationMatrix, SemanticFeatureSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GranularConfig {
    pub delta: usize,
    pub eta: usize,
    /// Upper bound on `δ·η` after clamping both to what the table can supply.
    pub cell_budget: usize,
}

impl Default for GranularConfig {
    fn default() -> Self {
        GranularConfig {
            delta: DEFAULT_DELTA,
            eta: DEFAULT_ETA,
            cell_budget: DEFAULT_CELL_BUDGET,
        }
    }
}

impl GranularConfig {
    pub fn new(delta: usize, eta: usize) -> Self {
        GranularConfig {
            delta,
            eta,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.delta < 1 {
            return Err(Error::InvalidParameter("delta must be at least 1".into()));
        }
        if self.eta < 2 {
            return Err(Error::InvalidParameter("eta must be at least 2".into()));
        }
        Ok(())
    }

    fn check_budget(&self, n_rows: usize, n_features: usize) -> Result<()> {
        let delta = self.delta.min(n_features.saturating_sub(1));
        let eta = self.eta.min(n_rows.saturating_sub(1));
        if delta * eta > self.cell_budget {
            return Err(Error::InvalidParameter(format!(
                "granule of {delta}×{eta} cells exceeds the budget of {}",
                self.cell_budget
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Granular,
    Mean,
    Knn,
    Mice,
}

/// How far an imputation degraded from the requested procedure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Fallback {
    None,
    /// Regression ran with fewer predictors than requested.
    ReducedDelta,
    /// Mean of the column's observed cells.
    ColumnMean,
    /// The column has no observed cells; the value is 0.
    EmptyColumn,
}

/// Audit record for one imputed cell.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Provenance {
    pub row: usize,
    pub col: usize,
    pub value: f64,
    pub method: Method,
    pub fallback: Fallback,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition: Option<Condition>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub granule: Option<GranuleRecord>,
}

impl Provenance {
    pub(crate) fn simple(
        row: usize,
        col: usize,
        value: f64,
        method: Method,
        fallback: Fallback,
    ) -> Self {
        Provenance {
            row,
            col,
            value,
            method,
            fallback,
            condition: None,
            granule: None,
        }
    }
}

/// A table with every missing feature cell filled, plus one provenance
/// record per filled cell in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct ImputedTable {
    pub table: Table,
    pub provenance: Vec<Provenance>,
}

impl ImputedTable {
    pub(crate) fn assemble(source: &Table, provenance: Vec<Provenance>) -> Self {
        let mut table = source.clone();
        for p in &provenance {
            table.set_numeric(p.row, p.col, Some(p.value));
        }
        ImputedTable { table, provenance }
    }
}

pub(crate) fn column_mean(col: &[Option<f64>]) -> Option<f64> {
    let n = col.iter().flatten().count();
    (n > 0).then(|| col.iter().flatten().sum::<f64>() / n as f64)
}

fn mean_fallback(row: usize, col: usize, mean: Option<f64>) -> Provenance {
    match mean {
        Some(m) => Provenance::simple(row, col, m, Method::Granular, Fallback::ColumnMean),
        None => Provenance::simple(row, col, 0.0, Method::Granular, Fallback::EmptyColumn),
    }
}

/// Row `alpha`'s value of every predictor, in member order.
pub fn estimate_cell(t: &Table, spec: &GranuleSpec, model: &LocalModel) -> Result<f64> {
    let x = spec
        .features
        .members
        .iter()
        .map(|&c| {
            t.value(spec.alpha, c).ok_or(Error::MissingValue {
                row: spec.alpha,
                col: c,
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(model.predict(&x))
}

fn impute_one(
    t: &Table,
    mask: &MaskMatrix,
    corr: &CorrelationMatrix,
    alpha: usize,
    beta: usize,
    cfg: &GranularConfig,
    mean: impl FnOnce() -> Option<f64>,
) -> Result<Provenance> {
    if mask.is_observed(alpha, beta) {
        return Err(Error::InvalidParameter(format!(
            "cell ({alpha}, {beta}) is not missing"
        )));
    }
    let wanted = cfg.delta.min(corr.dim().saturating_sub(1));
    // Predictor repair: skip any correlated feature that is itself missing in row alpha.
    let (mut members, mut scores): (Vec<usize>, Vec<f64>) = corr
        .ranked(beta)
        .into_iter()
        .filter(|&(c, _)| mask.is_observed(alpha, c))
        .take(wanted)
        .unzip();

    while !members.is_empty() {
        let features = SemanticFeatureSet {
            target: beta,
            members: members.clone(),
            scores: scores.clone(),
        };
        match select_rows(t, mask, alpha, &features, cfg.eta) {
            Ok(rows) => {
                let spec = GranuleSpec {
                    alpha,
                    beta,
                    features,
                    rows,
                };
                let granule = form_granule(t, spec)?;
                let model = fit_local(&granule);
                let value = estimate_cell(t, &granule.spec, &model)?;
                if !value.is_finite() {
                    break;
                }
                let fallback = if members.len() < wanted {
                    Fallback::ReducedDelta
                } else {
                    Fallback::None
                };
                return Ok(Provenance {
                    row: alpha,
                    col: beta,
                    value,
                    method: Method::Granular,
                    fallback,
                    condition: Some(model.condition),
                    granule: Some(granule.spec.record()),
                });
            }
            Err(Error::GranuleUnderfull { .. }) => {
                members.pop();
                scores.pop();
            }
            Err(e) => return Err(e),
        }
    }
    Ok(mean_fallback(alpha, beta, mean()))
}

/// Imputes a single missing cell against a precomputed mask and correlation matrix.
pub fn impute_cell(
    t: &Table,
    mask: &MaskMatrix,
    corr: &CorrelationMatrix,
    alpha: usize,
    beta: usize,
    delta: usize,
    eta: usize,
) -> Result<(f64, Provenance)> {
    let cfg = GranularConfig::new(delta, eta);
    cfg.validate()?;
    let p = impute_one(t, mask, corr, alpha, beta, &cfg, || {
        t.numeric(beta).ok().and_then(column_mean)
    })?;
    Ok((p.value, p))
}

/// Reusable imputer over one table: holds its mask, correlations and column means.
pub struct GranularImputer<'a> {
    table: &'a Table,
    mask: MaskMatrix,
    corr: CorrelationMatrix,
    means: Vec<Option<f64>>,
    config: GranularConfig,
}

impl<'a> GranularImputer<'a> {
    pub fn new(table: &'a Table, config: GranularConfig) -> Result<Self> {
        config.validate()?;
        table.require_numeric_features()?;
        let mask = build_mask(table);
        let corr = correlation_matrix(table, &mask)?;
        config.check_budget(table.n_rows(), corr.dim())?;
        let means = (0..table.n_cols())
            .map(|j| table.numeric(j).ok().and_then(column_mean))
            .collect();
        Ok(GranularImputer {
            table,
            mask,
            corr,
            means,
            config,
        })
    }

    pub fn mask(&self) -> &MaskMatrix {
        &self.mask
    }

    pub fn correlation(&self) -> &CorrelationMatrix {
        &self.corr
    }

    /// Missing feature cells in row-major order.
    pub fn missing_cells(&self) -> Vec<(usize, usize)> {
        self.mask.missing_cells(self.corr.columns())
    }

    pub fn impute_cell(&self, alpha: usize, beta: usize) -> Result<Provenance> {
        impute_one(
            self.table,
            &self.mask,
            &self.corr,
            alpha,
            beta,
            &self.config,
            || self.means[beta],
        )
    }

    /// Imputes the given cells independently; output order follows input order.
    pub fn impute_cells(&self, cells: &[(usize, usize)]) -> Result<Vec<Provenance>> {
        cells
            .par_iter()
            .map(|&(r, c)| self.impute_cell(r, c))
            .collect()
    }

    pub fn run(&self) -> Result<ImputedTable> {
        let provenance = self.impute_cells(&self.missing_cells())?;
        Ok(ImputedTable::assemble(self.table, provenance))
    }
}

/// Fills every missing feature cell of an all-numeric table.
pub fn impute_table(t: &Table, config: GranularConfig) -> Result<ImputedTable> {
    GranularImputer::new(t, config)?.run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::toy_balance_sheet;

    fn col(v: &[f64]) -> Vec<Option<f64>> {
        v.iter().copied().map(Some).collect()
    }

    #[test]
    fn toy_sheet_cell_uses_two_row_granule() {
        let t = toy_balance_sheet();
        let imp = GranularImputer::new(&t, GranularConfig::new(2, 2)).unwrap();
        let p = imp.impute_cell(5, 1).unwrap();
        let g = p.granule.unwrap();
        assert_eq!(g.rows, vec![4, 2]);
        assert_eq!(p.fallback, Fallback::None);
        assert_eq!(p.condition, Some(Condition::Regularized));
        assert!(p.value.is_finite());
    }

    #[test]
    fn healthy_context_regresses() {
        let n = 40;
        let x1: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin() * 10.0).collect();
        let x2: Vec<f64> = (0..n)
            .map(|i| (i as f64 * 0.91).cos() * 5.0 + i as f64 * 0.1)
            .collect();
        let mut y: Vec<Option<f64>> = x1
            .iter()
            .zip(&x2)
            .map(|(a, b)| Some(3.0 * a - 2.0 * b + 1.0))
            .collect();
        let truth = y[20].unwrap();
        y[20] = None;
        let t = Table::from_numeric_columns(vec![("x1", col(&x1)), ("x2", col(&x2)), ("y", y)])
            .unwrap();
        let out = impute_table(&t, GranularConfig::new(2, 7)).unwrap();
        assert_eq!(out.provenance.len(), 1);
        assert_eq!(out.provenance[0].fallback, Fallback::None);
        assert!((out.table.value(20, 2).unwrap() - truth).abs() < 1e-6);
    }

    #[test]
    fn row_missing_all_other_features_falls_back_to_mean() {
        let t = Table::from_numeric_columns(vec![
            ("a", vec![Some(1.0), Some(2.0), Some(3.0), None]),
            ("b", vec![Some(2.0), Some(4.0), Some(6.0), None]),
            ("c", vec![Some(1.0), Some(5.0), Some(9.0), None]),
        ])
        .unwrap();
        let out = impute_table(&t, GranularConfig::new(2, 2)).unwrap();
        assert_eq!(out.provenance.len(), 3);
        for p in &out.provenance {
            assert_eq!(p.fallback, Fallback::ColumnMean);
        }
        assert_eq!(out.table.value(3, 2), Some(5.0));
    }

    #[test]
    fn single_observed_value_fills_column() {
        let t = Table::from_numeric_columns(vec![
            ("a", col(&[1.0, 2.0, 3.0, 4.0])),
            ("b", vec![None, Some(7.5), None, None]),
        ])
        .unwrap();
        let out = impute_table(&t, GranularConfig::default()).unwrap();
        for r in [0, 2, 3] {
            assert_eq!(out.table.value(r, 1), Some(7.5));
        }
    }

    #[test]
    fn empty_column_fills_zero() {
        let t = Table::from_numeric_columns(vec![("a", col(&[1.0, 2.0])), ("b", vec![None, None])])
            .unwrap();
        let out = impute_table(&t, GranularConfig::default()).unwrap();
        assert!(out
            .provenance
            .iter()
            .all(|p| p.fallback == Fallback::EmptyColumn));
        assert_eq!(out.table.value(0, 1), Some(0.0));
    }

    #[test]
    fn complete_table_unchanged() {
        let t = Table::from_rows(&[vec![1.0, 2.0], vec![3.0, 5.0], vec![4.0, 4.0]]).unwrap();
        let out = impute_table(&t, GranularConfig::default()).unwrap();
        assert!(out.provenance.is_empty());
        assert_eq!(out.table, t);
    }

    #[test]
    fn observed_cell_is_rejected() {
        let t = toy_balance_sheet();
        let imp = GranularImputer::new(&t, GranularConfig::default()).unwrap();
        assert!(imp.impute_cell(0, 0).is_err());
    }

    #[test]
    fn budget_enforced_on_large_tables() {
        let rows: Vec<Vec<f64>> = (0..50)
            .map(|i| (0..30).map(|j| ((i * j) % 7) as f64 + i as f64).collect())
            .collect();
        let t = Table::from_rows(&rows).unwrap();
        assert!(GranularImputer::new(&t, GranularConfig::new(20, 7)).is_err());
        assert!(GranularImputer::new(&t, GranularConfig::new(5, 7)).is_ok());
    }

    #[test]
    fn label_column_untouched() {
        let t = Table::from_numeric_columns(vec![
            ("a", col(&[1.0, 2.0, 3.0])),
            ("class", vec![Some(0.0), None, Some(1.0)]),
        ])
        .unwrap()
        .with_label("class")
        .unwrap();
        let out = impute_table(&t, GranularConfig::default()).unwrap();
        assert!(out.provenance.is_empty());
        assert!(out.table.is_missing(1, 1));
    }
}

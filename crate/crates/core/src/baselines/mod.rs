//! Synthetic masking, normalized imputation error, and sweeps comparing the
//! granular imputer with mean, kNN and chained-equation baselines.

mod imputers;

use std::str::FromStr;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use imputers::{knn_imputer, mean_imputer, mice_lite_imputer};

use crate::data_model::Table;
use crate::error::{Error, Result};
use crate::imputer::{impute_table, GranularConfig, ImputedTable};

/// Cells hidden for a synthetic imputation run.
#[derive(Clone, Debug, PartialEq)]
pub struct MaskingPlan {
    pub rate: f64,
    pub rng_seed: u64,
    /// `(row, col)` pairs in row-major order.
    pub cells: Vec<(usize, usize)>,
}

impl MaskingPlan {
    /// Draws `round(rate × eligible)` cells uniformly without replacement from
    /// the observed feature cells of `t`.
    pub fn draw(t: &Table, rate: f64, rng_seed: u64) -> Result<Self> {
        if !(rate > 0.0 && rate < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "masking rate {rate} is outside (0, 1)"
            )));
        }
        let eligible: Vec<(usize, usize)> = (0..t.n_rows())
            .flat_map(|r| t.feature_indices().into_iter().map(move |c| (r, c)))
            .filter(|&(r, c)| !t.is_missing(r, c))
            .collect();
        let count = (rate * eligible.len() as f64).round() as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        let mut picked: Vec<usize> = index::sample(&mut rng, eligible.len(), count).into_vec();
        picked.sort_unstable();
        Ok(MaskingPlan {
            rate,
            rng_seed,
            cells: picked.into_iter().map(|i| eligible[i]).collect(),
        })
    }
}

/// Hides the planned cells. Returns the masked table and the hidden values in
/// plan order.
pub fn apply_mask(t: &Table, plan: &MaskingPlan) -> Result<(Table, Vec<f64>)> {
    if !(plan.rate > 0.0 && plan.rate < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "masking rate {} is outside (0, 1)",
            plan.rate
        )));
    }
    let mut out = t.clone();
    let mut truth = Vec::with_capacity(plan.cells.len());
    for &(r, c) in &plan.cells {
        if Some(c) == t.label() {
            return Err(Error::InvalidParameter(
                "cannot mask the label column".into(),
            ));
        }
        let v = t.value(r, c).ok_or_else(|| {
            Error::InvalidParameter(format!("cell ({r}, {c}) is already missing"))
        })?;
        truth.push(v);
        out.set_numeric(r, c, None);
    }
    Ok((out, truth))
}

/// Observed value range of a column.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ColumnRange {
    pub min: f64,
    pub max: f64,
}

impl ColumnRange {
    pub fn of(values: &[Option<f64>]) -> Option<ColumnRange> {
        let mut it = values.iter().flatten();
        let first = *it.next()?;
        let (min, max) = it.fold((first, first), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        Some(ColumnRange { min, max })
    }
}

/// `|truth − pred| / (max − min)` over the column's range.
///
/// A constant column scores 0 for an exact prediction and 1 otherwise.
pub fn error_metric(truth: f64, pred: f64, range: ColumnRange) -> f64 {
    let span = range.max - range.min;
    if span > 0.0 {
        (truth - pred).abs() / span
    } else {
        log::debug!("constant column in error metric");
        if truth == pred {
            0.0
        } else {
            1.0
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ImputerKind {
    #[serde(rename = "gs")]
    Granular,
    #[serde(rename = "mean")]
    Mean,
    #[serde(rename = "knn")]
    Knn,
    #[serde(rename = "mice")]
    Mice,
}

impl ImputerKind {
    pub fn name(self) -> &'static str {
        match self {
            ImputerKind::Granular => "gs",
            ImputerKind::Mean => "mean",
            ImputerKind::Knn => "knn",
            ImputerKind::Mice => "mice",
        }
    }
}

impl FromStr for ImputerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "gs" => Ok(ImputerKind::Granular),
            "mean" => Ok(ImputerKind::Mean),
            "knn" => Ok(ImputerKind::Knn),
            "mice" => Ok(ImputerKind::Mice),
            other => Err(Error::InvalidParameter(format!(
                "unknown imputer `{other}`"
            ))),
        }
    }
}

/// Tuning shared by every imputer in a sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepSettings {
    pub granular: GranularConfig,
    pub knn_k: usize,
    pub mice_sweeps: usize,
}

impl Default for SweepSettings {
    fn default() -> Self {
        SweepSettings {
            granular: GranularConfig::default(),
            knn_k: 5,
            mice_sweeps: 5,
        }
    }
}

pub fn run_imputer(kind: ImputerKind, t: &Table, s: &SweepSettings) -> Result<ImputedTable> {
    match kind {
        ImputerKind::Granular => impute_table(t, s.granular),
        ImputerKind::Mean => mean_imputer(t),
        ImputerKind::Knn => knn_imputer(t, s.knn_k),
        ImputerKind::Mice => mice_lite_imputer(t, s.mice_sweeps),
    }
}

/// Error summary for one imputer at one masking rate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ImputationErrorReport {
    pub rate: f64,
    pub imputer: ImputerKind,
    pub n_cells: usize,
    pub mean_err: f64,
    pub median_err: f64,
    pub p90_err: f64,
    /// Per-cell errors in plan order.
    #[serde(skip)]
    pub errors: Vec<f64>,
}

/// Linear-interpolated quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

impl ImputationErrorReport {
    pub fn from_errors(rate: f64, imputer: ImputerKind, errors: Vec<f64>) -> Self {
        let mut sorted = errors.clone();
        sorted.sort_by(f64::total_cmp);
        let mean = if errors.is_empty() {
            0.0
        } else {
            errors.iter().sum::<f64>() / errors.len() as f64
        };
        ImputationErrorReport {
            rate,
            imputer,
            n_cells: errors.len(),
            mean_err: mean,
            median_err: quantile(&sorted, 0.5),
            p90_err: quantile(&sorted, 0.9),
            errors,
        }
    }
}

/// Masks `t`, imputes with `kind`, and scores the hidden cells.
pub fn score_imputer(
    t: &Table,
    plan: &MaskingPlan,
    kind: ImputerKind,
    settings: &SweepSettings,
) -> Result<ImputationErrorReport> {
    let (masked, truth) = apply_mask(t, plan)?;
    let imputed = run_imputer(kind, &masked, settings)?;
    let ranges: Vec<Option<ColumnRange>> = (0..t.n_cols())
        .map(|c| t.numeric(c).ok().and_then(ColumnRange::of))
        .collect();
    let errors = plan
        .cells
        .iter()
        .zip(&truth)
        .map(|(&(r, c), &v)| {
            let pred = imputed.table.value(r, c).ok_or_else(|| {
                Error::InvariantBreach(format!("imputer left cell ({r}, {c}) empty"))
            })?;
            let range = ranges[c].expect("masked column has observed cells");
            Ok(error_metric(v, pred, range))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(ImputationErrorReport::from_errors(plan.rate, kind, errors))
}

/// One report per `rate × imputer`, rates outermost.
///
/// Each rate draws its mask with seed `seed + rate_index`, and every imputer
/// at that rate sees the same hidden cells.
pub fn impurity_sweep(
    t: &Table,
    rates: &[f64],
    imputers: &[ImputerKind],
    seed: u64,
    settings: &SweepSettings,
) -> Result<Vec<ImputationErrorReport>> {
    t.require_numeric_features()?;
    let mut out = Vec::with_capacity(rates.len() * imputers.len());
    for (i, &rate) in rates.iter().enumerate() {
        let plan = MaskingPlan::draw(t, rate, seed.wrapping_add(i as u64))?;
        for &kind in imputers {
            log::info!(
                "sweep rate={rate} imputer={} cells={}",
                kind.name(),
                plan.cells.len()
            );
            out.push(score_imputer(t, &plan, kind, settings)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, d: usize) -> Table {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..d).map(|j| (i * d + j) as f64).collect())
            .collect();
        Table::from_rows(&rows).unwrap()
    }

    #[test]
    fn masks_five_percent() {
        let t = grid(100, 10);
        let plan = MaskingPlan::draw(&t, 0.05, 1).unwrap();
        assert_eq!(plan.cells.len(), 50);
        let (masked, truth) = apply_mask(&t, &plan).unwrap();
        assert_eq!(masked.missing_feature_cells(), 50);
        for (&(r, c), v) in plan.cells.iter().zip(truth) {
            assert_eq!(t.value(r, c), Some(v));
        }
    }

    #[test]
    fn same_seed_same_cells() {
        let t = grid(40, 5);
        assert_eq!(
            MaskingPlan::draw(&t, 0.3, 9).unwrap(),
            MaskingPlan::draw(&t, 0.3, 9).unwrap()
        );
        assert_ne!(
            MaskingPlan::draw(&t, 0.3, 9).unwrap().cells,
            MaskingPlan::draw(&t, 0.3, 10).unwrap().cells
        );
    }

    #[test]
    fn single_cell_plan() {
        let t = grid(10, 10);
        let plan = MaskingPlan::draw(&t, 0.01, 3).unwrap();
        assert_eq!(plan.cells.len(), 1);
    }

    #[test]
    fn rate_bounds() {
        let t = grid(4, 2);
        assert!(MaskingPlan::draw(&t, 0.0, 1).is_err());
        assert!(MaskingPlan::draw(&t, 1.0, 1).is_err());
    }

    #[test]
    fn masking_skips_label_and_missing_cells() {
        let t = Table::from_numeric_columns(vec![
            ("a", vec![Some(1.0), None, Some(3.0), Some(4.0)]),
            ("class", vec![Some(0.0), Some(1.0), Some(0.0), Some(1.0)]),
        ])
        .unwrap()
        .with_label("class")
        .unwrap();
        let plan = MaskingPlan::draw(&t, 0.9, 5).unwrap();
        assert_eq!(plan.cells.len(), 3);
        assert!(plan.cells.iter().all(|&(r, c)| c == 0 && r != 1));
    }

    #[test]
    fn metric_values() {
        let r = ColumnRange {
            min: 0.0,
            max: 10.0,
        };
        assert_eq!(error_metric(3.0, 3.0, r), 0.0);
        assert!((error_metric(4.0, 6.0, r) - 0.2).abs() < 1e-15);
        let flat = ColumnRange { min: 2.0, max: 2.0 };
        assert_eq!(error_metric(2.0, 2.0, flat), 0.0);
        assert_eq!(error_metric(2.0, 2.5, flat), 1.0);
    }

    #[test]
    fn sweep_cross_product() {
        let rows: Vec<Vec<f64>> = (0..60)
            .map(|i| {
                let z = (i as f64 * 0.7).sin();
                (0..6).map(|j| z * (j + 1) as f64 + j as f64).collect()
            })
            .collect();
        let t = Table::from_rows(&rows).unwrap();
        let kinds = [
            ImputerKind::Granular,
            ImputerKind::Mean,
            ImputerKind::Knn,
            ImputerKind::Mice,
        ];
        let reports = impurity_sweep(
            &t,
            &[0.05, 0.1, 0.2, 0.3],
            &kinds,
            42,
            &SweepSettings::default(),
        )
        .unwrap();
        assert_eq!(reports.len(), 16);
        assert_eq!(reports[0].imputer, ImputerKind::Granular);
        assert_eq!(reports[3].imputer, ImputerKind::Mice);
        assert_eq!(reports[4].rate, 0.1);
    }

    #[test]
    fn quantiles_interpolate() {
        let r =
            ImputationErrorReport::from_errors(0.1, ImputerKind::Mean, vec![0.4, 0.1, 0.3, 0.2]);
        assert!((r.mean_err - 0.25).abs() < 1e-15);
        assert!((r.median_err - 0.25).abs() < 1e-15);
        assert!((r.p90_err - 0.37).abs() < 1e-12);
    }
}

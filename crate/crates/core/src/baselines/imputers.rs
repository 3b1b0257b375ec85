//! Reference imputers to compare the granular method against.

use rayon::prelude::*;

use crate::data_model::{build_mask, Table};
use crate::error::Result;
use crate::imputer::{
    column_mean, least_squares, Fallback, ImputedTable, Method, Provenance, Ridge,
};
use crate::linalg::Matrix;

/// Ridge strength for the chained-equation regressions.
const MICE_RIDGE: f64 = 1e-6;

/// Feature column indices and their cells.
type FeatureColumns<'a> = (Vec<usize>, Vec<&'a [Option<f64>]>);

fn numeric_features(t: &Table) -> Result<FeatureColumns<'_>> {
    t.require_numeric_features()?;
    let cols = t.feature_indices();
    let data = cols.iter().map(|&c| t.numeric(c)).collect::<Result<_>>()?;
    Ok((cols, data))
}

fn mean_or_zero(
    row: usize,
    col: usize,
    mean: Option<f64>,
    method: Method,
    primary: bool,
) -> Provenance {
    match mean {
        Some(m) => {
            let fb = if primary {
                Fallback::None
            } else {
                Fallback::ColumnMean
            };
            Provenance::simple(row, col, m, method, fb)
        }
        None => Provenance::simple(row, col, 0.0, method, Fallback::EmptyColumn),
    }
}

/// Fills each missing feature cell with its column's observed mean.
#[allow(clippy::needless_range_loop)]
pub fn mean_imputer(t: &Table) -> Result<ImputedTable> {
    let (cols, data) = numeric_features(t)?;
    let means: Vec<Option<f64>> = data.iter().map(|c| column_mean(c)).collect();
    let mut prov = Vec::new();
    for r in 0..t.n_rows() {
        for (k, &c) in cols.iter().enumerate() {
            if data[k][r].is_none() {
                prov.push(mean_or_zero(r, c, means[k], Method::Mean, true));
            }
        }
    }
    Ok(ImputedTable::assemble(t, prov))
}

/// Fills each missing cell with the mean of that column over the `k` nearest
/// rows observed there.
///
/// Distance is the root-mean-square difference over features observed in both
/// rows, each scaled by its observed range. Rows sharing no observed feature
/// are never donors. Ties go to the lower row index.
pub fn knn_imputer(t: &Table, k: usize) -> Result<ImputedTable> {
    let (cols, data) = numeric_features(t)?;
    let n = t.n_rows();
    let d = cols.len();
    let k = k.max(1);
    let means: Vec<Option<f64>> = data.iter().map(|c| column_mean(c)).collect();
    let inv_range: Vec<f64> = data
        .iter()
        .map(|c| {
            let (lo, hi) = c
                .iter()
                .flatten()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                    (lo.min(v), hi.max(v))
                });
            if hi > lo {
                1.0 / (hi - lo)
            } else {
                0.0
            }
        })
        .collect();
    // Row-major copy with NaN for missing, so the distance loop stays tight.
    let mut dense = vec![f64::NAN; n * d];
    for (j, c) in data.iter().enumerate() {
        for (r, v) in c.iter().enumerate() {
            if let Some(v) = v {
                dense[r * d + j] = v * inv_range[j];
            }
        }
    }
    let incomplete: Vec<usize> = (0..n)
        .filter(|&r| data.iter().any(|c| c[r].is_none()))
        .collect();

    let per_row: Vec<Vec<Provenance>> = incomplete
        .par_iter()
        .map(|&r| {
            let a = &dense[r * d..(r + 1) * d];
            let mut cand: Vec<(f64, usize)> = (0..n)
                .filter(|&o| o != r)
                .filter_map(|o| {
                    let b = &dense[o * d..(o + 1) * d];
                    let (mut s, mut m) = (0.0, 0usize);
                    for (x, y) in a.iter().zip(b) {
                        let diff = x - y;
                        if !diff.is_nan() {
                            s += diff * diff;
                            m += 1;
                        }
                    }
                    (m > 0).then(|| ((s / m as f64).sqrt(), o))
                })
                .collect();
            cand.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
            let mut out = Vec::new();
            for (j, &c) in cols.iter().enumerate() {
                if data[j][r].is_some() {
                    continue;
                }
                let donors: Vec<f64> = cand
                    .iter()
                    .filter_map(|&(_, o)| data[j][o])
                    .take(k)
                    .collect();
                if donors.is_empty() {
                    out.push(mean_or_zero(r, c, means[j], Method::Knn, false));
                } else {
                    let v = donors.iter().sum::<f64>() / donors.len() as f64;
                    out.push(Provenance::simple(r, c, v, Method::Knn, Fallback::None));
                }
            }
            out
        })
        .collect();
    Ok(ImputedTable::assemble(
        t,
        per_row.into_iter().flatten().collect(),
    ))
}

/// Chained-equation imputation with one linear model per incomplete column.
///
/// Missing cells start at their column means. Each sweep then regresses every
/// incomplete column (ascending) on all other feature columns at their current
/// values, fitting on the column's observed rows, and overwrites its missing
/// cells with the predictions.
#[allow(clippy::needless_range_loop)]
pub fn mice_lite_imputer(t: &Table, sweeps: usize) -> Result<ImputedTable> {
    let (cols, data) = numeric_features(t)?;
    let n = t.n_rows();
    let d = cols.len();
    let means: Vec<Option<f64>> = data.iter().map(|c| column_mean(c)).collect();
    let mut current = Matrix::zeros(n, d);
    for (j, c) in data.iter().enumerate() {
        for (r, v) in c.iter().enumerate() {
            current.set(r, j, v.or(means[j]).unwrap_or(0.0));
        }
    }
    let mask = build_mask(t);
    let observed: Vec<Vec<usize>> = cols
        .iter()
        .map(|&c| (0..n).filter(|&r| mask.is_observed(r, c)).collect())
        .collect();
    let incomplete: Vec<usize> = (0..d)
        .filter(|&j| observed[j].len() < n && !observed[j].is_empty())
        .collect();

    for _ in 0..sweeps {
        for &j in &incomplete {
            let others: Vec<usize> = (0..d).filter(|&o| o != j).collect();
            let x = current.select_rows(&observed[j]).select_cols(&others);
            let y: Vec<f64> = observed[j].iter().map(|&r| current.get(r, j)).collect();
            let model = least_squares(&x, &y, Ridge::Fixed(MICE_RIDGE));
            let mut row = vec![0.0; others.len()];
            for r in (0..n).filter(|&r| !mask.is_observed(r, cols[j])) {
                for (slot, &o) in row.iter_mut().zip(&others) {
                    *slot = current.get(r, o);
                }
                let v = model.predict(&row);
                if v.is_finite() {
                    current.set(r, j, v);
                }
            }
        }
    }

    let mut prov = Vec::new();
    for r in 0..n {
        for (j, &c) in cols.iter().enumerate() {
            if data[j][r].is_none() {
                prov.push(match means[j] {
                    Some(_) => {
                        Provenance::simple(r, c, current.get(r, j), Method::Mice, Fallback::None)
                    }
                    None => Provenance::simple(r, c, 0.0, Method::Mice, Fallback::EmptyColumn),
                });
            }
        }
    }
    Ok(ImputedTable::assemble(t, prov))
}

use serde::{Deserialize, Serialize};

use crate::data_model::table::{Column, Table};
use crate::error::{Error, Result};

/// Mean and population standard deviation over a column's observed cells.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnMoments {
    pub mean: f64,
    pub std_dev: f64,
}

impl ColumnMoments {
    /// `None` when the column has no observed cells.
    pub fn of(values: &[Option<f64>]) -> Option<ColumnMoments> {
        let n = values.iter().flatten().count();
        if n == 0 {
            return None;
        }
        let mean = values.iter().flatten().sum::<f64>() / n as f64;
        let var = values
            .iter()
            .flatten()
            .map(|x| (x - mean) * (x - mean))
            .sum::<f64>()
            / n as f64;
        Some(ColumnMoments {
            mean,
            std_dev: var.sqrt(),
        })
    }
}

/// Per-column moments used by [`standardize`]; `None` for the label column and
/// for columns with no observed cells.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StandardizationParams {
    pub columns: Vec<Option<ColumnMoments>>,
}

/// Zero-mean, unit-variance scaling of each feature column over its observed
/// cells. Constant columns map to 0.
pub fn standardize(t: &Table) -> Result<(Table, StandardizationParams)> {
    t.require_numeric_features()?;
    let mut out = t.clone();
    let mut params = vec![None; t.n_cols()];
    for j in t.feature_indices() {
        let col = t.numeric(j)?;
        let Some(m) = ColumnMoments::of(col) else {
            continue;
        };
        let scaled = col
            .iter()
            .map(|v| {
                v.map(|x| {
                    if m.std_dev > 0.0 {
                        (x - m.mean) / m.std_dev
                    } else {
                        0.0
                    }
                })
            })
            .collect();
        out.replace_column(j, Column::Numeric(scaled));
        params[j] = Some(m);
    }
    Ok((out, StandardizationParams { columns: params }))
}

pub fn inverse_standardize(t: &Table, p: &StandardizationParams) -> Result<Table> {
    if p.columns.len() != t.n_cols() {
        return Err(Error::ShapeMismatch(format!(
            "params cover {} columns, table has {}",
            p.columns.len(),
            t.n_cols()
        )));
    }
    let mut out = t.clone();
    for (j, m) in p.columns.iter().enumerate() {
        let Some(m) = m else { continue };
        let restored = t
            .numeric(j)?
            .iter()
            .map(|v| v.map(|z| z * m.std_dev + m.mean))
            .collect();
        out.replace_column(j, Column::Numeric(restored));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_col(v: Vec<Option<f64>>) -> Table {
        Table::from_numeric_columns(vec![("a", v)]).unwrap()
    }

    #[test]
    fn two_point_symmetry() {
        let (s, p) = standardize(&one_col(vec![Some(2.0), Some(4.0)])).unwrap();
        assert_eq!(s.numeric(0).unwrap(), &[Some(-1.0), Some(1.0)]);
        assert_eq!(
            p.columns[0],
            Some(ColumnMoments {
                mean: 3.0,
                std_dev: 1.0
            })
        );
    }

    #[test]
    fn constant_column_maps_to_zero() {
        let (s, _) = standardize(&one_col(vec![Some(5.0); 3])).unwrap();
        assert_eq!(s.numeric(0).unwrap(), &[Some(0.0); 3]);
    }

    #[test]
    fn missing_cells_skipped() {
        // mean over {1,3} = 2, population σ = 1
        let (s, p) = standardize(&one_col(vec![Some(1.0), None, Some(3.0)])).unwrap();
        assert_eq!(s.numeric(0).unwrap(), &[Some(-1.0), None, Some(1.0)]);
        assert_eq!(p.columns[0].unwrap().mean, 2.0);
    }

    #[test]
    fn label_is_untouched() {
        let t = Table::from_numeric_columns(vec![
            ("x", vec![Some(1.0), Some(3.0)]),
            ("y", vec![Some(0.0), Some(1.0)]),
        ])
        .unwrap()
        .with_label("y")
        .unwrap();
        let (s, p) = standardize(&t).unwrap();
        assert_eq!(s.numeric(1).unwrap(), t.numeric(1).unwrap());
        assert!(p.columns[1].is_none());
    }

    #[test]
    fn inverse_rejects_shape_mismatch() {
        let t = one_col(vec![Some(1.0)]);
        let p = StandardizationParams {
            columns: vec![None, None],
        };
        assert!(matches!(
            inverse_standardize(&t, &p),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn categorical_input_rejected() {
        let t = Table::new(
            vec!["c".into()],
            vec![Column::Categorical(vec![Some("x".into())])],
            None,
        )
        .unwrap();
        assert!(matches!(standardize(&t), Err(Error::NotNumeric(_))));
    }
}

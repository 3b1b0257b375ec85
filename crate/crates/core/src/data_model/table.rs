use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Numeric,
    Categorical,
}

/// One column of cells. `None` marks a missing cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Column {
    Numeric(Vec<Option<f64>>),
    Categorical(Vec<Option<String>>),
}

impl Column {
    pub fn len(&self) -> usize {
        match self {
            Column::Numeric(v) => v.len(),
            Column::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> FeatureKind {
        match self {
            Column::Numeric(_) => FeatureKind::Numeric,
            Column::Categorical(_) => FeatureKind::Categorical,
        }
    }

    pub fn is_missing(&self, row: usize) -> bool {
        match self {
            Column::Numeric(v) => v[row].is_none(),
            Column::Categorical(v) => v[row].is_none(),
        }
    }

    pub fn as_numeric(&self) -> Option<&[Option<f64>]> {
        match self {
            Column::Numeric(v) => Some(v),
            Column::Categorical(_) => None,
        }
    }
}

/// Column-oriented `N×d` table with typed features and explicit missing cells.
///
/// The optional label column is carried along but excluded from imputation,
/// correlation and standardization.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    names: Vec<String>,
    columns: Vec<Column>,
    label: Option<usize>,
    n_rows: usize,
}

impl Table {
    pub fn new(names: Vec<String>, columns: Vec<Column>, label: Option<usize>) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} names for {} columns",
                names.len(),
                columns.len()
            )));
        }
        let mut seen = HashSet::new();
        for n in &names {
            if !seen.insert(n.as_str()) {
                return Err(Error::DuplicateName(n.clone()));
            }
        }
        let n_rows = columns.first().map_or(0, Column::len);
        for (name, col) in names.iter().zip(&columns) {
            if col.len() != n_rows {
                return Err(Error::ColumnLength {
                    name: name.clone(),
                    expected: n_rows,
                    found: col.len(),
                });
            }
            if let Column::Numeric(v) = col {
                if v.iter().flatten().any(|x| !x.is_finite()) {
                    return Err(Error::NonFinite(name.clone()));
                }
            }
        }
        if let Some(l) = label {
            if l >= columns.len() {
                return Err(Error::InvalidParameter(format!(
                    "label index {l} out of range"
                )));
            }
        }
        Ok(Table {
            names,
            columns,
            label,
            n_rows,
        })
    }

    /// All-numeric table from named columns, no label.
    pub fn from_numeric_columns<S: Into<String>>(cols: Vec<(S, Vec<Option<f64>>)>) -> Result<Self> {
        let (names, columns) = cols
            .into_iter()
            .map(|(n, c)| (n.into(), Column::Numeric(c)))
            .unzip();
        Table::new(names, columns, None)
    }

    /// All-numeric, complete table from row-major data with generated names `x0, x1, …`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        let mut cols = vec![Vec::with_capacity(rows.len()); d];
        for (i, r) in rows.iter().enumerate() {
            if r.len() != d {
                return Err(Error::RaggedRow {
                    line: i + 1,
                    expected: d,
                    found: r.len(),
                });
            }
            for (c, &v) in cols.iter_mut().zip(r) {
                c.push(Some(v));
            }
        }
        Table::from_numeric_columns(
            cols.into_iter()
                .enumerate()
                .map(|(j, c)| (format!("x{j}"), c))
                .collect(),
        )
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn kinds(&self) -> Vec<FeatureKind> {
        self.columns.iter().map(Column::kind).collect()
    }

    pub fn label(&self) -> Option<usize> {
        self.label
    }

    pub fn column(&self, j: usize) -> &Column {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Designates the named column as the class label.
    pub fn with_label(mut self, name: &str) -> Result<Self> {
        let idx = self
            .column_index(name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))?;
        self.label = Some(idx);
        Ok(self)
    }

    pub fn without_label(mut self) -> Self {
        self.label = None;
        self
    }

    /// Indices of every non-label column, ascending.
    pub fn feature_indices(&self) -> Vec<usize> {
        (0..self.n_cols())
            .filter(|&j| Some(j) != self.label)
            .collect()
    }

    pub fn is_missing(&self, row: usize, col: usize) -> bool {
        self.columns[col].is_missing(row)
    }

    /// Numeric view of a column; errors on categorical columns.
    pub fn numeric(&self, col: usize) -> Result<&[Option<f64>]> {
        self.columns[col]
            .as_numeric()
            .ok_or_else(|| Error::NotNumeric(self.names[col].clone()))
    }

    /// Numeric cell value; `None` when missing or categorical.
    pub fn value(&self, row: usize, col: usize) -> Option<f64> {
        match &self.columns[col] {
            Column::Numeric(v) => v[row],
            Column::Categorical(_) => None,
        }
    }

    pub fn is_all_numeric(&self) -> bool {
        self.columns
            .iter()
            .all(|c| c.kind() == FeatureKind::Numeric)
    }

    pub(crate) fn require_numeric_features(&self) -> Result<()> {
        for j in self.feature_indices() {
            self.numeric(j)?;
        }
        Ok(())
    }

    /// Count of missing cells among feature (non-label) columns.
    pub fn missing_feature_cells(&self) -> usize {
        self.feature_indices()
            .into_iter()
            .map(|j| (0..self.n_rows).filter(|&r| self.is_missing(r, j)).count())
            .sum()
    }

    pub(crate) fn set_numeric(&mut self, row: usize, col: usize, v: Option<f64>) {
        match &mut self.columns[col] {
            Column::Numeric(c) => c[row] = v,
            Column::Categorical(_) => panic!("set_numeric on categorical column"),
        }
    }

    pub(crate) fn replace_column(&mut self, col: usize, c: Column) {
        assert_eq!(c.len(), self.n_rows);
        self.columns[col] = c;
    }

    /// Binary 0/1 labels from the label column.
    ///
    /// The label column must hold exactly two distinct non-missing values; the
    /// larger value (numeric) or later token (categorical, byte order) is the
    /// positive class.
    pub fn binary_labels(&self) -> Result<Vec<u8>> {
        let l = self.label.ok_or(Error::NoLabel)?;
        match &self.columns[l] {
            Column::Numeric(v) => {
                let mut distinct: Vec<f64> = v.iter().flatten().copied().collect();
                distinct.sort_by(f64::total_cmp);
                distinct.dedup();
                if distinct.len() != 2 {
                    return Err(Error::NotBinary(distinct.len()));
                }
                v.iter()
                    .enumerate()
                    .map(|(r, x)| match x {
                        Some(x) => Ok(u8::from(*x == distinct[1])),
                        None => Err(Error::MissingValue { row: r, col: l }),
                    })
                    .collect()
            }
            Column::Categorical(v) => {
                let mut distinct: Vec<&str> = v.iter().flatten().map(String::as_str).collect();
                distinct.sort_unstable();
                distinct.dedup();
                if distinct.len() != 2 {
                    return Err(Error::NotBinary(distinct.len()));
                }
                let pos = distinct[1].to_string();
                v.iter()
                    .enumerate()
                    .map(|(r, x)| match x {
                        Some(x) => Ok(u8::from(*x == pos)),
                        None => Err(Error::MissingValue { row: r, col: l }),
                    })
                    .collect()
            }
        }
    }

    /// Dense matrix of the given numeric columns; errors on any missing cell.
    pub fn to_matrix(&self, cols: &[usize]) -> Result<Matrix> {
        let mut m = Matrix::zeros(self.n_rows, cols.len());
        for (k, &j) in cols.iter().enumerate() {
            let c = self.numeric(j)?;
            for (r, v) in c.iter().enumerate() {
                match v {
                    Some(x) => m.set(r, k, *x),
                    None => return Err(Error::MissingValue { row: r, col: j }),
                }
            }
        }
        Ok(m)
    }

    /// Sub-table with the given columns, in order. The label follows if kept.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Table> {
        let names = cols.iter().map(|&j| self.names[j].clone()).collect();
        let columns = cols.iter().map(|&j| self.columns[j].clone()).collect();
        let label = self.label.and_then(|l| cols.iter().position(|&j| j == l));
        Table::new(names, columns, label)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicate_names() {
        let err = Table::from_numeric_columns(vec![("a", vec![Some(1.0)]), ("a", vec![Some(2.0)])]);
        assert!(matches!(err, Err(Error::DuplicateName(_))));
    }

    #[test]
    fn rejects_non_finite() {
        let err = Table::from_numeric_columns(vec![("a", vec![Some(f64::NAN)])]);
        assert!(matches!(err, Err(Error::NonFinite(_))));
    }

    #[test]
    fn rejects_ragged_columns() {
        let err = Table::from_numeric_columns(vec![("a", vec![Some(1.0)]), ("b", vec![])]);
        assert!(matches!(err, Err(Error::ColumnLength { .. })));
    }

    #[test]
    fn binary_labels_from_tokens() {
        let t = Table::new(
            vec!["x".into(), "class".into()],
            vec![
                Column::Numeric(vec![Some(1.0), Some(2.0), Some(3.0)]),
                Column::Categorical(vec![Some("0".into()), Some("1".into()), Some("0".into())]),
            ],
            Some(1),
        )
        .unwrap();
        assert_eq!(t.binary_labels().unwrap(), vec![0, 1, 0]);
        assert_eq!(t.feature_indices(), vec![0]);
    }

    #[test]
    fn three_classes_is_not_binary() {
        let t = Table::from_numeric_columns(vec![("y", vec![Some(0.0), Some(1.0), Some(2.0)])])
            .unwrap()
            .with_label("y")
            .unwrap();
        assert!(matches!(t.binary_labels(), Err(Error::NotBinary(3))));
    }
}

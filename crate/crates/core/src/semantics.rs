//! Pairwise-complete Pearson correlation between feature columns and
//! selection of the features most correlated with a target column.

use rayon::prelude::*;

use crate::data_model::{MaskMatrix, Table};
use crate::error::{Error, Result};

/// Correlations between the non-label columns of a table.
///
/// Indexed by table column index via [`CorrelationMatrix::rho`]; pairs with
/// fewer than two complete rows or zero variance score 0 and are flagged.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationMatrix {
    columns: Vec<usize>,
    position: Vec<Option<usize>>,
    rho: Vec<f64>,
    support: Vec<usize>,
    degenerate: Vec<bool>,
}

impl CorrelationMatrix {
    /// Number of feature columns `d'`.
    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    /// Table column indices covered, ascending.
    pub fn columns(&self) -> &[usize] {
        &self.columns
    }

    pub fn contains(&self, col: usize) -> bool {
        self.pos(col).is_some()
    }

    fn pos(&self, col: usize) -> Option<usize> {
        self.position.get(col).copied().flatten()
    }

    fn at(&self, x: usize, y: usize) -> usize {
        let (px, py) = (
            self.pos(x).expect("column not in correlation matrix"),
            self.pos(y).expect("column not in correlation matrix"),
        );
        px * self.dim() + py
    }

    /// Correlation between table columns `x` and `y`. Panics if either is the label.
    pub fn rho(&self, x: usize, y: usize) -> f64 {
        self.rho[self.at(x, y)]
    }

    /// Rows where both columns are observed.
    pub fn support(&self, x: usize, y: usize) -> usize {
        self.support[self.at(x, y)]
    }

    pub fn is_degenerate(&self, x: usize, y: usize) -> bool {
        self.degenerate[self.at(x, y)]
    }

    /// Every other feature ranked by `|ρ|` descending, ties to the lower column.
    pub fn ranked(&self, beta: usize) -> Vec<(usize, f64)> {
        let mut out: Vec<(usize, f64)> = self
            .columns
            .iter()
            .filter(|&&c| c != beta)
            .map(|&c| (c, self.rho(beta, c).abs()))
            .collect();
        out.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        out
    }

    /// `d'×d'` matrix as CSV with a header of column names.
    pub fn to_csv(&self, t: &Table) -> String {
        let names: Vec<&str> = self
            .columns
            .iter()
            .map(|&c| t.names()[c].as_str())
            .collect();
        let mut s = String::from(",");
        s.push_str(&names.join(","));
        s.push('\n');
        for (i, name) in names.iter().enumerate() {
            s.push_str(name);
            for j in 0..self.dim() {
                s.push(',');
                s.push_str(&self.rho[i * self.dim() + j].to_string());
            }
            s.push('\n');
        }
        s
    }
}

fn pearson_pairwise(x: &[Option<f64>], y: &[Option<f64>]) -> (f64, usize, bool) {
    let pairs = || x.iter().zip(y).filter_map(|(a, b)| Some(((*a)?, (*b)?)));
    let n = pairs().count();
    if n < 2 {
        return (0.0, n, true);
    }
    let nf = n as f64;
    let (sx, sy) = pairs().fold((0.0, 0.0), |(sx, sy), (a, b)| (sx + a, sy + b));
    let (mx, my) = (sx / nf, sy / nf);
    let (mut cxy, mut cxx, mut cyy) = (0.0, 0.0, 0.0);
    for (a, b) in pairs() {
        let (da, db) = (a - mx, b - my);
        cxy += da * db;
        cxx += da * da;
        cyy += db * db;
    }
    if cxx <= 0.0 || cyy <= 0.0 {
        return (0.0, n, true);
    }
    let r = (cxy / (cxx.sqrt() * cyy.sqrt())).clamp(-1.0, 1.0);
    (r, n, false)
}

/// Pearson correlation over pairwise-complete rows for every pair of feature columns.
pub fn correlation_matrix(t: &Table, mask: &MaskMatrix) -> Result<CorrelationMatrix> {
    if mask.n_rows() != t.n_rows() || mask.n_cols() != t.n_cols() {
        return Err(Error::ShapeMismatch("mask does not match table".into()));
    }
    t.require_numeric_features()?;
    let columns = t.feature_indices();
    let d = columns.len();
    let mut position = vec![None; t.n_cols()];
    for (p, &c) in columns.iter().enumerate() {
        position[c] = Some(p);
    }
    let data: Vec<&[Option<f64>]> = columns
        .iter()
        .map(|&c| t.numeric(c))
        .collect::<Result<_>>()?;

    let upper: Vec<Vec<(f64, usize, bool)>> = (0..d)
        .into_par_iter()
        .map(|i| (i..d).map(|j| pearson_pairwise(data[i], data[j])).collect())
        .collect();

    let mut rho = vec![0.0; d * d];
    let mut support = vec![0; d * d];
    let mut degenerate = vec![false; d * d];
    for (i, row) in upper.into_iter().enumerate() {
        for (k, (r, n, deg)) in row.into_iter().enumerate() {
            let j = i + k;
            let r = if i == j && !deg { 1.0 } else { r };
            for idx in [i * d + j, j * d + i] {
                rho[idx] = r;
                support[idx] = n;
                degenerate[idx] = deg;
            }
        }
    }
    Ok(CorrelationMatrix {
        columns,
        position,
        rho,
        support,
        degenerate,
    })
}

/// The `δ` features most correlated with a target column.
#[derive(Clone, Debug, PartialEq)]
pub struct SemanticFeatureSet {
    pub target: usize,
    pub members: Vec<usize>,
    /// `|ρ|` of each member with the target, non-increasing.
    pub scores: Vec<f64>,
}

/// Selects the `delta` columns with the largest `|ρ|` to `beta`.
///
/// `delta` larger than `d' − 1` is clamped with a warning.
pub fn semantic_features(
    corr: &CorrelationMatrix,
    beta: usize,
    delta: usize,
) -> Result<SemanticFeatureSet> {
    if delta == 0 {
        return Err(Error::InvalidParameter("delta must be at least 1".into()));
    }
    if !corr.contains(beta) {
        return Err(Error::InvalidParameter(format!(
            "column {beta} is not a feature column"
        )));
    }
    let available = corr.dim() - 1;
    if delta > available {
        log::warn!("delta {delta} exceeds the {available} other features; clamping");
    }
    let (members, scores) = corr.ranked(beta).into_iter().take(delta).unzip();
    Ok(SemanticFeatureSet {
        target: beta,
        members,
        scores,
    })
}

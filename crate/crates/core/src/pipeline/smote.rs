//! Synthetic minority oversampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::linalg::{squared_distance, Matrix};

/// A generated row and the two minority rows it interpolates.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticRow {
    pub values: Vec<f64>,
    /// Index into the minority rows passed to [`smote`].
    pub base: usize,
    pub neighbor: usize,
    pub u: f64,
}

/// `x + u·(nb − x)`.
pub fn synthesize(x: &[f64], nb: &[f64], u: f64) -> Vec<f64> {
    x.iter().zip(nb).map(|(a, b)| a + u * (b - a)).collect()
}

/// The `k` nearest other rows of each row, Euclidean, ties to the lower index.
fn neighbours(rows: &Matrix, k: usize) -> Vec<Vec<usize>> {
    (0..rows.rows())
        .map(|i| {
            let mut d: Vec<(f64, usize)> = (0..rows.rows())
                .filter(|&j| j != i)
                .map(|j| (squared_distance(rows.row(i), rows.row(j)), j))
                .collect();
            d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            d.into_iter().take(k).map(|(_, j)| j).collect()
        })
        .collect()
}

/// Generates `n_needed` synthetic rows from `minority`.
///
/// Base rows are taken round-robin in index order; each draws one neighbour
/// uniformly from its `k` nearest (`k` clamped to `m − 1`) and a gap
/// `u ∈ [0, 1)`. With fewer than two rows there is nothing to interpolate, so
/// the single row is duplicated (or nothing is produced for an empty set).
pub fn smote(minority: &Matrix, k: usize, n_needed: usize, seed: u64) -> Vec<SyntheticRow> {
    let m = minority.rows();
    if n_needed == 0 {
        return Vec::new();
    }
    if m < 2 {
        log::warn!("SMOTE needs two minority rows, found {m}; duplicating instead");
        if m == 0 {
            return Vec::new();
        }
        return (0..n_needed)
            .map(|_| SyntheticRow {
                values: minority.row(0).to_vec(),
                base: 0,
                neighbor: 0,
                u: 0.0,
            })
            .collect();
    }
    let k = k.clamp(1, m - 1);
    let nn = neighbours(minority, k);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_needed)
        .map(|i| {
            let base = i % m;
            let neighbor = nn[base][rng.random_range(0..k)];
            let u: f64 = rng.random();
            SyntheticRow {
                values: synthesize(minority.row(base), minority.row(neighbor), u),
                base,
                neighbor,
                u,
            }
        })
        .collect()
}

/// Where a row of a [`BalancedDataset`] came from, as indices into the
/// unbalanced input rows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RowOrigin {
    Original(usize),
    Synthetic { base: usize, neighbor: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct BalancedDataset {
    pub x: Matrix,
    pub y: Vec<u8>,
    pub origins: Vec<RowOrigin>,
}

impl BalancedDataset {
    /// `(negatives, positives)`.
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.y.iter().filter(|&&v| v == 1).count();
        (self.y.len() - pos, pos)
    }
}

/// Oversamples the smaller class until both classes have equal counts.
/// Original rows keep their order; synthetic rows follow.
pub fn balance(x: &Matrix, y: &[u8], k: usize, seed: u64) -> BalancedDataset {
    let pos: Vec<usize> = (0..y.len()).filter(|&i| y[i] == 1).collect();
    let neg: Vec<usize> = (0..y.len()).filter(|&i| y[i] == 0).collect();
    let (minority, label, need) = if pos.len() < neg.len() {
        let need = neg.len() - pos.len();
        (pos, 1u8, need)
    } else {
        let need = pos.len() - neg.len();
        (neg, 0u8, need)
    };
    let mut out = BalancedDataset {
        x: x.clone(),
        y: y.to_vec(),
        origins: (0..y.len()).map(RowOrigin::Original).collect(),
    };
    let synth = smote(&x.select_rows(&minority), k, need, seed);
    for s in synth {
        out.x.push_row(&s.values);
        out.y.push(label);
        out.origins.push(RowOrigin::Synthetic {
            base: minority[s.base],
            neighbor: minority[s.neighbor],
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gap_reproduces_base() {
        assert_eq!(synthesize(&[1.0, 2.0], &[5.0, -1.0], 0.0), vec![1.0, 2.0]);
    }

    #[test]
    fn parity_thirty_against_three_hundred() {
        let rows: Vec<Vec<f64>> = (0..330).map(|i| vec![i as f64, (i % 7) as f64]).collect();
        let y: Vec<u8> = (0..330).map(|i| u8::from(i < 30)).collect();
        let b = balance(&Matrix::from_rows(&rows), &y, 5, 1);
        assert_eq!(b.y.len(), 600);
        assert_eq!(b.class_counts(), (300, 300));
    }

    #[test]
    fn two_points_stay_on_segment() {
        let m = Matrix::from_rows(&[vec![0.0, 0.0], vec![2.0, 4.0]]);
        for s in smote(&m, 5, 50, 3) {
            let t = s.values[0] / 2.0;
            assert!((0.0..=1.0).contains(&t));
            assert!((s.values[1] - 4.0 * t).abs() < 1e-12);
        }
    }

    #[test]
    fn single_row_is_duplicated() {
        let m = Matrix::from_rows(&[vec![3.0, 1.0]]);
        let s = smote(&m, 5, 4, 0);
        assert_eq!(s.len(), 4);
        assert!(s.iter().all(|r| r.values == vec![3.0, 1.0]));
    }
}

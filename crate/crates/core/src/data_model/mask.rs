use crate::data_model::table::Table;

/// 0/1 missingness indicator, one entry per cell: 0 where the cell is missing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaskMatrix {
    n_rows: usize,
    n_cols: usize,
    observed: Vec<bool>,
}

impl MaskMatrix {
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        u8::from(self.is_observed(row, col))
    }

    #[inline]
    pub fn is_observed(&self, row: usize, col: usize) -> bool {
        self.observed[row * self.n_cols + col]
    }

    /// True when every listed column is observed in `row`.
    pub fn row_complete_on(&self, row: usize, cols: &[usize]) -> bool {
        let base = row * self.n_cols;
        cols.iter().all(|&c| self.observed[base + c])
    }

    pub fn zeros(&self) -> usize {
        self.observed.iter().filter(|o| !**o).count()
    }

    /// Zero count restricted to the given columns.
    pub fn zeros_in(&self, cols: &[usize]) -> usize {
        (0..self.n_rows)
            .map(|r| cols.iter().filter(|&&c| !self.is_observed(r, c)).count())
            .sum()
    }

    /// Missing cells among `cols`, in row-major order.
    pub fn missing_cells(&self, cols: &[usize]) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for r in 0..self.n_rows {
            for &c in cols {
                if !self.is_observed(r, c) {
                    out.push((r, c));
                }
            }
        }
        out
    }
}

pub fn build_mask(t: &Table) -> MaskMatrix {
    let (n, d) = (t.n_rows(), t.n_cols());
    let mut observed = vec![true; n * d];
    for c in 0..d {
        for r in 0..n {
            if t.is_missing(r, c) {
                observed[r * d + c] = false;
            }
        }
    }
    MaskMatrix {
        n_rows: n,
        n_cols: d,
        observed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_table_all_ones() {
        let t = Table::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let m = build_mask(&t);
        assert_eq!(m.zeros(), 0);
        assert!((0..2).all(|r| (0..2).all(|c| m.get(r, c) == 1)));
    }

    #[test]
    fn single_missing_cell() {
        let t = Table::from_numeric_columns(vec![("a", vec![None])]).unwrap();
        let m = build_mask(&t);
        assert_eq!(m.get(0, 0), 0);
        assert_eq!(m.zeros(), 1);
        assert_eq!(m.missing_cells(&[0]), vec![(0, 0)]);
    }
}

use crate::linalg::{squared_distance, Matrix};

/// Stores the training rows; scores by the positive share of the `k` nearest.
#[derive(Clone, Debug, PartialEq)]
pub struct KnnClassifier {
    x: Matrix,
    y: Vec<u8>,
    k: usize,
}

impl KnnClassifier {
    pub fn fit(x: &Matrix, y: &[u8], k: usize) -> KnnClassifier {
        KnnClassifier {
            x: x.clone(),
            y: y.to_vec(),
            k: k.clamp(1, x.rows().max(1)),
        }
    }

    /// Euclidean neighbours, ties to the lower training index.
    pub fn predict(&self, row: &[f64]) -> f64 {
        // Sorted (distance, index) of the best k so far.
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(self.k + 1);
        for (i, r) in self.x.iter_rows().enumerate() {
            let d = squared_distance(row, r);
            if best.len() == self.k && d >= best[self.k - 1].0 {
                continue;
            }
            let at = best.partition_point(|&(bd, _)| bd <= d);
            best.insert(at, (d, i));
            best.truncate(self.k);
        }
        best.iter().filter(|&&(_, i)| self.y[i] == 1).count() as f64 / best.len() as f64
    }
}

//! Gradient boosting on log-loss with shallow regression trees.

use crate::linalg::Matrix;
use crate::pipeline::cart::{RegressionTree, TreeParams};
use crate::pipeline::sigmoid;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoostParams {
    pub n_trees: usize,
    pub learning_rate: f64,
    pub tree: TreeParams,
}

impl Default for BoostParams {
    fn default() -> Self {
        BoostParams {
            n_trees: 200,
            learning_rate: 0.1,
            tree: TreeParams {
                max_depth: Some(3),
                min_leaf: 1,
                max_features: None,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradientBoosting {
    base: f64,
    learning_rate: f64,
    trees: Vec<RegressionTree>,
}

impl GradientBoosting {
    pub fn fit(x: &Matrix, y: &[u8], params: &BoostParams) -> GradientBoosting {
        let n = x.rows();
        let p = (y.iter().map(|&v| v as f64).sum::<f64>() / n as f64).clamp(1e-6, 1.0 - 1e-6);
        let base = (p / (1.0 - p)).ln();
        let mut f = vec![base; n];
        let mut trees = Vec::with_capacity(params.n_trees);
        let mut r = vec![0.0; n];
        let mut h = vec![0.0; n];
        for _ in 0..params.n_trees {
            for i in 0..n {
                let pi = sigmoid(f[i]);
                r[i] = y[i] as f64 - pi;
                h[i] = pi * (1.0 - pi);
            }
            let tree = RegressionTree::fit(x, &r, &h, &params.tree);
            for (i, fi) in f.iter_mut().enumerate() {
                *fi += params.learning_rate * tree.predict(x.row(i));
            }
            trees.push(tree);
        }
        GradientBoosting {
            base,
            learning_rate: params.learning_rate,
            trees,
        }
    }

    pub fn decision(&self, row: &[f64]) -> f64 {
        self.base + self.learning_rate * self.trees.iter().map(|t| t.predict(row)).sum::<f64>()
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        sigmoid(self.decision(row))
    }
}

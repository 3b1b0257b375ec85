//! Bagged Gini trees and impurity-based feature ranking.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::data_model::Table;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::pipeline::cart::{ClassificationTree, TreeParams};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Per-tree settings; `max_features: None` means `⌊√d⌋` here.
    pub tree: TreeParams,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 200,
            tree: TreeParams {
                max_depth: None,
                min_leaf: 1,
                max_features: None,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RandomForest {
    trees: Vec<ClassificationTree>,
    /// Accuracy of out-of-bag votes over rows left out by at least one tree.
    pub oob_accuracy: Option<f64>,
}

fn tree_rng(seed: u64, tree: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tree as u64);
    rng
}

impl RandomForest {
    /// Grows the forest. Returns it with the mean per-tree impurity
    /// decrease of every feature, normalized to sum to 1.
    pub fn fit(x: &Matrix, y: &[u8], params: &ForestParams, seed: u64) -> (RandomForest, Vec<f64>) {
        let n = x.rows();
        let d = x.cols();
        let mut tree_params = params.tree;
        if tree_params.max_features.is_none() {
            tree_params.max_features = Some(((d as f64).sqrt().floor() as usize).max(1));
        }
        let grown: Vec<(ClassificationTree, Vec<f64>, Vec<bool>)> = (0..params.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = tree_rng(seed, t);
                let samples: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                let mut in_bag = vec![false; n];
                for &s in &samples {
                    in_bag[s] = true;
                }
                let (tree, imp) = ClassificationTree::fit(x, y, &samples, &tree_params, &mut rng);
                (tree, imp, in_bag)
            })
            .collect();

        let mut importance = vec![0.0; d];
        let mut oob_sum = vec![0.0; n];
        let mut oob_count = vec![0usize; n];
        for (tree, imp, in_bag) in &grown {
            for (acc, v) in importance.iter_mut().zip(imp) {
                *acc += v / params.n_trees as f64;
            }
            for r in (0..n).filter(|&r| !in_bag[r]) {
                oob_sum[r] += tree.predict(x.row(r));
                oob_count[r] += 1;
            }
        }
        let total: f64 = importance.iter().sum();
        if total > 0.0 {
            importance.iter_mut().for_each(|v| *v /= total);
        }
        let voted: Vec<usize> = (0..n).filter(|&r| oob_count[r] > 0).collect();
        let oob_accuracy = (!voted.is_empty()).then(|| {
            let hits = voted
                .iter()
                .filter(|&&r| u8::from(oob_sum[r] / oob_count[r] as f64 >= 0.5) == y[r])
                .count();
            hits as f64 / voted.len() as f64
        });
        if let Some(acc) = oob_accuracy {
            log::info!(
                "random forest: {} trees, out-of-bag accuracy {acc:.4}",
                params.n_trees
            );
        }
        let trees = grown.into_iter().map(|(t, _, _)| t).collect();
        (
            RandomForest {
                trees,
                oob_accuracy,
            },
            importance,
        )
    }

    /// Mean positive fraction over trees.
    pub fn predict(&self, row: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict(row)).sum::<f64>() / self.trees.len() as f64
    }

    pub fn trees(&self) -> &[ClassificationTree] {
        &self.trees
    }
}

/// Feature ranking by mean Gini decrease.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureImportance {
    /// Table column index of each ranked feature, aligned with `importances`.
    pub features: Vec<usize>,
    pub importances: Vec<f64>,
    /// Top-`k` table column indices, most important first.
    pub selected: Vec<usize>,
}

/// Indices of the `k` largest values, descending, ties to the lower index.
pub(crate) fn top_k(values: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    order.truncate(k);
    order
}

/// Ranks the feature columns of a complete table with a random forest and
/// keeps the `k` most important.
pub fn rf_feature_select(
    t: &Table,
    labels: &[u8],
    n_trees: usize,
    k: usize,
    seed: u64,
) -> Result<FeatureImportance> {
    let features = t.feature_indices();
    if labels.len() != t.n_rows() {
        return Err(Error::ShapeMismatch("one label per row required".into()));
    }
    if n_trees == 0 {
        return Err(Error::InvalidParameter("n_trees must be positive".into()));
    }
    let x = t.to_matrix(&features)?;
    let params = ForestParams {
        n_trees,
        ..Default::default()
    };
    let (_, importances) = RandomForest::fit(&x, labels, &params, seed);
    if k > features.len() {
        log::warn!(
            "k = {k} exceeds the {} features; keeping all",
            features.len()
        );
    }
    let selected = top_k(&importances, k.min(features.len()))
        .into_iter()
        .map(|i| features[i])
        .collect();
    Ok(FeatureImportance {
        features,
        importances,
        selected,
    })
}

//! CART trees: Gini classification trees and squared-error regression trees
//! with Newton leaf values for boosting.

use rand::seq::index;
use rand::Rng;

use crate::linalg::Matrix;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TreeParams {
    /// `None` grows until leaves are pure or too small to split.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// Features examined per split; `None` examines all of them.
    pub max_features: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: Some(12),
            min_leaf: 5,
            max_features: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Node {
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

fn descend(nodes: &[Node], row: &[f64]) -> f64 {
    let mut at = 0;
    loop {
        match &nodes[at] {
            Node::Leaf(v) => return *v,
            Node::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                at = if row[*feature] <= *threshold {
                    *left
                } else {
                    *right
                }
            }
        }
    }
}

/// Gini impurity `1 − Σ p_c²` of a two-class node.
pub fn gini(positives: f64, total: f64) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    let p = positives / total;
    2.0 * p * (1.0 - p)
}

fn midpoint(lo: f64, hi: f64) -> f64 {
    let m = lo + (hi - lo) / 2.0;
    if m < hi {
        m
    } else {
        lo
    }
}

fn features_for_split<R: Rng>(d: usize, max_features: Option<usize>, rng: &mut R) -> Vec<usize> {
    match max_features {
        Some(m) if m < d => index::sample(rng, d, m.max(1)).into_vec(),
        _ => (0..d).collect(),
    }
}

struct SplitChoice {
    feature: usize,
    threshold: f64,
    score: f64,
}

/// Classification tree; leaves hold the fraction of positive samples.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassificationTree {
    nodes: Vec<Node>,
    /// `(samples, positives)` reaching each node.
    counts: Vec<(usize, usize)>,
}

struct ClassBuilder<'a, R> {
    x: &'a Matrix,
    y: &'a [u8],
    params: &'a TreeParams,
    rng: &'a mut R,
    nodes: Vec<Node>,
    counts: Vec<(usize, usize)>,
    importance: Vec<f64>,
    total: f64,
    scratch: Vec<(f64, u8)>,
}

impl<R: Rng> ClassBuilder<'_, R> {
    fn best_split(&mut self, idx: &[usize], pos: usize) -> Option<SplitChoice> {
        let n = idx.len();
        let min_leaf = self.params.min_leaf.max(1);
        let mut best: Option<SplitChoice> = None;
        for f in features_for_split(self.x.cols(), self.params.max_features, self.rng) {
            self.scratch.clear();
            self.scratch
                .extend(idx.iter().map(|&i| (self.x.get(i, f), self.y[i])));
            self.scratch.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut pos_left = 0usize;
            for i in 0..n - 1 {
                pos_left += self.scratch[i].1 as usize;
                let nl = i + 1;
                let nr = n - nl;
                if nl < min_leaf || nr < min_leaf || self.scratch[i].0 >= self.scratch[i + 1].0 {
                    continue;
                }
                let pos_right = pos - pos_left;
                // n_l·gini_l + n_r·gini_r
                let score = 2.0 * (pos_left * (nl - pos_left)) as f64 / nl as f64
                    + 2.0 * (pos_right * (nr - pos_right)) as f64 / nr as f64;
                if best.as_ref().is_none_or(|b| score < b.score) {
                    best = Some(SplitChoice {
                        feature: f,
                        threshold: midpoint(self.scratch[i].0, self.scratch[i + 1].0),
                        score,
                    });
                }
            }
        }
        best
    }

    fn grow(&mut self, idx: &mut [usize], depth: usize) -> usize {
        let n = idx.len();
        let pos = idx.iter().filter(|&&i| self.y[i] == 1).count();
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf(pos as f64 / n as f64));
        self.counts.push((n, pos));
        let pure = pos == 0 || pos == n;
        let depth_ok = self.params.max_depth.is_none_or(|m| depth < m);
        if pure || !depth_ok || n < 2 * self.params.min_leaf.max(1) {
            return id;
        }
        let Some(choice) = self.best_split(idx, pos) else {
            return id;
        };
        let parent = n as f64 * gini(pos as f64, n as f64);
        self.importance[choice.feature] += (parent - choice.score) / self.total;

        let mut split = 0;
        for k in 0..n {
            if self.x.get(idx[k], choice.feature) <= choice.threshold {
                idx.swap(k, split);
                split += 1;
            }
        }
        let (l, r) = idx.split_at_mut(split);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[id] = Node::Split {
            feature: choice.feature,
            threshold: choice.threshold,
            left,
            right,
        };
        id
    }
}

impl ClassificationTree {
    /// Grows a tree on the given sample indices (repeats allowed, as in a
    /// bootstrap). Returns the tree and its per-feature Gini decrease, each
    /// node weighted by its share of the samples.
    pub fn fit<R: Rng>(
        x: &Matrix,
        y: &[u8],
        samples: &[usize],
        params: &TreeParams,
        rng: &mut R,
    ) -> (ClassificationTree, Vec<f64>) {
        assert!(!samples.is_empty(), "cannot grow a tree on zero samples");
        let mut b = ClassBuilder {
            x,
            y,
            params,
            rng,
            nodes: Vec::new(),
            counts: Vec::new(),
            importance: vec![0.0; x.cols()],
            total: samples.len() as f64,
            scratch: Vec::with_capacity(samples.len()),
        };
        let mut idx = samples.to_vec();
        b.grow(&mut idx, 0);
        (
            ClassificationTree {
                nodes: b.nodes,
                counts: b.counts,
            },
            b.importance,
        )
    }

    /// Positive-class fraction of the leaf reached by `row`.
    pub fn predict(&self, row: &[f64]) -> f64 {
        descend(&self.nodes, row)
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// For every internal node: its Gini impurity and the sample-weighted
    /// Gini impurity of its two children.
    pub fn split_impurities(&self) -> Vec<(f64, f64)> {
        let g = |(n, p): (usize, usize)| gini(p as f64, n as f64);
        self.nodes
            .iter()
            .zip(&self.counts)
            .filter_map(|(node, &(n, p))| match node {
                Node::Leaf(_) => None,
                Node::Split { left, right, .. } => {
                    let (l, r) = (self.counts[*left], self.counts[*right]);
                    let children = (l.0 as f64 * g(l) + r.0 as f64 * g(r)) / n as f64;
                    Some((g((n, p)), children))
                }
            })
            .collect()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

/// Regression tree fit to residuals `r`; each leaf predicts `Σr / Σh`.
#[derive(Clone, Debug, PartialEq)]
pub struct RegressionTree {
    nodes: Vec<Node>,
}

struct RegBuilder<'a> {
    x: &'a Matrix,
    r: &'a [f64],
    h: &'a [f64],
    params: &'a TreeParams,
    nodes: Vec<Node>,
    scratch: Vec<(f64, f64)>,
}

impl RegBuilder<'_> {
    fn leaf_value(&self, idx: &[usize]) -> f64 {
        let sr: f64 = idx.iter().map(|&i| self.r[i]).sum();
        let sh: f64 = idx.iter().map(|&i| self.h[i]).sum();
        sr / sh.max(1e-12)
    }

    fn grow(&mut self, idx: &mut [usize], depth: usize) -> usize {
        let n = idx.len();
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf(self.leaf_value(idx)));
        let min_leaf = self.params.min_leaf.max(1);
        if self.params.max_depth.is_some_and(|m| depth >= m) || n < 2 * min_leaf {
            return id;
        }
        let total: f64 = idx.iter().map(|&i| self.r[i]).sum();
        let parent = total * total / n as f64;
        let mut best: Option<SplitChoice> = None;
        for f in 0..self.x.cols() {
            self.scratch.clear();
            self.scratch
                .extend(idx.iter().map(|&i| (self.x.get(i, f), self.r[i])));
            self.scratch.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut sl = 0.0;
            for i in 0..n - 1 {
                sl += self.scratch[i].1;
                let nl = i + 1;
                let nr = n - nl;
                if nl < min_leaf || nr < min_leaf || self.scratch[i].0 >= self.scratch[i + 1].0 {
                    continue;
                }
                let sr = total - sl;
                // Negated gain in Σr²/n, so lower is better.
                let score = -(sl * sl / nl as f64 + sr * sr / nr as f64);
                if best.as_ref().is_none_or(|b| score < b.score) {
                    best = Some(SplitChoice {
                        feature: f,
                        threshold: midpoint(self.scratch[i].0, self.scratch[i + 1].0),
                        score,
                    });
                }
            }
        }
        let Some(choice) = best.filter(|b| -b.score > parent + 1e-12 * parent.abs()) else {
            return id;
        };
        let mut split = 0;
        for k in 0..n {
            if self.x.get(idx[k], choice.feature) <= choice.threshold {
                idx.swap(k, split);
                split += 1;
            }
        }
        let (l, r) = idx.split_at_mut(split);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[id] = Node::Split {
            feature: choice.feature,
            threshold: choice.threshold,
            left,
            right,
        };
        id
    }
}

impl RegressionTree {
    pub fn fit(
        x: &Matrix,
        residuals: &[f64],
        hessians: &[f64],
        params: &TreeParams,
    ) -> RegressionTree {
        let mut b = RegBuilder {
            x,
            r: residuals,
            h: hessians,
            params,
            nodes: Vec::new(),
            scratch: Vec::with_capacity(x.rows()),
        };
        let mut idx: Vec<usize> = (0..x.rows()).collect();
        b.grow(&mut idx, 0);
        RegressionTree { nodes: b.nodes }
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        descend(&self.nodes, row)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn xor_fit_with_depth_two() {
        let x = Matrix::from_rows(&[
            vec![0.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
        ]);
        let y = [0u8, 1, 1, 0];
        let params = TreeParams {
            max_depth: Some(2),
            min_leaf: 1,
            max_features: None,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (tree, _) = ClassificationTree::fit(&x, &y, &[0, 1, 2, 3], &params, &mut rng);
        for (row, &label) in x.iter_rows().zip(&y) {
            assert_eq!(tree.predict(row), label as f64);
        }
        assert_eq!(tree.depth(), 2);
    }

    #[test]
    fn min_leaf_blocks_small_splits() {
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0], vec![3.0]]);
        let y = [0u8, 0, 1, 1];
        let params = TreeParams {
            max_depth: None,
            min_leaf: 3,
            max_features: None,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (tree, imp) = ClassificationTree::fit(&x, &y, &[0, 1, 2, 3], &params, &mut rng);
        assert_eq!(tree.n_nodes(), 1);
        assert_eq!(tree.predict(&[0.0]), 0.5);
        assert_eq!(imp, vec![0.0]);
    }

    #[test]
    fn importance_of_clean_split() {
        // Root gini 0.5 over 4 samples, children pure: decrease = 0.5.
        let x = Matrix::from_rows(&[
            vec![0.0, 5.0],
            vec![1.0, 5.0],
            vec![2.0, 5.0],
            vec![3.0, 5.0],
        ]);
        let y = [0u8, 0, 1, 1];
        let params = TreeParams {
            max_depth: None,
            min_leaf: 1,
            max_features: None,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (tree, imp) = ClassificationTree::fit(&x, &y, &[0, 1, 2, 3], &params, &mut rng);
        assert_eq!(imp, vec![0.5, 0.0]);
        assert_eq!(tree.predict(&[1.4, 0.0]), 0.0);
        assert_eq!(tree.predict(&[1.6, 0.0]), 1.0);
    }

    #[test]
    fn regression_tree_newton_leaves() {
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0], vec![3.0]]);
        let r = [1.0, 1.0, -2.0, -2.0];
        let h = [0.5, 0.5, 0.5, 0.5];
        let params = TreeParams {
            max_depth: Some(1),
            min_leaf: 1,
            max_features: None,
        };
        let t = RegressionTree::fit(&x, &r, &h, &params);
        assert_eq!(t.predict(&[0.5]), 2.0);
        assert_eq!(t.predict(&[2.5]), -4.0);
    }
}

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::pipeline::boost::{BoostParams, GradientBoosting};
use crate::pipeline::cart::{ClassificationTree, TreeParams};
use crate::pipeline::forest::{ForestParams, RandomForest};
use crate::pipeline::knn::KnnClassifier;
use crate::pipeline::logistic::{LogRegParams, LogisticRegression};
use crate::pipeline::metrics::EvalReport;
use crate::pipeline::nnet::{NeuralNet, NnetParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Logreg,
    Knn,
    Dtree,
    Rforest,
    Gboost,
    Nnet,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 6] = [
        ClassifierKind::Logreg,
        ClassifierKind::Knn,
        ClassifierKind::Dtree,
        ClassifierKind::Rforest,
        ClassifierKind::Gboost,
        ClassifierKind::Nnet,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::Logreg => "logreg",
            ClassifierKind::Knn => "knn",
            ClassifierKind::Dtree => "dtree",
            ClassifierKind::Rforest => "rforest",
            ClassifierKind::Gboost => "gboost",
            ClassifierKind::Nnet => "nnet",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ClassifierKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown classifier {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hyperparams {
    pub logreg: LogRegParams,
    pub knn_k: usize,
    pub dtree: TreeParams,
    pub forest: ForestParams,
    pub boost: BoostParams,
    pub nnet: NnetParams,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            logreg: LogRegParams::default(),
            knn_k: 5,
            dtree: TreeParams::default(),
            forest: ForestParams::default(),
            boost: BoostParams::default(),
            nnet: NnetParams::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ClassifierModel {
    Logreg(LogisticRegression),
    Knn(KnnClassifier),
    Dtree(ClassificationTree),
    Rforest(RandomForest),
    Gboost(GradientBoosting),
    Nnet(NeuralNet),
}

impl ClassifierModel {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            ClassifierModel::Logreg(_) => ClassifierKind::Logreg,
            ClassifierModel::Knn(_) => ClassifierKind::Knn,
            ClassifierModel::Dtree(_) => ClassifierKind::Dtree,
            ClassifierModel::Rforest(_) => ClassifierKind::Rforest,
            ClassifierModel::Gboost(_) => ClassifierKind::Gboost,
            ClassifierModel::Nnet(_) => ClassifierKind::Nnet,
        }
    }

    /// Positive-class score in `[0, 1]`.
    pub fn score(&self, row: &[f64]) -> f64 {
        match self {
            ClassifierModel::Logreg(m) => m.predict(row),
            ClassifierModel::Knn(m) => m.predict(row),
            ClassifierModel::Dtree(m) => m.predict(row),
            ClassifierModel::Rforest(m) => m.predict(row),
            ClassifierModel::Gboost(m) => m.predict(row),
            ClassifierModel::Nnet(m) => m.predict(row),
        }
    }

    pub fn score_all(&self, x: &Matrix) -> Vec<f64> {
        (0..x.rows())
            .into_par_iter()
            .map(|i| self.score(x.row(i)))
            .collect()
    }
}

fn check_training_set(x: &Matrix, y: &[u8]) -> Result<()> {
    if x.rows() != y.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} rows but {} labels",
            x.rows(),
            y.len()
        )));
    }
    for r in 0..x.rows() {
        if let Some(c) = x.row(r).iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteFeature { row: r, col: c });
        }
    }
    let pos = y.iter().filter(|&&v| v == 1).count();
    if pos == 0 || pos == y.len() {
        return Err(Error::SingleClass);
    }
    Ok(())
}

/// Fits one classifier. `y` holds 0/1 labels.
pub fn train(
    kind: ClassifierKind,
    x: &Matrix,
    y: &[u8],
    hp: &Hyperparams,
    seed: u64,
) -> Result<ClassifierModel> {
    check_training_set(x, y)?;
    Ok(match kind {
        ClassifierKind::Logreg => {
            ClassifierModel::Logreg(LogisticRegression::fit(x, y, &hp.logreg))
        }
        ClassifierKind::Knn => ClassifierModel::Knn(KnnClassifier::fit(x, y, hp.knn_k)),
        ClassifierKind::Dtree => {
            let samples: Vec<usize> = (0..x.rows()).collect();
            let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
            ClassifierModel::Dtree(ClassificationTree::fit(x, y, &samples, &hp.dtree, &mut rng).0)
        }
        ClassifierKind::Rforest => {
            ClassifierModel::Rforest(RandomForest::fit(x, y, &hp.forest, seed).0)
        }
        ClassifierKind::Gboost => ClassifierModel::Gboost(GradientBoosting::fit(x, y, &hp.boost)),
        ClassifierKind::Nnet => ClassifierModel::Nnet(NeuralNet::fit(x, y, &hp.nnet, seed)),
    })
}

/// Scores every row and summarizes against the true labels.
pub fn evaluate(model: &ClassifierModel, x: &Matrix, labels: &[u8]) -> EvalReport {
    EvalReport::from_scores(model.kind().name(), &model.score_all(x), labels)
}

//! Bankruptcy prediction: impute, standardize, select features with a random
//! forest, balance the training fold with SMOTE, then fit and score a set of
//! classifiers on a held-out stratified split.

pub mod boost;
pub mod cart;
mod classifier;
pub mod forest;
pub mod knn;
pub mod logistic;
pub mod metrics;
pub mod nnet;
pub mod smote;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use classifier::{evaluate, train, ClassifierKind, ClassifierModel, Hyperparams};
pub use forest::{rf_feature_select, FeatureImportance};
pub use metrics::{Confusion, EvalReport};
pub use smote::{balance, smote, BalancedDataset, RowOrigin};

use crate::data_model::{encode_categoricals, standardize, Table};
use crate::error::{Error, Result};
use crate::imputer::{impute_table, GranularConfig, ImputedTable};

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub granular: GranularConfig,
    pub k_features: usize,
    pub selection_trees: usize,
    /// Share of each class held out for testing.
    pub test_fraction: f64,
    pub smote_k: usize,
    pub seed: u64,
    pub classifiers: Vec<ClassifierKind>,
    pub hyperparams: Hyperparams,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            granular: GranularConfig::default(),
            k_features: 16,
            selection_trees: 200,
            test_fraction: 0.2,
            smote_k: 5,
            seed: 42,
            classifiers: ClassifierKind::ALL.to_vec(),
            hyperparams: Hyperparams::default(),
        }
    }
}

/// Row indices of the two folds, each ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Holds out `round(fraction · n_c)` rows of each class `c`, chosen by a
/// seeded shuffle, keeping at least one row of every class for training.
pub fn stratified_split(labels: &[u8], fraction: f64, seed: u64) -> Result<Split> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(Error::InvalidParameter(format!(
            "test fraction {fraction} outside [0, 1)"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut split = Split {
        train: Vec::new(),
        test: Vec::new(),
    };
    for class in [0u8, 1] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(&mut rng);
        let n_test =
            ((fraction * idx.len() as f64).round() as usize).min(idx.len().saturating_sub(1));
        split.test.extend_from_slice(&idx[..n_test]);
        split.train.extend_from_slice(&idx[n_test..]);
    }
    split.train.sort_unstable();
    split.test.sort_unstable();
    Ok(split)
}

#[derive(Clone, Debug)]
pub struct PipelineOutcome {
    /// One report per distinct configured classifier, sorted by name.
    pub reports: Vec<EvalReport>,
    pub imputation: ImputedTable,
    pub importance: FeatureImportance,
    pub selected_names: Vec<String>,
    pub split: Split,
    /// Provenance of each balanced training row, as row indices of the input table.
    pub origins: Vec<RowOrigin>,
    pub train_counts: (usize, usize),
}

/// Runs the full prediction stack on a labelled table.
pub fn run_pipeline(raw: &Table, cfg: &PipelineConfig) -> Result<PipelineOutcome> {
    let labels = raw.binary_labels()?;
    let (encoded, _) = encode_categoricals(raw);
    let imputation = impute_table(&encoded, cfg.granular)?;
    let (scaled, _) = standardize(&imputation.table)?;
    let importance = rf_feature_select(
        &scaled,
        &labels,
        cfg.selection_trees,
        cfg.k_features,
        cfg.seed,
    )?;
    let selected_names = importance
        .selected
        .iter()
        .map(|&c| scaled.names()[c].clone())
        .collect();
    log::info!("selected features: {selected_names:?}");
    let x = scaled.to_matrix(&importance.selected)?;

    let split = stratified_split(&labels, cfg.test_fraction, cfg.seed)?;
    let y_train: Vec<u8> = split.train.iter().map(|&i| labels[i]).collect();
    let y_test: Vec<u8> = split.test.iter().map(|&i| labels[i]).collect();
    let x_train = x.select_rows(&split.train);
    let x_test = x.select_rows(&split.test);

    let balanced = balance(&x_train, &y_train, cfg.smote_k, cfg.seed);
    let train_counts = balanced.class_counts();
    log::info!(
        "train fold {} rows, {} after balancing; test fold {} rows",
        split.train.len(),
        balanced.y.len(),
        split.test.len()
    );
    let origins = balanced
        .origins
        .iter()
        .map(|o| match *o {
            RowOrigin::Original(i) => RowOrigin::Original(split.train[i]),
            RowOrigin::Synthetic { base, neighbor } => RowOrigin::Synthetic {
                base: split.train[base],
                neighbor: split.train[neighbor],
            },
        })
        .collect();

    let mut kinds = cfg.classifiers.clone();
    kinds.sort_by_key(|k| k.name());
    kinds.dedup();
    let reports = kinds
        .par_iter()
        .map(|&kind| {
            let model = train(kind, &balanced.x, &balanced.y, &cfg.hyperparams, cfg.seed)?;
            let report = evaluate(&model, &x_test, &y_test);
            log::info!(
                "{kind}: accuracy {:.4}, auc {:.4}",
                report.accuracy,
                report.auc
            );
            Ok(report)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(PipelineOutcome {
        reports,
        imputation,
        importance,
        selected_names,
        split,
        origins,
        train_counts,
    })
}

use granimpute::baselines::{impurity_sweep, ImputerKind, SweepSettings};
use granimpute::data_model::{
    build_mask, decode_categoricals, encode_categoricals, load_table, Column, Format,
    MissingTokens, Table,
};
use granimpute::fixtures::toy_balance_sheet;
use granimpute::imputer::{GranularConfig, GranularImputer};
use granimpute::linalg::Matrix;
use granimpute::pipeline::{
    evaluate, rf_feature_select, run_pipeline, stratified_split, train, ClassifierKind,
    Hyperparams, PipelineConfig, RowOrigin,
};
use granimpute::semantics::{correlation_matrix, semantic_features};
use granimpute::Error;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn normal(rng: &mut impl Rng) -> f64 {
    let u: f64 = rng.random_range(f64::EPSILON..1.0);
    let v: f64 = rng.random();
    (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
}

#[test]
fn toy_sheet_liabilities_follow_working_capital_and_current_assets() {
    let t = toy_balance_sheet();
    let corr = correlation_matrix(&t, &build_mask(&t)).unwrap();
    let f = semantic_features(&corr, 1, 2).unwrap();
    let mut members = f.members.clone();
    members.sort_unstable();
    assert_eq!(members, vec![2, 3]);
    assert!(f.scores.iter().all(|&s| s > 0.99));

    let imp = GranularImputer::new(&t, GranularConfig::new(2, 2)).unwrap();
    let p = imp.impute_cell(5, 1).unwrap();
    let g = p.granule.as_ref().unwrap();
    assert_eq!(g.rows, vec![4, 2]);

    // Minimum-norm solution in centered, unit-norm predictor coordinates.
    let rows = [4usize, 2];
    let cols = [2usize, 3];
    let val = |r: usize, c: usize| t.value(r, c).unwrap();
    let means: Vec<f64> = cols
        .iter()
        .map(|&c| rows.iter().map(|&r| val(r, c)).sum::<f64>() / 2.0)
        .collect();
    let norms: Vec<f64> = cols
        .iter()
        .zip(&means)
        .map(|(&c, m)| {
            rows.iter()
                .map(|&r| (val(r, c) - m).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    let z = DMatrix::from_fn(2, 2, |i, j| (val(rows[i], cols[j]) - means[j]) / norms[j]);
    let y_mean = rows.iter().map(|&r| val(r, 1)).sum::<f64>() / 2.0;
    let yc = DMatrix::from_fn(2, 1, |i, _| val(rows[i], 1) - y_mean);
    let w = z.pseudo_inverse(1e-12).unwrap() * yc;
    let oracle = y_mean
        + (0..2)
            .map(|j| w[j] * (val(5, cols[j]) - means[j]) / norms[j])
            .sum::<f64>();
    assert!((p.value - oracle).abs() < 1e-4, "{} vs {oracle}", p.value);
}

/// Every column an affine function of one latent factor.
fn rank_one_table(n: usize, d: usize, seed: u64) -> Table {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z: Vec<f64> = (0..n).map(|_| normal(&mut rng)).collect();
    let cols = (0..d)
        .map(|j| {
            let a = rng.random_range(0.5..3.0) * if j % 2 == 0 { 1.0 } else { -1.0 };
            let b = rng.random_range(-5.0..5.0);
            (format!("f{j}"), z.iter().map(|v| Some(a * v + b)).collect())
        })
        .collect();
    Table::from_numeric_columns(cols).unwrap()
}

#[test]
fn granular_imputer_is_exact_on_affine_data_and_beats_the_mean() {
    let t = rank_one_table(200, 10, 5);
    let rates = [0.05, 0.1, 0.2, 0.3];
    let reports = impurity_sweep(
        &t,
        &rates,
        &[ImputerKind::Granular, ImputerKind::Mean],
        9,
        &SweepSettings::default(),
    )
    .unwrap();
    assert_eq!(reports.len(), 8);
    for pair in reports.chunks(2) {
        let (gs, mean) = (&pair[0], &pair[1]);
        assert_eq!(gs.imputer, ImputerKind::Granular);
        assert!(gs.mean_err < 1e-6, "rate {}: {}", gs.rate, gs.mean_err);
        assert!(gs.mean_err <= mean.mean_err);
        assert!(mean.mean_err > 0.05);
    }
}

fn blobs(
    n: usize,
    d: usize,
    informative: usize,
    positive_share: f64,
    seed: u64,
) -> (Vec<Vec<f64>>, Vec<u8>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let y: Vec<u8> = (0..n)
        .map(|_| u8::from(rng.random::<f64>() < positive_share))
        .collect();
    let x = y
        .iter()
        .map(|&c| {
            (0..d)
                .map(|j| {
                    let shift = if j < informative {
                        if c == 1 {
                            2.0
                        } else {
                            -2.0
                        }
                    } else {
                        0.0
                    };
                    shift + normal(&mut rng)
                })
                .collect()
        })
        .collect();
    (x, y)
}

#[test]
fn logistic_regression_fits_separated_blobs() {
    let (x, y) = blobs(300, 2, 2, 0.5, 1);
    let x = Matrix::from_rows(&x);
    let model = train(ClassifierKind::Logreg, &x, &y, &Hyperparams::default(), 0).unwrap();
    assert!(evaluate(&model, &x, &y).accuracy >= 0.99);
}

#[test]
fn one_nearest_neighbour_returns_the_stored_label() {
    let (x, y) = blobs(60, 3, 1, 0.5, 2);
    let x = Matrix::from_rows(&x);
    let hp = Hyperparams {
        knn_k: 1,
        ..Hyperparams::default()
    };
    let model = train(ClassifierKind::Knn, &x, &y, &hp, 0).unwrap();
    for (i, &label) in y.iter().enumerate() {
        assert_eq!(model.score(x.row(i)), label as f64);
    }
}

#[test]
fn decision_tree_fits_xor() {
    let x = Matrix::from_rows(&[
        vec![0.0, 0.0],
        vec![0.0, 1.0],
        vec![1.0, 0.0],
        vec![1.0, 1.0],
    ]);
    let y = [0u8, 1, 1, 0];
    let mut hp = Hyperparams::default();
    hp.dtree.min_leaf = 1;
    let model = train(ClassifierKind::Dtree, &x, &y, &hp, 0).unwrap();
    assert_eq!(evaluate(&model, &x, &y).accuracy, 1.0);
}

#[test]
fn training_rejects_bad_inputs() {
    let x = Matrix::from_rows(&[vec![0.0], vec![1.0], vec![f64::NAN]]);
    let err = train(
        ClassifierKind::Logreg,
        &x,
        &[0, 1, 0],
        &Hyperparams::default(),
        0,
    )
    .unwrap_err();
    assert!(matches!(err, Error::NonFiniteFeature { row: 2, col: 0 }));
    let x = Matrix::from_rows(&[vec![0.0], vec![1.0]]);
    let err = train(ClassifierKind::Knn, &x, &[1, 1], &Hyperparams::default(), 0).unwrap_err();
    assert!(matches!(err, Error::SingleClass));
}

#[test]
fn forest_ranks_the_deciding_feature_first() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let rows: Vec<Vec<f64>> = (0..300)
        .map(|_| (0..6).map(|_| normal(&mut rng)).collect())
        .collect();
    let y: Vec<u8> = rows.iter().map(|r| u8::from(r[0] > 0.0)).collect();
    let t = Table::from_rows(&rows).unwrap();
    let fi = rf_feature_select(&t, &y, 100, 3, 1).unwrap();
    assert_eq!(fi.selected[0], 0);
    assert!((fi.importances.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    let all = rf_feature_select(&t, &y, 20, 6, 1).unwrap();
    let mut sel = all.selected.clone();
    sel.sort_unstable();
    assert_eq!(sel, (0..6).collect::<Vec<_>>());
    assert_eq!(
        rf_feature_select(&t, &y, 20, 10, 1).unwrap().selected.len(),
        6
    );

    // A duplicated deciding column shares its importance with the copy.
    let dup: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            let mut r = r.clone();
            r.push(r[0]);
            r
        })
        .collect();
    let fd = rf_feature_select(&Table::from_rows(&dup).unwrap(), &y, 100, 2, 1).unwrap();
    assert!(fd.importances[0] > 0.0 && fd.importances[6] > 0.0);
    let shared = fd.importances[0] + fd.importances[6];
    assert!(
        (shared - fi.importances[0]).abs() < 0.25 * fi.importances[0],
        "{shared} vs {}",
        fi.importances[0]
    );
    let mut top = fd.selected.clone();
    top.sort_unstable();
    assert_eq!(top, vec![0, 6]);
}

#[test]
fn stratified_split_keeps_class_shares() {
    let y: Vec<u8> = (0..1000).map(|i| u8::from(i % 10 == 0)).collect();
    let s = stratified_split(&y, 0.2, 42).unwrap();
    assert_eq!(s.test.len(), 200);
    assert_eq!(s.test.iter().filter(|&&i| y[i] == 1).count(), 20);
    let mut all: Vec<usize> = s.train.iter().chain(&s.test).copied().collect();
    all.sort_unstable();
    assert_eq!(all, (0..1000).collect::<Vec<_>>());
    assert_eq!(stratified_split(&y, 0.2, 42).unwrap(), s);
}

fn labelled_blobs(seed: u64, missing: f64) -> Table {
    let (x, y) = blobs(500, 8, 3, 0.2, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
    let mut cols: Vec<(String, Vec<Option<f64>>)> = (0..8)
        .map(|j| {
            let c = x
                .iter()
                .map(|r| (rng.random::<f64>() >= missing).then_some(r[j]))
                .collect();
            (format!("attr{j}"), c)
        })
        .collect();
    cols.push(("class".into(), y.iter().map(|&v| Some(v as f64)).collect()));
    Table::from_numeric_columns(cols)
        .unwrap()
        .with_label("class")
        .unwrap()
}

#[test]
fn every_classifier_separates_synthetic_blobs() {
    let t = labelled_blobs(4, 0.03);
    let cfg = PipelineConfig {
        k_features: 6,
        ..PipelineConfig::default()
    };
    let out = run_pipeline(&t, &cfg).unwrap();
    let names: Vec<&str> = out.reports.iter().map(|r| r.classifier.as_str()).collect();
    assert_eq!(
        names,
        ["dtree", "gboost", "knn", "logreg", "nnet", "rforest"]
    );
    for r in &out.reports {
        assert!(r.accuracy >= 0.95, "{}: {}", r.classifier, r.accuracy);
        let c = r.confusion;
        assert_eq!(c.tp + c.fp + c.tn + c.fn_, out.split.test.len());
        assert!((0.0..=1.0).contains(&r.auc));
        assert!(r
            .roc
            .windows(2)
            .all(|w| w[1][0] >= w[0][0] && w[1][1] >= w[0][1]));
    }
    let mut informative: Vec<usize> = out.importance.selected[..3].to_vec();
    informative.sort_unstable();
    assert_eq!(informative, vec![0, 1, 2]);
}

#[test]
fn oversampling_draws_only_on_training_rows() {
    let t = labelled_blobs(8, 0.05);
    let cfg = PipelineConfig {
        classifiers: vec![],
        ..PipelineConfig::default()
    };
    let out = run_pipeline(&t, &cfg).unwrap();
    assert!(out.reports.is_empty());
    let (neg, pos) = out.train_counts;
    assert_eq!(neg, pos);
    let in_train = |i: usize| out.split.train.binary_search(&i).is_ok();
    let mut synthetic = 0;
    for o in &out.origins {
        match *o {
            RowOrigin::Original(i) => assert!(in_train(i)),
            RowOrigin::Synthetic { base, neighbor } => {
                synthetic += 1;
                assert!(in_train(base) && in_train(neighbor));
            }
        }
    }
    assert!(synthetic > 0);
    assert!(out.split.test.iter().all(|&i| !in_train(i)));
}

#[test]
fn categorical_round_trip_restores_tokens() {
    let csv = "colour,size,class\nred,1,a\nblue,?,b\nred,3,a\ngreen,4,b\n?,5,a\nblue,6,b\n";
    let t = load_table(csv.as_bytes(), Format::Csv, &MissingTokens::default()).unwrap();
    let (enc, map) = encode_categoricals(&t);
    assert_eq!(map.code(0, "red"), Some(1.0));
    let back = decode_categoricals(&enc, &map);
    assert_eq!(back, t);
    let filled = GranularImputer::new(&enc, GranularConfig::new(1, 2))
        .unwrap()
        .run()
        .unwrap();
    let Column::Categorical(colour) = decode_categoricals(&filled.table, &map).column(0).clone()
    else {
        panic!("colour decodes to tokens");
    };
    assert!(colour
        .iter()
        .all(|c| matches!(c.as_deref(), Some("red" | "blue" | "green"))));
}

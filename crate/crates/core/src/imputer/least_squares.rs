//! Affine least squares with a ridge fallback for rank-deficient designs.
//!
//! Predictors are centered and scaled to unit norm before the normal
//! equations are formed, so the Gram matrix has a unit diagonal and the ridge
//! strength `λ·trace(G)/p` is comparable across granules of any scale.

use serde::{Deserialize, Serialize};

use crate::granule::Granule;
use crate::linalg::{cholesky_in_place, cholesky_solve, Matrix};

/// Smallest admissible Cholesky pivot of the normalized Gram matrix.
const PIVOT_TOL: f64 = 1e-10;
/// Ridge for numerically singular Gram matrices.
const RIDGE_SINGULAR: f64 = 1e-8;
/// Ridge when there are fewer than `p + 2` rows.
const RIDGE_UNDERDETERMINED: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    Ok,
    Regularized,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Ridge {
    /// Plain least squares, regularizing only when the system demands it.
    Auto,
    /// Always add `λ·trace(G)/p` to the normalized Gram diagonal.
    Fixed(f64),
}

/// Fitted affine model `y ≈ intercept + Σ coefficients_j · x_j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalModel {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub condition: Condition,
}

impl LocalModel {
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.intercept
            + self
                .coefficients
                .iter()
                .zip(x)
                .map(|(c, v)| c * v)
                .sum::<f64>()
    }
}

/// Least-squares fit over every row of `x` against `y`.
pub fn least_squares(x: &Matrix, y: &[f64], ridge: Ridge) -> LocalModel {
    let (n, p) = (x.rows(), x.cols());
    assert_eq!(n, y.len(), "one target per row");
    if n == 0 {
        return LocalModel {
            coefficients: vec![0.0; p],
            intercept: 0.0,
            condition: Condition::Regularized,
        };
    }
    let nf = n as f64;
    let y_mean = y.iter().sum::<f64>() / nf;
    let mut x_mean = vec![0.0; p];
    for r in x.iter_rows() {
        for (m, v) in x_mean.iter_mut().zip(r) {
            *m += v;
        }
    }
    x_mean.iter_mut().for_each(|m| *m /= nf);

    // Column norms after centering; near-constant columns drop out.
    let mut norm = vec![0.0; p];
    let mut max_abs = vec![0.0f64; p];
    for r in x.iter_rows() {
        for j in 0..p {
            let c = r[j] - x_mean[j];
            norm[j] += c * c;
            max_abs[j] = max_abs[j].max(r[j].abs());
        }
    }
    let active: Vec<usize> = (0..p)
        .filter(|&j| {
            norm[j] = norm[j].sqrt();
            norm[j] > 0.0 && norm[j] > 1e-12 * max_abs[j] * nf.sqrt()
        })
        .collect();
    let pa = active.len();
    let mut condition = if pa < p {
        Condition::Regularized
    } else {
        Condition::Ok
    };
    let mut coefficients = vec![0.0; p];
    if pa == 0 {
        return LocalModel {
            coefficients,
            intercept: y_mean,
            condition,
        };
    }

    let mut gram = vec![0.0; pa * pa];
    let mut rhs = vec![0.0; pa];
    let mut z = vec![0.0; pa];
    for (r, &yr) in x.iter_rows().zip(y) {
        for (k, &j) in active.iter().enumerate() {
            z[k] = (r[j] - x_mean[j]) / norm[j];
        }
        let yc = yr - y_mean;
        for a in 0..pa {
            rhs[a] += z[a] * yc;
            for b in 0..=a {
                gram[a * pa + b] += z[a] * z[b];
            }
        }
    }
    for a in 0..pa {
        for b in 0..a {
            gram[b * pa + a] = gram[a * pa + b];
        }
    }
    let scale = (0..pa).map(|a| gram[a * pa + a]).sum::<f64>() / pa as f64;

    let mut lambda = match ridge {
        Ridge::Fixed(l) => Some(l),
        Ridge::Auto if n < pa + 2 => Some(RIDGE_UNDERDETERMINED),
        Ridge::Auto => None,
    };
    let factor = loop {
        let mut a = gram.clone();
        if let Some(l) = lambda {
            for k in 0..pa {
                a[k * pa + k] += l * scale;
            }
        }
        if cholesky_in_place(&mut a, pa, PIVOT_TOL * scale) {
            break a;
        }
        lambda = Some(match lambda {
            None => RIDGE_SINGULAR,
            Some(l) => (l * 100.0).max(RIDGE_SINGULAR),
        });
    };
    if lambda.is_some() {
        condition = Condition::Regularized;
    }
    let w = cholesky_solve(&factor, pa, &rhs);
    let mut intercept = y_mean;
    for (k, &j) in active.iter().enumerate() {
        coefficients[j] = w[k] / norm[j];
        intercept -= coefficients[j] * x_mean[j];
    }
    LocalModel {
        coefficients,
        intercept,
        condition,
    }
}

/// Fits the target column of a granule on its predictor columns, using all rows.
pub fn fit_local(g: &Granule) -> LocalModel {
    let rows = g.n_rows();
    let p = g.n_predictors();
    let mut x = Matrix::zeros(rows, p);
    let mut y = Vec::with_capacity(rows);
    for i in 0..rows {
        x.row_mut(i).copy_from_slice(g.predictors(i));
        y.push(g.target(i));
    }
    least_squares(&x, &y, Ridge::Auto)
}

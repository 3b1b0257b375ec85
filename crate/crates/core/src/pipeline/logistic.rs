//! L2-regularized logistic regression by full-batch gradient descent.

use crate::linalg::{dot, Matrix};
use crate::pipeline::sigmoid;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogRegParams {
    pub l2: f64,
    pub max_epochs: usize,
    pub grad_tol: f64,
}

impl Default for LogRegParams {
    fn default() -> Self {
        LogRegParams {
            l2: 1e-4,
            max_epochs: 500,
            grad_tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LogisticRegression {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub epochs: usize,
}

/// `log(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Mean log-loss plus `l2/2·‖w‖²` and its gradient.
///
/// `params` holds the weights followed by the bias; the bias is not penalized.
pub fn loss_and_gradient(params: &[f64], x: &Matrix, y: &[u8], l2: f64) -> (f64, Vec<f64>) {
    let d = x.cols();
    let n = x.rows() as f64;
    let (w, b) = (&params[..d], params[d]);
    let mut grad = vec![0.0; d + 1];
    let mut loss = 0.0;
    for (row, &yi) in x.iter_rows().zip(y) {
        let z = dot(w, row) + b;
        // −[y log σ(z) + (1−y) log(1−σ(z))] = softplus(z) − y z
        loss += softplus(z) - yi as f64 * z;
        let e = sigmoid(z) - yi as f64;
        for (g, v) in grad.iter_mut().zip(row) {
            *g += e * v;
        }
        grad[d] += e;
    }
    loss /= n;
    grad.iter_mut().for_each(|g| *g /= n);
    loss += 0.5 * l2 * w.iter().map(|v| v * v).sum::<f64>();
    for (g, v) in grad.iter_mut().zip(w) {
        *g += l2 * v;
    }
    (loss, grad)
}

/// Largest eigenvalue of `[X 1]ᵀ[X 1] / n` by power iteration.
fn gram_spectral_norm(x: &Matrix) -> f64 {
    let d = x.cols() + 1;
    let n = x.rows() as f64;
    let mut v = vec![1.0 / (d as f64).sqrt(); d];
    let mut lambda = 0.0;
    for _ in 0..50 {
        let mut out = vec![0.0; d];
        for row in x.iter_rows() {
            let s = dot(&v[..d - 1], row) + v[d - 1];
            for (o, r) in out.iter_mut().zip(row) {
                *o += s * r;
            }
            out[d - 1] += s;
        }
        out.iter_mut().for_each(|o| *o /= n);
        let norm = dot(&out, &out).sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        lambda = norm;
        v = out.into_iter().map(|o| o / norm).collect();
    }
    lambda
}

impl LogisticRegression {
    /// Gradient descent with step `1/L`, `L` the log-loss Lipschitz bound
    /// `λ_max(XᵀX/n)/4 + l2`.
    pub fn fit(x: &Matrix, y: &[u8], p: &LogRegParams) -> LogisticRegression {
        let d = x.cols();
        let lipschitz = 0.25 * gram_spectral_norm(x) + p.l2;
        let step = if lipschitz > 0.0 {
            1.0 / lipschitz
        } else {
            1.0
        };
        let mut params = vec![0.0; d + 1];
        let mut epochs = 0;
        while epochs < p.max_epochs {
            let (_, g) = loss_and_gradient(&params, x, y, p.l2);
            if dot(&g, &g).sqrt() < p.grad_tol {
                break;
            }
            for (w, gi) in params.iter_mut().zip(&g) {
                *w -= step * gi;
            }
            epochs += 1;
        }
        let bias = params.pop().expect("bias slot");
        LogisticRegression {
            weights: params,
            bias,
            epochs,
        }
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        sigmoid(dot(&self.weights, row) + self.bias)
    }
}

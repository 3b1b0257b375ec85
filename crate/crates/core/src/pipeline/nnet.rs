//! One-hidden-layer ReLU network with a sigmoid output, trained by minibatch SGD.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{dot, Matrix};
use crate::pipeline::sigmoid;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NnetParams {
    pub hidden: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
}

impl Default for NnetParams {
    fn default() -> Self {
        NnetParams {
            hidden: 32,
            learning_rate: 0.01,
            epochs: 100,
            batch_size: 32,
        }
    }
}

/// Flat parameter layout: `W1` (`hidden×d`, row-major), `b1`, `w2`, `b2`.
#[derive(Clone, Debug, PartialEq)]
pub struct NeuralNet {
    inputs: usize,
    hidden: usize,
    params: Vec<f64>,
}

pub fn param_count(inputs: usize, hidden: usize) -> usize {
    hidden * inputs + 2 * hidden + 1
}

fn forward(params: &[f64], d: usize, h: usize, row: &[f64], z1: &mut [f64]) -> f64 {
    let (w1, rest) = params.split_at(h * d);
    let (b1, rest) = rest.split_at(h);
    let (w2, b2) = rest.split_at(h);
    let mut z2 = b2[0];
    for j in 0..h {
        z1[j] = dot(&w1[j * d..(j + 1) * d], row) + b1[j];
        z2 += w2[j] * z1[j].max(0.0);
    }
    z2
}

fn accumulate_gradient(
    params: &[f64],
    d: usize,
    h: usize,
    row: &[f64],
    y: u8,
    grad: &mut [f64],
    z1: &mut [f64],
) -> f64 {
    let z2 = forward(params, d, h, row, z1);
    let p = sigmoid(z2);
    let yf = y as f64;
    let loss = z2.max(0.0) + (-z2.abs()).exp().ln_1p() - yf * z2;
    let dz2 = p - yf;
    let w2_off = h * d + h;
    for j in 0..h {
        let a = z1[j].max(0.0);
        grad[w2_off + j] += dz2 * a;
        if z1[j] > 0.0 {
            let dz1 = dz2 * params[w2_off + j];
            for (g, x) in grad[j * d..(j + 1) * d].iter_mut().zip(row) {
                *g += dz1 * x;
            }
            grad[h * d + j] += dz1;
        }
    }
    grad[w2_off + h] += dz2;
    loss
}

/// Mean log-loss over the rows and its gradient with respect to `params`.
pub fn loss_and_gradient(params: &[f64], hidden: usize, x: &Matrix, y: &[u8]) -> (f64, Vec<f64>) {
    let d = x.cols();
    let mut grad = vec![0.0; params.len()];
    let mut z1 = vec![0.0; hidden];
    let mut loss = 0.0;
    for (row, &yi) in x.iter_rows().zip(y) {
        loss += accumulate_gradient(params, d, hidden, row, yi, &mut grad, &mut z1);
    }
    let n = x.rows() as f64;
    grad.iter_mut().for_each(|g| *g /= n);
    (loss / n, grad)
}

impl NeuralNet {
    /// He-uniform hidden weights, Glorot-uniform output weights, zero biases.
    pub fn init(inputs: usize, hidden: usize, rng: &mut impl Rng) -> NeuralNet {
        let mut params = vec![0.0; param_count(inputs, hidden)];
        let a1 = (6.0 / inputs.max(1) as f64).sqrt();
        for w in &mut params[..hidden * inputs] {
            *w = rng.random_range(-a1..a1);
        }
        let a2 = (6.0 / (hidden + 1) as f64).sqrt();
        let off = hidden * inputs + hidden;
        for w in &mut params[off..off + hidden] {
            *w = rng.random_range(-a2..a2);
        }
        NeuralNet {
            inputs,
            hidden,
            params,
        }
    }

    pub fn fit(x: &Matrix, y: &[u8], p: &NnetParams, seed: u64) -> NeuralNet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut net = NeuralNet::init(x.cols(), p.hidden, &mut rng);
        let d = x.cols();
        let mut order: Vec<usize> = (0..x.rows()).collect();
        let mut grad = vec![0.0; net.params.len()];
        let mut z1 = vec![0.0; p.hidden];
        for _ in 0..p.epochs {
            order.shuffle(&mut rng);
            for batch in order.chunks(p.batch_size.max(1)) {
                grad.iter_mut().for_each(|g| *g = 0.0);
                for &i in batch {
                    accumulate_gradient(
                        &net.params,
                        d,
                        p.hidden,
                        x.row(i),
                        y[i],
                        &mut grad,
                        &mut z1,
                    );
                }
                let scale = p.learning_rate / batch.len() as f64;
                for (w, g) in net.params.iter_mut().zip(&grad) {
                    *w -= scale * g;
                }
            }
        }
        net
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut z1 = vec![0.0; self.hidden];
        sigmoid(forward(
            &self.params,
            self.inputs,
            self.hidden,
            row,
            &mut z1,
        ))
    }
}

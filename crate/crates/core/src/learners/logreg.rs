//! L2-regularized logistic regression fit by damped Newton steps.
//!
//! Weight vectors carry the intercept as their last entry; it is not
//! penalized.

use super::BatchLearner;
use crate::linalg::{dot, sigmoid, softplus, SquareMatrix};

const GRAD_TOL: f64 = 1e-6;
const MAX_NEWTON: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub enum LogRegModel {
    /// Single-class training data: constant score equal to the class rate.
    Prior(f64),
    Weights(Vec<f64>),
}

fn linear(w: &[f64], x: &[f64]) -> f64 {
    let p = x.len();
    dot(&w[..p], x) + w[p]
}

/// Penalized negative log-likelihood and its gradient at `w`.
pub fn logreg_loss_grad(w: &[f64], rows: &[Vec<f64>], labels: &[bool], lambda: f64) -> (f64, Vec<f64>) {
    let p = w.len() - 1;
    let mut loss = 0.0;
    let mut grad = vec![0.0; p + 1];
    for (x, &y) in rows.iter().zip(labels) {
        let z = linear(w, x);
        let y = y as u8 as f64;
        loss += softplus(z) - y * z;
        let r = sigmoid(z) - y;
        for (g, xi) in grad[..p].iter_mut().zip(x) {
            *g += r * xi;
        }
        grad[p] += r;
    }
    for j in 0..p {
        loss += 0.5 * lambda * w[j] * w[j];
        grad[j] += lambda * w[j];
    }
    (loss, grad)
}

fn hessian(w: &[f64], rows: &[Vec<f64>], lambda: f64) -> SquareMatrix {
    let p = w.len() - 1;
    let mut h = SquareMatrix::zeros(p + 1);
    let mut xa = vec![0.0; p + 1];
    xa[p] = 1.0;
    for x in rows {
        xa[..p].copy_from_slice(x);
        let s = sigmoid(linear(w, x));
        let c = s * (1.0 - s);
        for i in 0..=p {
            let ci = c * xa[i];
            for j in 0..=i {
                h[(i, j)] += ci * xa[j];
            }
        }
    }
    for i in 0..=p {
        for j in 0..i {
            h[(j, i)] = h[(i, j)];
        }
    }
    for j in 0..p {
        h[(j, j)] += lambda;
    }
    h
}

/// Fits weights (intercept last). Single-class data yields [`LogRegModel::Prior`].
pub fn logreg_fit(rows: &[Vec<f64>], labels: &[bool], lambda: f64) -> LogRegModel {
    let n = labels.len();
    let pos = labels.iter().filter(|&&y| y).count();
    if n == 0 || pos == 0 || pos == n {
        let rate = if n == 0 { 0.0 } else { pos as f64 / n as f64 };
        return LogRegModel::Prior(rate);
    }
    let p = rows[0].len();
    let mut w = vec![0.0; p + 1];
    let rate = pos as f64 / n as f64;
    w[p] = (rate / (1.0 - rate)).ln();

    let (mut loss, mut grad) = logreg_loss_grad(&w, rows, labels, lambda);
    for _ in 0..MAX_NEWTON {
        if grad.iter().map(|g| g * g).sum::<f64>().sqrt() <= GRAD_TOL {
            break;
        }
        let mut h = hessian(&w, rows, lambda);
        let step = loop {
            if let Some(s) = h.cholesky_solve(&grad) {
                break s;
            }
            // Hessian numerically singular (separable, tiny lambda): add jitter
            for i in 0..=p {
                h[(i, i)] += 1e-8;
            }
        };
        let mut t = 1.0;
        let slope = dot(&grad, &step);
        loop {
            let cand: Vec<f64> = w.iter().zip(&step).map(|(wi, si)| wi - t * si).collect();
            let (l2, g2) = logreg_loss_grad(&cand, rows, labels, lambda);
            if l2 <= loss - 1e-4 * t * slope || t < 1e-10 {
                w = cand;
                loss = l2;
                grad = g2;
                break;
            }
            t *= 0.5;
        }
    }
    LogRegModel::Weights(w)
}

pub fn logreg_score(model: &LogRegModel, x: &[f64]) -> f64 {
    match model {
        LogRegModel::Prior(rate) => *rate,
        LogRegModel::Weights(w) => sigmoid(linear(w, x)),
    }
}

/// Batch adapter.
#[derive(Debug, Clone)]
pub struct LogReg {
    pub lambda: f64,
}

impl BatchLearner for LogReg {
    type Model = LogRegModel;

    fn name(&self) -> &'static str {
        "LogReg"
    }

    fn fit(&self, rows: &[Vec<f64>], labels: &[bool], _seed: u64) -> (LogRegModel, Option<String>) {
        let model = logreg_fit(rows, labels, self.lambda);
        let flag = matches!(model, LogRegModel::Prior(_)).then(|| "single-class data, prior scorer".to_string());
        (model, flag)
    }

    fn predict(&self, model: &LogRegModel, row: &[f64]) -> f64 {
        logreg_score(model, row)
    }
}

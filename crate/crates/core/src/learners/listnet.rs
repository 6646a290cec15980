//! ListNet with a linear scoring function and the top-one approximation.
//!
//! The whole training history is one list. The target top-one distribution
//! is `softmax(y)` over the labels, the model's is `softmax(Xw)`, and
//! training minimizes their cross-entropy by gradient descent.

use super::BatchLearner;
use crate::linalg::{dot, softmax};

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ListNetParams {
    pub iterations: usize,
    pub tol: f64,
    pub step: f64,
}

impl Default for ListNetParams {
    fn default() -> Self {
        ListNetParams {
            iterations: 100,
            tol: 1e-5,
            step: 0.1,
        }
    }
}

/// Probability of observing the ranking `scores[0] > scores[1] > ...` under
/// the Plackett-Luce model with weights `exp(score)`.
pub fn ranking_probability(scores_in_rank_order: &[f64]) -> f64 {
    let mut p = 1.0;
    for i in 0..scores_in_rank_order.len() {
        let tail = &scores_in_rank_order[i..];
        let m = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let denom: f64 = tail.iter().map(|s| (s - m).exp()).sum();
        p *= (tail[0] - m).exp() / denom;
    }
    p
}

/// Top-one cross-entropy and its gradient with respect to `w`.
pub fn listnet_loss_grad(w: &[f64], rows: &[Vec<f64>], labels: &[bool]) -> (f64, Vec<f64>) {
    let targets = softmax(&labels.iter().map(|&y| y as u8 as f64).collect::<Vec<_>>());
    let scores: Vec<f64> = rows.iter().map(|x| dot(w, x)).collect();
    let model = softmax(&scores);
    let m = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_z = m + scores.iter().map(|s| (s - m).exp()).sum::<f64>().ln();
    let mut loss = 0.0;
    let mut grad = vec![0.0; w.len()];
    for ((x, s), (pt, pm)) in rows.iter().zip(&scores).zip(targets.iter().zip(&model)) {
        loss -= pt * (s - log_z);
        let d = pm - pt;
        for (g, xi) in grad.iter_mut().zip(x) {
            *g += d * xi;
        }
    }
    (loss, grad)
}

/// Gradient descent from zero weights; stops when the loss changes by less
/// than `tol` or after `iterations` steps.
pub fn listnet_fit(rows: &[Vec<f64>], labels: &[bool], params: &ListNetParams) -> Vec<f64> {
    let dim = rows.first().map_or(0, Vec::len);
    let mut w = vec![0.0; dim];
    if rows.len() < 2 {
        return w;
    }
    let (mut loss, mut grad) = listnet_loss_grad(&w, rows, labels);
    for _ in 0..params.iterations {
        for (wi, g) in w.iter_mut().zip(&grad) {
            *wi -= params.step * g;
        }
        let (next, g) = listnet_loss_grad(&w, rows, labels);
        let change = (loss - next).abs();
        loss = next;
        grad = g;
        if change < params.tol {
            break;
        }
    }
    w
}

pub fn listnet_score(weights: &[f64], x: &[f64]) -> f64 {
    dot(weights, x)
}

/// Batch adapter.
#[derive(Debug, Clone)]
pub struct ListNet {
    pub params: ListNetParams,
}

impl BatchLearner for ListNet {
    type Model = Vec<f64>;

    fn name(&self) -> &'static str {
        "ListNet"
    }

    fn fit(&self, rows: &[Vec<f64>], labels: &[bool], _seed: u64) -> (Vec<f64>, Option<String>) {
        (listnet_fit(rows, labels, &self.params), None)
    }

    fn predict(&self, model: &Vec<f64>, row: &[f64]) -> f64 {
        listnet_score(model, row)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_scores_give_inverse_factorial() {
        for n in 1..=6usize {
            let fact: f64 = (1..=n).map(|k| k as f64).product();
            let p = ranking_probability(&vec![0.7; n]);
            assert!((p - 1.0 / fact).abs() < 1e-15, "n = {n}");
        }
    }

    #[test]
    fn ranking_probabilities_sum_to_one() {
        let s = [0.3, -1.0, 2.0];
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let total: f64 = perms.iter().map(|p| ranking_probability(&p.map(|i| s[i]))).sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn equal_labels_zero_model_is_optimal() {
        let rows: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64 - 3.5, ((i * 3) % 5) as f64 - 2.0]).collect();
        for y in [true, false] {
            let labels = vec![y; rows.len()];
            let (_, g) = listnet_loss_grad(&[0.0, 0.0], &rows, &labels);
            assert!(g.iter().all(|x| x.abs() < 1e-12), "{g:?}");
        }
    }

    #[test]
    fn fit_ranks_targets_higher() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64 / 10.0 - 1.0]).collect();
        let labels: Vec<bool> = (0..20).map(|i| i >= 12).collect();
        let w = listnet_fit(&rows, &labels, &ListNetParams::default());
        assert!(w[0] > 0.0);
        let (l0, _) = listnet_loss_grad(&[0.0], &rows, &labels);
        let (l1, _) = listnet_loss_grad(&w, &rows, &labels);
        assert!(l1 < l0);
    }
}

//! Data-driven scorers estimating the payoff of querying a border node.
//!
//! All scorers consume raw (unstandardized) feature rows. Batch learners
//! are wrapped in [`Refitting`], which keeps the observation history,
//! standardizes it, and refits lazily when asked to score.

mod ewls;
mod forest;
mod listnet;
mod logreg;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{HarvestError, Result};
use crate::features::Standardizer;
use crate::graph::NodeId;
use crate::rng::derive_seed;

pub use ewls::{EwlsScorer, EwlsState};
pub use forest::{rf_fit, rf_score, Forest, ForestParams, RandomForest, Tree, TreeNode};
pub use listnet::{
    listnet_fit, listnet_loss_grad, listnet_score, ranking_probability, ListNet, ListNetParams,
};
pub use logreg::{logreg_fit, logreg_loss_grad, logreg_score, LogReg, LogRegModel};

/// One training example: raw features of a queried node and its label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub features: Vec<f64>,
    pub label: bool,
}

/// A fitted (or fittable) model mapping feature rows to payoff scores.
/// Higher scores mean "more likely a target".
pub trait Scorer: Send {
    fn name(&self) -> &str;

    /// Absorbs one training example.
    fn update(&mut self, obs: &Observation) -> Result<()>;

    /// Scores raw feature rows.
    fn score_rows(&mut self, rows: &[Vec<f64>]) -> Result<Vec<f64>>;

    fn score(&mut self, features: &[f64]) -> Result<f64> {
        Ok(self.score_rows(&[features.to_vec()])?[0])
    }

    /// Diagnostics raised since the last call (e.g. a fallback to the prior).
    fn take_flags(&mut self) -> Vec<String> {
        Vec::new()
    }
}

/// A learner refit from scratch on the full history.
pub trait BatchLearner: Send {
    type Model: Send;

    fn name(&self) -> &'static str;

    /// Fits on standardized rows. `seed` is derived from the history length,
    /// so the result depends only on the training content.
    fn fit(&self, rows: &[Vec<f64>], labels: &[bool], seed: u64) -> (Self::Model, Option<String>);

    fn predict(&self, model: &Self::Model, row: &[f64]) -> f64;
}

struct Fitted<M> {
    at: usize,
    standardizer: Standardizer,
    model: M,
}

/// History-keeping wrapper that refits a [`BatchLearner`] at most every
/// `refit_every` new observations.
pub struct Refitting<L: BatchLearner> {
    learner: L,
    dim: usize,
    history: Vec<Observation>,
    refit_every: usize,
    seed: u64,
    fitted: Option<Fitted<L::Model>>,
    flags: Vec<String>,
}

impl<L: BatchLearner> Refitting<L> {
    pub fn new(learner: L, dim: usize, refit_every: usize, seed: u64) -> Self {
        Refitting {
            learner,
            dim,
            history: Vec::new(),
            refit_every: refit_every.max(1),
            seed,
            fitted: None,
            flags: Vec::new(),
        }
    }

    pub fn history(&self) -> &[Observation] {
        &self.history
    }

    fn ensure_fitted(&mut self) {
        let stale = match &self.fitted {
            None => true,
            Some(f) => self.history.len() - f.at >= self.refit_every,
        };
        if !stale || self.history.is_empty() {
            return;
        }
        let order = canonical_order(&self.history);
        let raw: Vec<Vec<f64>> = order.iter().map(|&i| self.history[i].features.clone()).collect();
        let labels: Vec<bool> = order.iter().map(|&i| self.history[i].label).collect();
        let standardizer = Standardizer::fit(&raw);
        let rows: Vec<Vec<f64>> = raw.iter().map(|r| standardizer.transform(r)).collect();
        let seed = derive_seed(self.seed, self.history.len() as u64);
        let (model, flag) = self.learner.fit(&rows, &labels, seed);
        if let Some(flag) = flag {
            self.flags.push(format!("{}: {flag}", self.learner.name()));
        }
        self.fitted = Some(Fitted {
            at: self.history.len(),
            standardizer,
            model,
        });
    }
}

/// Sorts examples by label, then lexicographically by features, so that
/// batch fits do not depend on arrival order.
fn canonical_order(history: &[Observation]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..history.len()).collect();
    idx.sort_by(|&a, &b| {
        let (x, y) = (&history[a], &history[b]);
        x.label.cmp(&y.label).then_with(|| {
            x.features
                .iter()
                .zip(&y.features)
                .map(|(p, q)| p.total_cmp(q))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    idx
}

fn check_dim(dim: usize, row: &[f64]) -> Result<()> {
    if row.len() != dim {
        return Err(HarvestError::Contract(format!(
            "feature row has {} columns, expected {dim}",
            row.len()
        )));
    }
    Ok(())
}

impl<L: BatchLearner> Scorer for Refitting<L> {
    fn name(&self) -> &str {
        self.learner.name()
    }

    fn update(&mut self, obs: &Observation) -> Result<()> {
        check_dim(self.dim, &obs.features)?;
        self.history.push(obs.clone());
        Ok(())
    }

    fn score_rows(&mut self, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
        for r in rows {
            check_dim(self.dim, r)?;
        }
        self.ensure_fitted();
        Ok(match &self.fitted {
            None => vec![0.0; rows.len()],
            Some(f) => rows
                .iter()
                .map(|r| self.learner.predict(&f.model, &f.standardizer.transform(r)))
                .collect(),
        })
    }

    fn take_flags(&mut self) -> Vec<String> {
        std::mem::take(&mut self.flags)
    }
}

/// Index of the maximal score; ties are broken uniformly at random. The RNG
/// is only consulted when there is more than one maximizer.
pub fn argmax_tie_break<R: Rng + ?Sized>(scores: &[f64], rng: &mut R) -> Option<usize> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if scores.is_empty() {
        return None;
    }
    let ties: Vec<usize> = (0..scores.len()).filter(|&i| scores[i] == max).collect();
    match ties.len() {
        0 => Some(0), // every score is NaN
        1 => Some(ties[0]),
        k => Some(ties[rng.random_range(0..k)]),
    }
}

/// The border node with the highest score (`scores[i]` belongs to
/// `border[i]`), ties broken uniformly at random.
pub fn rank_border<R: Rng + ?Sized>(border: &[NodeId], scores: &[f64], rng: &mut R) -> Result<NodeId> {
    if border.is_empty() {
        return Err(HarvestError::ExhaustedBorder);
    }
    if border.len() != scores.len() {
        return Err(HarvestError::Contract(format!(
            "{} scores for {} border nodes",
            scores.len(),
            border.len()
        )));
    }
    Ok(border[argmax_tie_break(scores, rng).expect("non-empty")])
}

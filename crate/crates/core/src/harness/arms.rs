//! Uniform wrapper over heuristics and learners so a bandit can treat them
//! as interchangeable arms.

use crate::error::Result;
use crate::features::{FeatureExtractor, FeatureVector};
use crate::graph::{NodeId, ObservedState};
use crate::heuristics::ActiveSearch;
use crate::learners::{EwlsScorer, ListNet, LogReg, Observation, RandomForest, Refitting, Scorer};

use super::config::{LearnerParams, ModelKind};

pub enum Arm {
    Mod,
    ActiveSearch(ActiveSearch),
    Learner(Box<dyn Scorer>),
}

impl ModelKind {
    /// Builds a fresh arm. `seed` only matters for randomized learners.
    pub fn build(self, params: &LearnerParams, attr_dim: usize, seed: u64) -> Result<Arm> {
        let dim = FeatureVector::dim(attr_dim);
        let every = params.refit_every;
        Ok(match self {
            ModelKind::Mod => Arm::Mod,
            ModelKind::ActiveSearch => Arm::ActiveSearch(ActiveSearch::new(params.propagation.clone())?),
            ModelKind::Ewls => Arm::Learner(Box::new(EwlsScorer::new(dim, params.ewls_beta, params.ewls_lambda)?)),
            ModelKind::LogReg => Arm::Learner(Box::new(Refitting::new(
                LogReg {
                    lambda: params.logreg_lambda,
                },
                dim,
                every,
                seed,
            ))),
            ModelKind::RandomForest => Arm::Learner(Box::new(Refitting::new(
                RandomForest {
                    params: params.forest.clone(),
                },
                dim,
                every,
                seed,
            ))),
            ModelKind::ListNet => Arm::Learner(Box::new(Refitting::new(
                ListNet {
                    params: params.listnet.clone(),
                },
                dim,
                every,
                seed,
            ))),
        })
    }
}

impl Arm {
    /// Scores `nodes` (all on the border of `state`).
    pub fn score(&mut self, state: &ObservedState, nodes: &[NodeId], fx: &mut FeatureExtractor) -> Result<Vec<f64>> {
        match self {
            Arm::Mod => Ok(nodes.iter().map(|&v| state.target_neighbor_count(v) as f64).collect()),
            Arm::ActiveSearch(a) => {
                a.score_border(state);
                Ok(nodes.iter().map(|&v| a.value(v)).collect())
            }
            Arm::Learner(s) => {
                let rows = fx.rows(state, nodes)?;
                s.score_rows(&rows)
            }
        }
    }

    /// Feeds one observation to learners; heuristics read the state directly.
    pub fn observe(&mut self, obs: &Observation) -> Result<()> {
        match self {
            Arm::Learner(s) => s.update(obs),
            _ => Ok(()),
        }
    }

    pub fn is_learner(&self) -> bool {
        matches!(self, Arm::Learner(_))
    }

    pub fn take_flags(&mut self) -> Vec<String> {
        match self {
            Arm::Mod => Vec::new(),
            Arm::ActiveSearch(a) => a.take_flags(),
            Arm::Learner(s) => s.take_flags(),
        }
    }
}

//! Arm-selection policies over a fixed set of models, plus samplers that
//! turn a model's ranking into a query distribution.

mod beta;
mod exp3;
mod sampler;
mod stochastic;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{HarvestError, Result};

pub use beta::BetaPolicy;
pub use exp3::Exp3;
pub use sampler::{
    sample_from_ranks, solve_mass_parameter, top_mass, MassSolution, RankDistribution, RankFamily,
    TopSchedule,
};
pub use stochastic::{EpsilonGreedy, RoundRobin, Ucb1};

pub trait BanditPolicy: Send {
    fn name(&self) -> &'static str;

    fn arm_count(&self) -> usize;

    fn select(&mut self, rng: &mut dyn RngCore) -> usize;

    /// Credits `payoff ∈ [0, 1]` to `arm`.
    fn update(&mut self, arm: usize, payoff: f64) -> Result<()>;
}

pub(crate) fn check_arm(arm: usize, k: usize) -> Result<()> {
    if arm >= k {
        return Err(HarvestError::Contract(format!("arm {arm} out of range 0..{k}")));
    }
    Ok(())
}

pub(crate) fn check_payoff(payoff: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&payoff) {
        return Err(HarvestError::Contract(format!("payoff {payoff} not in [0, 1]")));
    }
    Ok(())
}

/// Policy choice with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PolicyKind {
    RoundRobin,
    Thompson,
    /// Dynamic Thompson sampling with cap `C` on `α + β`.
    DynamicThompson { cap: f64 },
    Ucb1,
    EpsilonGreedy { epsilon: f64 },
    Exp3 { gamma: f64 },
}

impl PolicyKind {
    pub fn build(&self, arms: usize) -> Result<Box<dyn BanditPolicy>> {
        if arms == 0 {
            return Err(HarvestError::Validation("a bandit needs at least one arm".into()));
        }
        Ok(match *self {
            PolicyKind::RoundRobin => Box::new(RoundRobin::new(arms)),
            PolicyKind::Thompson => Box::new(BetaPolicy::thompson(arms)),
            PolicyKind::DynamicThompson { cap } => Box::new(BetaPolicy::dynamic(arms, cap)?),
            PolicyKind::Ucb1 => Box::new(Ucb1::new(arms)),
            PolicyKind::EpsilonGreedy { epsilon } => Box::new(EpsilonGreedy::new(arms, epsilon)?),
            PolicyKind::Exp3 { gamma } => Box::new(Exp3::new(arms, gamma)?),
        })
    }
}

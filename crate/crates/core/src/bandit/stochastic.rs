use rand::{Rng, RngCore};

use super::{check_arm, check_payoff, BanditPolicy};
use crate::error::{HarvestError, Result};

/// Cycles through arms in registration order.
#[derive(Debug, Clone)]
pub struct RoundRobin {
    arms: usize,
    selections: usize,
}

impl RoundRobin {
    pub fn new(arms: usize) -> Self {
        RoundRobin { arms, selections: 0 }
    }
}

impl BanditPolicy for RoundRobin {
    fn name(&self) -> &'static str {
        "RR"
    }

    fn arm_count(&self) -> usize {
        self.arms
    }

    fn select(&mut self, _rng: &mut dyn RngCore) -> usize {
        let arm = self.selections % self.arms;
        self.selections += 1;
        arm
    }

    fn update(&mut self, arm: usize, payoff: f64) -> Result<()> {
        check_arm(arm, self.arms)?;
        check_payoff(payoff)
    }
}

#[derive(Debug, Clone)]
struct Tally {
    pulls: Vec<u64>,
    sums: Vec<f64>,
}

impl Tally {
    fn new(arms: usize) -> Self {
        Tally {
            pulls: vec![0; arms],
            sums: vec![0.0; arms],
        }
    }

    fn mean(&self, k: usize) -> f64 {
        if self.pulls[k] == 0 {
            0.0
        } else {
            self.sums[k] / self.pulls[k] as f64
        }
    }

    fn add(&mut self, arm: usize, payoff: f64) -> Result<()> {
        check_arm(arm, self.pulls.len())?;
        check_payoff(payoff)?;
        self.pulls[arm] += 1;
        self.sums[arm] += payoff;
        Ok(())
    }
}

/// UCB1: every arm once, then `argmax mean + sqrt(2 ln N / n_k)`.
#[derive(Debug, Clone)]
pub struct Ucb1 {
    tally: Tally,
}

impl Ucb1 {
    pub fn new(arms: usize) -> Self {
        Ucb1 { tally: Tally::new(arms) }
    }

    pub fn pulls(&self, arm: usize) -> u64 {
        self.tally.pulls[arm]
    }

    pub fn index(&self, arm: usize) -> f64 {
        let n = self.tally.pulls[arm];
        if n == 0 {
            return f64::INFINITY;
        }
        let total: u64 = self.tally.pulls.iter().sum();
        self.tally.mean(arm) + (2.0 * (total as f64).ln() / n as f64).sqrt()
    }
}

impl BanditPolicy for Ucb1 {
    fn name(&self) -> &'static str {
        "UCB1"
    }

    fn arm_count(&self) -> usize {
        self.tally.pulls.len()
    }

    fn select(&mut self, _rng: &mut dyn RngCore) -> usize {
        if let Some(k) = self.tally.pulls.iter().position(|&n| n == 0) {
            return k;
        }
        let mut best = 0;
        for k in 1..self.arm_count() {
            if self.index(k) > self.index(best) {
                best = k;
            }
        }
        best
    }

    fn update(&mut self, arm: usize, payoff: f64) -> Result<()> {
        self.tally.add(arm, payoff)
    }
}

/// With probability ε a uniform arm, otherwise the best empirical mean
/// (ties broken uniformly).
#[derive(Debug, Clone)]
pub struct EpsilonGreedy {
    epsilon: f64,
    tally: Tally,
}

impl EpsilonGreedy {
    pub fn new(arms: usize, epsilon: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(HarvestError::Validation(format!("epsilon {epsilon} not in [0, 1]")));
        }
        Ok(EpsilonGreedy {
            epsilon,
            tally: Tally::new(arms),
        })
    }

    pub fn mean(&self, arm: usize) -> f64 {
        self.tally.mean(arm)
    }
}

impl BanditPolicy for EpsilonGreedy {
    fn name(&self) -> &'static str {
        "eps-greedy"
    }

    fn arm_count(&self) -> usize {
        self.tally.pulls.len()
    }

    fn select(&mut self, rng: &mut dyn RngCore) -> usize {
        let k = self.arm_count();
        if rng.random::<f64>() < self.epsilon {
            return rng.random_range(0..k);
        }
        let means: Vec<f64> = (0..k).map(|a| self.tally.mean(a)).collect();
        crate::learners::argmax_tie_break(&means, rng).expect("at least one arm")
    }

    fn update(&mut self, arm: usize, payoff: f64) -> Result<()> {
        self.tally.add(arm, payoff)
    }
}

use rand::{Rng, RngCore};

use super::{check_arm, check_payoff, BanditPolicy};
use crate::error::{HarvestError, Result};

/// Exp3 with uniform mixing `γ` and importance-weighted reward estimates.
/// Weights are rescaled so the largest is 1 after every update.
#[derive(Debug, Clone)]
pub struct Exp3 {
    gamma: f64,
    weights: Vec<f64>,
}

impl Exp3 {
    pub fn new(arms: usize, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(HarvestError::Validation(format!("gamma {gamma} not in (0, 1]")));
        }
        Ok(Exp3 {
            gamma,
            weights: vec![1.0; arms],
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let k = self.weights.len() as f64;
        let total: f64 = self.weights.iter().sum();
        self.weights
            .iter()
            .map(|w| (1.0 - self.gamma) * w / total + self.gamma / k)
            .collect()
    }
}

impl BanditPolicy for Exp3 {
    fn name(&self) -> &'static str {
        "Exp3"
    }

    fn arm_count(&self) -> usize {
        self.weights.len()
    }

    fn select(&mut self, rng: &mut dyn RngCore) -> usize {
        let probs = self.probabilities();
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (k, p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return k;
            }
        }
        probs.len() - 1
    }

    fn update(&mut self, arm: usize, payoff: f64) -> Result<()> {
        check_arm(arm, self.weights.len())?;
        check_payoff(payoff)?;
        let k = self.weights.len() as f64;
        let p = self.probabilities()[arm];
        let estimate = payoff / p;
        self.weights[arm] *= (self.gamma * estimate / k).exp();
        let max = self.weights.iter().copied().fold(0.0, f64::max);
        for w in &mut self.weights {
            *w /= max;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn initially_uniform() {
        let e = Exp3::new(4, 0.2).unwrap();
        assert!(e.probabilities().iter().all(|&p| p == 0.25));
    }

    #[test]
    fn probabilities_floor_and_finite_weights() {
        let mut e = Exp3::new(3, 0.1).unwrap();
        let mut rng = seeded(2);
        for _ in 0..5000 {
            let a = e.select(&mut rng);
            e.update(a, if a == 0 { 1.0 } else { 0.0 }).unwrap();
            let probs = e.probabilities();
            assert!(probs.iter().all(|&p| p >= 0.1 / 3.0 - 1e-15));
            assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(e.weights().iter().all(|w| w.is_finite() && *w > 0.0));
        }
        assert!(e.probabilities()[0] > 0.9);
    }
}

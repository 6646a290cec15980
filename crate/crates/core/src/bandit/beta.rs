//! Thompson sampling with Beta posteriors, optionally capped (dynamic
//! Thompson sampling) so that old evidence decays.

use rand::RngCore;
use rand_distr::{Beta, Distribution};

use super::{check_arm, check_payoff, BanditPolicy};
use crate::error::{HarvestError, Result};

/// Relative slack when deciding whether `α + β` has reached the cap; after
/// rescaling the sum equals `C` only up to rounding.
const CAP_SLACK: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct BetaPolicy {
    alpha: Vec<f64>,
    beta: Vec<f64>,
    cap: Option<f64>,
}

impl BetaPolicy {
    /// Plain Thompson sampling from `Beta(1, 1)` priors.
    pub fn thompson(arms: usize) -> Self {
        BetaPolicy {
            alpha: vec![1.0; arms],
            beta: vec![1.0; arms],
            cap: None,
        }
    }

    /// Dynamic Thompson sampling with an integral threshold `cap ≥ 2`.
    /// From `Beta(1, 1)` each update adds exactly 1 to `α + β`, so an
    /// integral cap is reached exactly and never overshot.
    pub fn dynamic(arms: usize, cap: f64) -> Result<Self> {
        if !(cap >= 2.0) || !cap.is_finite() || cap.fract() != 0.0 {
            return Err(HarvestError::Validation(format!("DTS threshold C = {cap} must be an integer >= 2")));
        }
        Ok(BetaPolicy {
            cap: Some(cap),
            ..Self::thompson(arms)
        })
    }

    pub fn alpha(&self, arm: usize) -> f64 {
        self.alpha[arm]
    }

    pub fn beta(&self, arm: usize) -> f64 {
        self.beta[arm]
    }

    pub fn cap(&self) -> Option<f64> {
        self.cap
    }

    /// Overrides an arm's parameters (both must be positive).
    pub fn set_params(&mut self, arm: usize, alpha: f64, beta: f64) -> Result<()> {
        check_arm(arm, self.alpha.len())?;
        if !(alpha > 0.0 && beta > 0.0) {
            return Err(HarvestError::Contract(format!("Beta({alpha}, {beta}) is not valid")));
        }
        self.alpha[arm] = alpha;
        self.beta[arm] = beta;
        Ok(())
    }

    /// Whether `arm`'s next update takes the rescaling branch.
    pub fn at_cap(&self, arm: usize) -> bool {
        match self.cap {
            Some(c) => self.alpha[arm] + self.beta[arm] >= c * (1.0 - CAP_SLACK),
            None => false,
        }
    }

    /// One posterior draw per arm, in arm order.
    pub fn sample(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        self.alpha
            .iter()
            .zip(&self.beta)
            .map(|(&a, &b)| Beta::new(a, b).expect("positive parameters").sample(rng))
            .collect()
    }
}

impl BanditPolicy for BetaPolicy {
    fn name(&self) -> &'static str {
        if self.cap.is_some() {
            "DTS"
        } else {
            "TS"
        }
    }

    fn arm_count(&self) -> usize {
        self.alpha.len()
    }

    fn select(&mut self, rng: &mut dyn RngCore) -> usize {
        let draws = self.sample(rng);
        let mut best = 0;
        for (k, &d) in draws.iter().enumerate() {
            if d > draws[best] {
                best = k;
            }
        }
        best
    }

    fn update(&mut self, arm: usize, payoff: f64) -> Result<()> {
        check_arm(arm, self.alpha.len())?;
        check_payoff(payoff)?;
        let (mut a, mut b) = (self.alpha[arm] + payoff, self.beta[arm] + (1.0 - payoff));
        if let Some(c) = self.cap {
            if self.at_cap(arm) {
                let s = c / (c + 1.0);
                a *= s;
                b *= s;
            }
            // fractional payoffs accumulate rounding; keep the sum at or below c
            while a + b > c && a + b <= c * (1.0 + CAP_SLACK) {
                if b >= a {
                    b = b.next_down();
                } else {
                    a = a.next_down();
                }
            }
        }
        self.alpha[arm] = a;
        self.beta[arm] = b;
        Ok(())
    }
}

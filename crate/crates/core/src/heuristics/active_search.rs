//! Label propagation restricted to the observed graph.
//!
//! Each queried node is tied to a virtual node carrying its label with
//! weight `w0`. The fixed point satisfies, for every node `v` of the
//! observed graph,
//!
//! ```text
//! f(v) = (Σ_{u ∈ N(v)} f(u) + w0·y_v·[v ∈ Q]) / (deg(v) + w0·[v ∈ Q])
//! ```
//!
//! and is reached by Gauss-Seidel sweeps.

use serde::{Deserialize, Serialize};

use crate::error::{HarvestError, Result};
use crate::graph::{NodeId, ObservedState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagationConfig {
    pub virtual_weight: f64,
    pub tol: f64,
    pub max_iters: usize,
    pub prior: f64,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        PropagationConfig {
            virtual_weight: 1.0,
            tol: 1e-6,
            max_iters: 500,
            prior: 0.0,
        }
    }
}

impl PropagationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.virtual_weight > 0.0) || !(self.tol > 0.0) || self.max_iters == 0 {
            return Err(HarvestError::Validation(format!("bad propagation config {self:?}")));
        }
        if !(0.0..=1.0).contains(&self.prior) {
            return Err(HarvestError::Validation(format!("prior {} not in [0, 1]", self.prior)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Propagation {
    /// One value per node of the hidden graph; nodes outside the observed
    /// graph hold the prior.
    pub values: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl Propagation {
    /// Values restricted to the border, in border order.
    pub fn border_scores(&self, state: &ObservedState) -> Vec<f64> {
        state.border().iter().map(|&b| self.values[b]).collect()
    }
}

fn sweep_until_converged(state: &ObservedState, cfg: &PropagationConfig, f: &mut [f64]) -> (usize, bool) {
    let hidden = state.hidden();
    let w0 = cfg.virtual_weight;
    let mut prev_delta = f64::INFINITY;
    for it in 1..=cfg.max_iters {
        let mut delta: f64 = 0.0;
        for &v in state.queried() {
            let mut sum = 0.0;
            for &u in hidden.neighbors(v) {
                sum += f[u];
            }
            let y = hidden.label(v) as u8 as f64;
            let next = (sum + w0 * y) / (hidden.degree(v) as f64 + w0);
            delta = delta.max((next - f[v]).abs());
            f[v] = next;
        }
        for &b in state.border() {
            let mut sum = 0.0;
            let mut deg = 0usize;
            for u in state.observed_neighbors(b) {
                sum += f[u];
                deg += 1;
            }
            let next = sum / deg as f64;
            delta = delta.max((next - f[b]).abs());
            f[b] = next;
        }
        // a small step can still leave a large error when contraction is slow;
        // bound the remaining error by delta·ρ/(1-ρ) with ρ estimated from the last two sweeps;
        // the estimate of ρ is noisy, so keep a factor of 4 in reserve
        if delta == 0.0 {
            return (it, true);
        }
        if prev_delta.is_finite() {
            let rho = (delta / prev_delta).min(0.9999);
            if 4.0 * delta * (rho / (1.0 - rho)).max(1.0) < cfg.tol {
                return (it, true);
            }
        }
        prev_delta = delta;
    }
    (cfg.max_iters, false)
}

/// Propagates labels from the prior-initialized state to a fixed point.
pub fn as_propagate(state: &ObservedState, cfg: &PropagationConfig) -> Result<Propagation> {
    cfg.validate()?;
    if state.queried().is_empty() {
        return Err(HarvestError::Contract("observed graph is empty".into()));
    }
    let mut values = vec![cfg.prior; state.node_count()];
    let (iterations, converged) = sweep_until_converged(state, cfg, &mut values);
    Ok(Propagation {
        values,
        iterations,
        converged,
    })
}

/// Active-search scorer that warm-starts each propagation from the
/// previous fixed point. Nodes new to the observed graph start at the prior.
#[derive(Debug, Clone)]
pub struct ActiveSearch {
    cfg: PropagationConfig,
    values: Vec<f64>,
    flags: Vec<String>,
}

impl ActiveSearch {
    pub fn new(cfg: PropagationConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(ActiveSearch {
            cfg,
            values: Vec::new(),
            flags: Vec::new(),
        })
    }

    pub fn config(&self) -> &PropagationConfig {
        &self.cfg
    }

    /// Scores for the current border, in border order.
    pub fn score_border(&mut self, state: &ObservedState) -> Vec<f64> {
        if self.values.len() != state.node_count() {
            self.values = vec![self.cfg.prior; state.node_count()];
        }
        let (iters, converged) = sweep_until_converged(state, &self.cfg, &mut self.values);
        if !converged {
            self.flags.push(format!("ActiveSearch: no convergence after {iters} sweeps"));
        }
        state.border().iter().map(|&b| self.values[b]).collect()
    }

    /// Value of `v` after the latest propagation.
    pub fn value(&self, v: NodeId) -> f64 {
        self.values.get(v).copied().unwrap_or(self.cfg.prior)
    }

    pub fn take_flags(&mut self) -> Vec<String> {
        std::mem::take(&mut self.flags)
    }
}

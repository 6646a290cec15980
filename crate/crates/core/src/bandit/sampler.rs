//! Score-to-probability mappings over a ranked border: truncated geometric
//! `P(π) ∝ (1−q)^(π−1) q` and truncated zeta `P(π) ∝ π^(−r)`.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{HarvestError, Result};
use crate::graph::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RankFamily {
    Geometric,
    Zeta,
}

impl RankFamily {
    /// Search interval for the family parameter.
    pub fn bounds(self) -> (f64, f64) {
        match self {
            RankFamily::Geometric => (1e-9, 1.0 - 1e-9),
            RankFamily::Zeta => (1.0, 50.0),
        }
    }

    fn check(self, parameter: f64) -> Result<()> {
        let ok = match self {
            RankFamily::Geometric => parameter > 0.0 && parameter < 1.0,
            RankFamily::Zeta => parameter >= 1.0 && parameter.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(HarvestError::Validation(format!("{self:?} parameter {parameter} out of range")))
        }
    }

    fn weights(self, parameter: f64, n: usize) -> Vec<f64> {
        match self {
            RankFamily::Geometric => {
                let log_keep = (-parameter).ln_1p();
                (0..n).map(|i| (i as f64 * log_keep).exp()).collect()
            }
            RankFamily::Zeta => (1..=n).map(|i| (i as f64).powf(-parameter)).collect(),
        }
    }
}

/// Probability mass on the first `k` of `n` ranks.
pub fn top_mass(family: RankFamily, parameter: f64, n: usize, k: usize) -> f64 {
    let k = k.min(n);
    match family {
        RankFamily::Geometric => {
            let log_keep = (-parameter).ln_1p();
            (-(k as f64 * log_keep).exp_m1()) / (-(n as f64 * log_keep).exp_m1())
        }
        RankFamily::Zeta => {
            let w = family.weights(parameter, n);
            w[..k].iter().sum::<f64>() / w.iter().sum::<f64>()
        }
    }
}

/// Result of [`solve_mass_parameter`]; `degenerate` marks the uniform limit
/// where the parameter sits at its lower search bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassSolution {
    pub parameter: f64,
    pub mass: f64,
    pub degenerate: bool,
}

const MASS_TOL: f64 = 1e-6;

/// Finds the family parameter whose top-`k` mass over `n` ranks is `x`.
pub fn solve_mass_parameter(n: usize, k: usize, x: f64, family: RankFamily) -> Result<MassSolution> {
    if k == 0 || k >= n {
        return Err(HarvestError::Contract(format!("need 1 <= k < n, got k = {k}, n = {n}")));
    }
    if !(x > 0.0 && x < 1.0) {
        return Err(HarvestError::Contract(format!("target mass {x} not in (0, 1)")));
    }
    let (mut lo, mut hi) = family.bounds();
    if (x - k as f64 / n as f64).abs() <= 1e-12 {
        return Ok(MassSolution {
            parameter: lo,
            mass: top_mass(family, lo, n, k),
            degenerate: true,
        });
    }
    let (m_lo, m_hi) = (top_mass(family, lo, n, k), top_mass(family, hi, n, k));
    if x < m_lo - MASS_TOL || x > m_hi + MASS_TOL {
        return Err(HarvestError::Infeasible { x, lo: m_lo, hi: m_hi });
    }
    if x <= m_lo {
        return Ok(MassSolution { parameter: lo, mass: m_lo, degenerate: false });
    }
    if x >= m_hi {
        return Ok(MassSolution { parameter: hi, mass: m_hi, degenerate: false });
    }
    let mut mid = 0.5 * (lo + hi);
    let mut mass = top_mass(family, mid, n, k);
    for _ in 0..200 {
        if (mass - x).abs() <= 1e-12 {
            break;
        }
        if mass < x {
            lo = mid;
        } else {
            hi = mid;
        }
        let next = 0.5 * (lo + hi);
        if next == mid {
            break;
        }
        mid = next;
        mass = top_mass(family, mid, n, k);
    }
    debug_assert!((mass - x).abs() <= MASS_TOL);
    Ok(MassSolution { parameter: mid, mass, degenerate: false })
}

/// How many top ranks should hold the target mass at step `t` of `budget`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TopSchedule {
    /// A fixed number of ranks.
    Count(usize),
    /// A fraction of the border, rounded up.
    Fraction(f64),
    /// `min{10 (1 − t/T), 1}`, rounded up to at least 1.
    Decaying,
}

impl TopSchedule {
    pub fn top_k(&self, n: usize, t: usize, budget: usize) -> usize {
        let k = match *self {
            TopSchedule::Count(k) => k,
            TopSchedule::Fraction(f) => (f * n as f64).ceil() as usize,
            TopSchedule::Decaying => {
                let raw = (10.0 * (1.0 - t as f64 / budget.max(1) as f64)).min(1.0);
                raw.ceil().max(1.0) as usize
            }
        };
        k.max(1)
    }
}

/// Border nodes ordered by decreasing score with a probability per rank.
#[derive(Debug, Clone, PartialEq)]
pub struct RankDistribution {
    ranks: Vec<NodeId>,
    probs: Vec<f64>,
    family: RankFamily,
    parameter: f64,
}

impl RankDistribution {
    /// Ranks `nodes` by `scores` (highest first; equal scores keep input
    /// order) and normalizes the family weights.
    pub fn from_scores(nodes: &[NodeId], scores: &[f64], family: RankFamily, parameter: f64) -> Result<Self> {
        if nodes.is_empty() {
            return Err(HarvestError::ExhaustedBorder);
        }
        if nodes.len() != scores.len() {
            return Err(HarvestError::Contract(format!(
                "{} nodes but {} scores",
                nodes.len(),
                scores.len()
            )));
        }
        family.check(parameter)?;
        let mut order: Vec<usize> = (0..nodes.len()).collect();
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
        let ranks = order.into_iter().map(|i| nodes[i]).collect();
        let mut probs = family.weights(parameter, nodes.len());
        let total: f64 = probs.iter().sum();
        for p in &mut probs {
            *p /= total;
        }
        Ok(RankDistribution { ranks, probs, family, parameter })
    }

    pub fn ranks(&self) -> &[NodeId] {
        &self.ranks
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn family(&self) -> RankFamily {
        self.family
    }

    pub fn parameter(&self) -> f64 {
        self.parameter
    }
}

/// Draws a node from `dist`, or with probability `random_prob` a uniformly
/// random node from the same border.
pub fn sample_from_ranks(dist: &RankDistribution, random_prob: f64, rng: &mut dyn RngCore) -> NodeId {
    if random_prob > 0.0 && rng.random::<f64>() < random_prob {
        return dist.ranks[rng.random_range(0..dist.ranks.len())];
    }
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (node, p) in dist.ranks.iter().zip(&dist.probs) {
        acc += p;
        if u < acc {
            return *node;
        }
    }
    *dist.ranks.last().expect("non-empty")
}

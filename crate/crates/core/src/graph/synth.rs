//! Planted two-block (target / non-target) random graphs.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{HiddenGraph, IdMap, NodeId, SparseVec};
use crate::error::{HarvestError, Result};
use crate::rng::{seeded, RunRng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub n: usize,
    pub target_fraction: f64,
    pub p_in: f64,
    pub p_out: f64,
    pub attr_dim: usize,
    pub attr_flip: f64,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            n: 2000,
            target_fraction: 0.1,
            p_in: 0.02,
            p_out: 0.002,
            attr_dim: 10,
            attr_flip: 0.3,
            seed: 1,
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HarvestError::Validation(msg));
        if self.n < 2 {
            return bad(format!("n = {} must be at least 2", self.n));
        }
        if !(self.target_fraction > 0.0 && self.target_fraction < 1.0) {
            return bad(format!("target_fraction = {} not in (0, 1)", self.target_fraction));
        }
        if !(0.0 <= self.p_out && self.p_out <= self.p_in && self.p_in <= 1.0) {
            return bad(format!(
                "need 0 <= p_out <= p_in <= 1, got p_in = {}, p_out = {}",
                self.p_in, self.p_out
            ));
        }
        if !(0.0..=1.0).contains(&self.attr_flip) {
            return bad(format!("attr_flip = {} not in [0, 1]", self.attr_flip));
        }
        Ok(())
    }

    pub fn target_count(&self) -> usize {
        ((self.n as f64 * self.target_fraction).round() as usize).clamp(1, self.n - 1)
    }

    /// Noise-free attribute vector for a block: targets carry the even
    /// coordinates, non-targets the odd ones.
    pub fn prototype(&self, target: bool) -> Vec<f64> {
        (0..self.attr_dim)
            .map(|j| if (j % 2 == 0) == target { 1.0 } else { 0.0 })
            .collect()
    }
}

/// Draws each of `rows` rows' slots independently with probability `p`,
/// skipping geometrically distributed gaps. Calls `emit(row, slot)`.
fn bernoulli_slots(
    rng: &mut RunRng,
    p: f64,
    rows: impl Iterator<Item = (usize, usize)>,
    mut emit: impl FnMut(usize, usize),
) {
    if p <= 0.0 {
        return;
    }
    let log_q = (-p).ln_1p();
    let skip = |rng: &mut RunRng| -> u64 {
        if p >= 1.0 {
            0
        } else {
            let u: f64 = 1.0 - rng.random::<f64>(); // (0, 1]
            (u.ln() / log_q).floor() as u64
        }
    };
    let mut next = skip(rng);
    for (row, len) in rows {
        let len = len as u64;
        while next < len {
            emit(row, next as usize);
            next += 1 + skip(rng);
        }
        next -= len;
    }
}

/// Planted-partition generator. Target/target and non-target/non-target
/// pairs connect with `p_in`, cross pairs with `p_out`. Node names are
/// `"0"..` and the output is a pure function of the parameters.
pub fn synth_generate(params: &SynthParams) -> Result<HiddenGraph> {
    params.validate()?;
    let n = params.n;
    let k = params.target_count();
    let mut rng = seeded(params.seed);

    // block position -> node id; positions 0..k are targets
    let mut order: Vec<NodeId> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut labels = vec![false; n];
    for &v in &order[..k] {
        labels[v] = true;
    }

    let mut edges = Vec::new();
    bernoulli_slots(&mut rng, params.p_in, (0..k).map(|i| (i, k - 1 - i)), |i, s| {
        edges.push((order[i], order[i + 1 + s]))
    });
    bernoulli_slots(&mut rng, params.p_out, (0..k).map(|i| (i, n - k)), |i, s| {
        edges.push((order[i], order[k + s]))
    });
    bernoulli_slots(&mut rng, params.p_in, (k..n).map(|i| (i, n - 1 - i)), |i, s| {
        edges.push((order[i], order[i + 1 + s]))
    });

    let target_proto = params.prototype(true);
    let other_proto = params.prototype(false);
    let attributes = labels
        .iter()
        .map(|&y| {
            let proto = if y { &target_proto } else { &other_proto };
            let bits: Vec<f64> = proto
                .iter()
                .map(|&b| {
                    if params.attr_flip > 0.0 && rng.random::<f64>() < params.attr_flip {
                        1.0 - b
                    } else {
                        b
                    }
                })
                .collect();
            SparseVec::from_dense(&bits)
        })
        .collect();

    let (graph, report) =
        HiddenGraph::from_parts(IdMap::sequential(n), edges, labels, attributes, params.attr_dim)?;
    debug_assert_eq!(report.duplicates + report.self_loops, 0);
    Ok(graph)
}

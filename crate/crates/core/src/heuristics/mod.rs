//! Non-learning scorers.

mod active_search;
mod snucb1;

pub use active_search::{as_propagate, ActiveSearch, Propagation, PropagationConfig};
pub use snucb1::{ClassStats, EquivClassState};

use crate::error::{HarvestError, Result};
use crate::graph::{NodeId, ObservedState};

/// Number of queried target neighbors of a border node.
pub fn mod_score(state: &ObservedState, node: NodeId) -> Result<usize> {
    if node >= state.node_count() || !state.is_border(node) {
        return Err(HarvestError::Contract(format!("MOD score requested for non-border node {node}")));
    }
    Ok(state.target_neighbor_count(node))
}

/// MOD scores for the whole border, in border order.
pub fn mod_scores(state: &ObservedState) -> Vec<f64> {
    state
        .border()
        .iter()
        .map(|&b| state.target_neighbor_count(b) as f64)
        .collect()
}

//! Shared fixtures for the benchmarks.

use std::sync::Arc;

use harvest_core::graph::{init_state, synth_generate};
use harvest_core::{HiddenGraph, ObservedState, SynthParams};

pub fn graph(n: usize) -> Arc<HiddenGraph> {
    Arc::new(
        synth_generate(&SynthParams {
            n,
            target_fraction: 0.1,
            p_in: 40.0 / n as f64,
            p_out: 4.0 / n as f64,
            attr_dim: 10,
            attr_flip: 0.3,
            seed: 1,
        })
        .expect("valid synthetic parameters"),
    )
}

/// A state after `queries` greedy-by-border-order queries from the first target.
pub fn grown_state(g: Arc<HiddenGraph>, queries: usize) -> ObservedState {
    let seed = g.targets().next().expect("graph has a target");
    let mut s = init_state(g, &[seed]).expect("valid seed");
    for _ in 0..queries {
        let Some(&v) = s.border().first() else { break };
        s.query(v).expect("border node");
    }
    s
}

//! Record/replay studies that separate border diversity from training
//! diversity.
//!
//! A replay walks the observed graphs of one run (`graph_trace`) while a
//! scorer is trained on the observations of another run (`obs_trace`). At
//! each step the scorer picks a node from the forced border; the pick's
//! label is its payoff, but the graph keeps following `graph_trace`.
//! Feeding a run both of its own traces reproduces that run.
//!
//! Picks do not leave the border, so a scorer may pick the same node on
//! several steps and `cum_targets` counts each such payoff.
//! [`RunTrace::distinct_targets`] gives the count over distinct picks.

use std::sync::Arc;

use crate::error::{HarvestError, Result};
use crate::features::FeatureExtractor;
use crate::graph::{init_state, HiddenGraph};
use crate::rng::{stream, Stream};

use super::config::{ModelKind, RunConfig, Strategy};
use super::run::{learner_seed, Picker, COLD_START_ARM};
use super::trace::{RunTrace, StepRecord, TraceHeader};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReplayMode {
    /// Observations from the scorer's own run, graphs from another run.
    Border,
    /// Graphs from the scorer's own run, observations from another run.
    Training,
}

impl std::str::FromStr for ReplayMode {
    type Err = HarvestError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "border" => Ok(ReplayMode::Border),
            "training" => Ok(ReplayMode::Training),
            _ => Err(HarvestError::Validation(format!("unknown replay mode '{s}'"))),
        }
    }
}

fn standalone_model(trace: &RunTrace) -> Result<ModelKind> {
    match trace.header.strategy.parse::<Strategy>()? {
        Strategy::Standalone(m) => Ok(m),
        other => Err(HarvestError::Validation(format!(
            "the scorer's trace must come from a standalone run, found strategy {other}"
        ))),
    }
}

fn check_pair(obs: &RunTrace, graph: &RunTrace, hidden: &HiddenGraph) -> Result<()> {
    let fp = hidden.fingerprint();
    for (name, t) in [("observation", obs), ("graph", graph)] {
        if t.header.graph != fp {
            return Err(HarvestError::Validation(format!(
                "{name} trace was recorded on graph {} but the loaded graph is {fp}",
                t.header.graph
            )));
        }
    }
    if obs.header.seeds != graph.header.seeds {
        return Err(HarvestError::Validation(format!(
            "traces start from different seeds: {:?} vs {:?}",
            obs.header.seeds, graph.header.seeds
        )));
    }
    if obs.steps.len() != graph.steps.len() {
        return Err(HarvestError::Validation(format!(
            "traces differ in length: {} vs {}",
            obs.steps.len(),
            graph.steps.len()
        )));
    }
    if obs.header.cold_start != graph.header.cold_start {
        return Err(HarvestError::Validation("traces use different cold-start lengths".into()));
    }
    Ok(())
}

fn replay(
    cfg: &RunConfig,
    model: ModelKind,
    obs_trace: &RunTrace,
    graph_trace: &RunTrace,
    hidden: Arc<HiddenGraph>,
    mode: ReplayMode,
) -> Result<RunTrace> {
    check_pair(obs_trace, graph_trace, &hidden)?;
    let seeds = graph_trace.seed_ids(&hidden)?;
    let queries = graph_trace.query_ids(&hidden)?;
    let observations = obs_trace.observations();
    let run_seed = graph_trace.header.run_seed;
    let cold_steps = graph_trace.header.cold_start;
    let attr_dim = hidden.attr_dim();

    let mut state = init_state(hidden.clone(), &seeds)?;
    let mut fx = FeatureExtractor::new();
    let mut selection = stream(run_seed, Stream::Selection);
    let mut cold = cfg.cold_start.build(&cfg.learners, attr_dim, 0)?;
    let mut arm = model.build(&cfg.learners, attr_dim, learner_seed(run_seed, 0))?;
    let picker = Picker {
        sampler: cfg.sampler,
        budget: graph_trace.header.budget,
    };

    let mut found = 0;
    let mut steps = Vec::with_capacity(queries.len());
    for (i, &forced) in queries.iter().enumerate() {
        let t = i + 1;
        let candidates = state.border().to_vec();
        let mut flags = Vec::new();
        let (label, pick) = if t <= cold_steps {
            let scores = cold.score(&state, &candidates, &mut fx)?;
            let p = Picker::argmax().pick(&candidates, &scores, t, &mut selection, &mut flags)?;
            (COLD_START_ARM.to_string(), p)
        } else {
            let scores = arm.score(&state, &candidates, &mut fx)?;
            let p = picker.pick(&candidates, &scores, t, &mut selection, &mut flags)?;
            (model.label().to_string(), p)
        };
        let features = fx.extract(&state, pick)?.to_vec();
        let y = hidden.label(pick);
        found += y as usize;
        arm.observe(&observations[i])?;
        flags.extend(arm.take_flags());
        flags.extend(cold.take_flags());
        steps.push(StepRecord {
            t,
            arm: label,
            node: hidden.ids().name(pick).to_string(),
            label: y,
            cum_targets: found,
            border_size: candidates.len(),
            features,
            flags,
        });
        state.query(forced)?;
    }

    let mode_name = match mode {
        ReplayMode::Border => "replay-border",
        ReplayMode::Training => "replay-training",
    };
    let mut arms = Vec::new();
    if cold_steps > 0 {
        arms.push(COLD_START_ARM.to_string());
    }
    arms.push(model.label().to_string());
    Ok(RunTrace {
        header: TraceHeader {
            run: graph_trace.header.run,
            run_seed,
            config_hash: cfg.hash(),
            graph: hidden.fingerprint(),
            seeds: graph_trace.header.seeds.clone(),
            strategy: format!("{mode_name}:{model}"),
            arms,
            budget: graph_trace.header.budget,
            cold_start: cold_steps,
        },
        steps,
        status: graph_trace.status.clone(),
    })
}

/// Scorer trained on its own observations (`obs_trace`, a standalone run)
/// but walking another run's observed graphs (`graph_trace`).
pub fn replay_border_hypothesis(
    cfg: &RunConfig,
    obs_trace: &RunTrace,
    graph_trace: &RunTrace,
    hidden: Arc<HiddenGraph>,
) -> Result<RunTrace> {
    let model = standalone_model(obs_trace)?;
    replay(cfg, model, obs_trace, graph_trace, hidden, ReplayMode::Border)
}

/// Scorer walking its own observed graphs (`graph_trace`, a standalone run)
/// but trained on another run's observations (`obs_trace`).
pub fn replay_training_hypothesis(
    cfg: &RunConfig,
    graph_trace: &RunTrace,
    obs_trace: &RunTrace,
    hidden: Arc<HiddenGraph>,
) -> Result<RunTrace> {
    let model = standalone_model(graph_trace)?;
    replay(cfg, model, obs_trace, graph_trace, hidden, ReplayMode::Training)
}

/// Whether a replay trace picked exactly the nodes the source run queried.
pub fn same_query_sequence(a: &RunTrace, b: &RunTrace) -> bool {
    a.steps.len() == b.steps.len() && a.steps.iter().zip(&b.steps).all(|(x, y)| x.node == y.node)
}

//! A single selective-harvesting run.

use std::sync::Arc;

use rand::seq::index::sample;
use rand::Rng;
use thiserror::Error;

use crate::bandit::{sample_from_ranks, solve_mass_parameter, BanditPolicy, RankDistribution};
use crate::error::{HarvestError, Result};
use crate::features::FeatureExtractor;
use crate::graph::{init_state, HiddenGraph, NodeId, ObservedState};
use crate::heuristics::EquivClassState;
use crate::learners::{rank_border, Observation};
use crate::rng::{derive_seed, stream, RunRng, Stream};

use super::arms::Arm;
use super::config::{RunConfig, SamplerConfig, SamplerKind, SeedRule, Strategy};
use super::trace::{RunStatus, RunTrace, StepRecord, TraceHeader};

pub const COLD_START_ARM: &str = "cold-start";
pub const SNUCB1_ARM: &str = "SN-UCB1";

/// A run that stopped on an error. `prefix` holds the steps completed
/// before the failure, when the run got that far.
#[derive(Debug, Error)]
#[error("run failed: {error}")]
pub struct RunFailure {
    pub error: HarvestError,
    pub prefix: Option<RunTrace>,
}

impl From<HarvestError> for RunFailure {
    fn from(error: HarvestError) -> Self {
        RunFailure { error, prefix: None }
    }
}

/// Seed for the randomized learner registered at `arm_index`.
pub fn learner_seed(run_seed: u64, arm_index: usize) -> u64 {
    derive_seed(derive_seed(run_seed, Stream::Learner as u64), arm_index as u64)
}

pub fn resolve_seeds(cfg: &RunConfig, hidden: &HiddenGraph, run_seed: u64) -> Result<Vec<NodeId>> {
    match &cfg.seed_rule {
        SeedRule::Explicit(names) => names
            .iter()
            .map(|n| {
                hidden
                    .ids()
                    .get(n)
                    .ok_or_else(|| HarvestError::Validation(format!("seed '{n}' is not a node of the graph")))
            })
            .collect(),
        SeedRule::UniformTarget { count } => {
            let targets: Vec<NodeId> = hidden.targets().collect();
            if targets.len() < *count {
                return Err(HarvestError::Validation(format!(
                    "{count} seed(s) requested but the graph has {} target(s)",
                    targets.len()
                )));
            }
            let mut rng = stream(run_seed, Stream::Seeds);
            Ok(sample(&mut rng, targets.len(), *count)
                .into_iter()
                .map(|i| targets[i])
                .collect())
        }
    }
}

/// Turns arm scores into a query.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Picker {
    pub sampler: SamplerConfig,
    pub budget: usize,
}

impl Picker {
    pub fn argmax() -> Self {
        Picker {
            sampler: SamplerConfig::default(),
            budget: 1,
        }
    }

    pub fn pick(
        &self,
        nodes: &[NodeId],
        scores: &[f64],
        t: usize,
        rng: &mut RunRng,
        flags: &mut Vec<String>,
    ) -> Result<NodeId> {
        let p = self.sampler.random_query_prob;
        match self.sampler.kind {
            SamplerKind::Argmax => {
                if p > 0.0 && !nodes.is_empty() && rng.random::<f64>() < p {
                    return Ok(nodes[rng.random_range(0..nodes.len())]);
                }
                rank_border(nodes, scores, rng)
            }
            SamplerKind::Ranked { family, top, mass } => {
                let n = nodes.len();
                if n <= 1 {
                    return nodes.first().copied().ok_or(HarvestError::ExhaustedBorder);
                }
                let k = top.top_k(n, t, self.budget).min(n - 1);
                let parameter = match solve_mass_parameter(n, k, mass, family) {
                    Ok(sol) => {
                        if sol.degenerate {
                            flags.push(format!("sampler: uniform limit at n={n}, k={k}"));
                        }
                        sol.parameter
                    }
                    Err(HarvestError::Infeasible { lo, .. }) => {
                        flags.push(format!("sampler: mass {mass} infeasible at n={n}, k={k}; clamped"));
                        let (a, b) = family.bounds();
                        if mass < lo {
                            a
                        } else {
                            b
                        }
                    }
                    Err(e) => return Err(e),
                };
                let dist = RankDistribution::from_scores(nodes, scores, family, parameter)?;
                Ok(sample_from_ranks(&dist, p, rng))
            }
        }
    }
}

struct Runner<'a> {
    cfg: &'a RunConfig,
    budget: usize,
    state: ObservedState,
    fx: FeatureExtractor,
    cold: Arm,
    arms: Vec<Arm>,
    arm_labels: Vec<String>,
    policy: Option<Box<dyn BanditPolicy>>,
    classes: Option<EquivClassState>,
    selection: RunRng,
    policy_rng: RunRng,
    picker: Picker,
    trace: RunTrace,
}

impl<'a> Runner<'a> {
    fn new(cfg: &'a RunConfig, hidden: Arc<HiddenGraph>, run_seed: u64) -> Result<Self> {
        cfg.validate()?;
        let budget = cfg.resolve_budget(&hidden)?;
        let seeds = resolve_seeds(cfg, &hidden, run_seed)?;
        let attr_dim = hidden.attr_dim();
        let models = cfg.arm_models();
        let arms = models
            .iter()
            .enumerate()
            .map(|(i, m)| m.build(&cfg.learners, attr_dim, learner_seed(run_seed, i)))
            .collect::<Result<Vec<_>>>()?;
        let mut arm_labels: Vec<String> = models.iter().map(|m| m.label().to_string()).collect();
        let classes = (cfg.strategy == Strategy::SnUcb1).then(EquivClassState::new);
        if classes.is_some() {
            arm_labels.push(SNUCB1_ARM.to_string());
        }
        let policy = match cfg.policy_kind() {
            Some(kind) => Some(kind.build(arms.len())?),
            None => None,
        };
        let mut header_arms = Vec::new();
        if cfg.cold_start_steps > 0 {
            header_arms.push(COLD_START_ARM.to_string());
        }
        header_arms.extend(arm_labels.iter().cloned());
        let header = TraceHeader {
            run: 0,
            run_seed,
            config_hash: cfg.hash(),
            graph: hidden.fingerprint(),
            seeds: seeds.iter().map(|&s| hidden.ids().name(s).to_string()).collect(),
            strategy: cfg.strategy.to_string(),
            arms: header_arms,
            budget,
            cold_start: cfg.cold_start_steps,
        };
        Ok(Runner {
            cfg,
            budget,
            state: init_state(hidden, &seeds)?,
            fx: FeatureExtractor::new(),
            cold: cfg.cold_start.build(&cfg.learners, attr_dim, 0)?,
            arms,
            arm_labels,
            policy,
            classes,
            selection: stream(run_seed, Stream::Selection),
            policy_rng: stream(run_seed, Stream::Policy),
            picker: Picker {
                sampler: cfg.sampler,
                budget,
            },
            trace: RunTrace {
                header,
                steps: Vec::new(),
                status: RunStatus::BudgetReached,
            },
        })
    }

    fn step(&mut self, t: usize) -> Result<()> {
        let border = self.state.border().to_vec();
        let mut flags = Vec::new();
        let mut pulled = None;
        let (arm, node) = if t <= self.cfg.cold_start_steps {
            let scores = self.cold.score(&self.state, &border, &mut self.fx)?;
            let node = Picker::argmax().pick(&border, &scores, t, &mut self.selection, &mut flags)?;
            (COLD_START_ARM.to_string(), node)
        } else if let Some(classes) = &mut self.classes {
            (SNUCB1_ARM.to_string(), classes.select(&self.state, &mut self.selection)?)
        } else {
            let k = match &mut self.policy {
                Some(p) => p.select(&mut self.policy_rng),
                None => 0,
            };
            pulled = Some(k);
            let scores = self.arms[k].score(&self.state, &border, &mut self.fx)?;
            let node = self.picker.pick(&border, &scores, t, &mut self.selection, &mut flags)?;
            (self.arm_labels[k].clone(), node)
        };

        let features = self.fx.extract(&self.state, node)?.to_vec();
        let label = self.state.query(node)?.label;
        let payoff = if label { 1.0 } else { 0.0 };
        if let (Some(policy), Some(k)) = (&mut self.policy, pulled) {
            policy.update(k, payoff)?;
        }
        if t > self.cfg.cold_start_steps {
            if let Some(classes) = &mut self.classes {
                classes.update(payoff)?;
            }
        }
        let obs = Observation {
            features: features.clone(),
            label,
        };
        for a in &mut self.arms {
            a.observe(&obs)?;
            flags.extend(a.take_flags());
        }
        flags.extend(self.cold.take_flags());

        let cum_targets = self.trace.steps.last().map_or(0, |s| s.cum_targets) + label as usize;
        self.trace.steps.push(StepRecord {
            t,
            arm,
            node: self.state.hidden().ids().name(node).to_string(),
            label,
            cum_targets,
            border_size: border.len(),
            features,
            flags,
        });
        Ok(())
    }

    fn execute(mut self) -> std::result::Result<RunTrace, RunFailure> {
        for t in 1..=self.budget {
            if self.state.border().is_empty() {
                self.trace.status = RunStatus::BorderExhausted;
                break;
            }
            if let Err(error) = self.step(t) {
                log::error!("run {} aborted at step {t}: {error}", self.trace.header.run_seed);
                self.trace.status = RunStatus::Aborted {
                    reason: error.to_string(),
                };
                return Err(RunFailure {
                    error,
                    prefix: Some(self.trace),
                });
            }
        }
        Ok(self.trace)
    }
}

/// Runs one search to the budget or until the border empties.
pub fn run_harvest(
    cfg: &RunConfig,
    hidden: Arc<HiddenGraph>,
    run_seed: u64,
) -> std::result::Result<RunTrace, RunFailure> {
    Runner::new(cfg, hidden, run_seed)?.execute()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{synth_generate, SynthParams};
    use crate::harness::config::ModelKind;

    fn small_graph() -> Arc<HiddenGraph> {
        Arc::new(
            synth_generate(&SynthParams {
                n: 300,
                target_fraction: 0.2,
                p_in: 0.05,
                p_out: 0.01,
                attr_dim: 4,
                attr_flip: 0.2,
                seed: 3,
            })
            .unwrap(),
        )
    }

    fn quick(strategy: Strategy) -> RunConfig {
        let mut cfg = RunConfig {
            strategy,
            budget: Some(40),
            cold_start_steps: 10,
            ..RunConfig::default()
        };
        cfg.learners.forest.n_trees = 10;
        cfg
    }

    #[test]
    fn every_strategy_completes() {
        let g = small_graph();
        for s in ["d3ts", "round_robin", "ts", "ucb1", "eps_greedy", "exp3", "snucb1", "standalone:ewls"] {
            let cfg = quick(s.parse().unwrap());
            let trace = run_harvest(&cfg, g.clone(), 9).unwrap();
            assert_eq!(trace.steps.len(), 40, "{s}");
            assert_eq!(trace.status, RunStatus::BudgetReached);
            assert!(trace.steps[..10].iter().all(|r| r.arm == COLD_START_ARM));
            let mut prev = 0;
            for r in &trace.steps {
                assert!(r.cum_targets >= prev);
                prev = r.cum_targets;
            }
        }
    }

    #[test]
    fn all_cold_start_equals_pure_mod() {
        let g = small_graph();
        let mut a = quick(Strategy::D3ts);
        a.cold_start_steps = 40;
        let mut b = quick(Strategy::Standalone(ModelKind::Mod));
        b.cold_start_steps = 0;
        let ta = run_harvest(&a, g.clone(), 5).unwrap();
        let tb = run_harvest(&b, g, 5).unwrap();
        let nodes = |t: &RunTrace| t.steps.iter().map(|s| s.node.clone()).collect::<Vec<_>>();
        assert_eq!(nodes(&ta), nodes(&tb));
    }

    #[test]
    fn border_exhaustion_is_recorded() {
        use crate::graph::fixtures::graph;
        let g = Arc::new(graph(4, &[(0, 1), (1, 2)], &[0]));
        let cfg = RunConfig {
            budget: Some(5),
            cold_start_steps: 0,
            strategy: Strategy::Standalone(ModelKind::Mod),
            ..RunConfig::default()
        };
        let t = run_harvest(&cfg, g, 1).unwrap();
        assert_eq!(t.steps.len(), 2);
        assert_eq!(t.status, RunStatus::BorderExhausted);
        assert_eq!(t.curve(5), vec![0, 0, 0, 0, 0]);
    }

    #[test]
    fn bad_seed_reports_failure() {
        let cfg = RunConfig {
            seed_rule: SeedRule::Explicit(vec!["nope".into()]),
            ..quick(Strategy::D3ts)
        };
        let err = run_harvest(&cfg, small_graph(), 1).unwrap_err();
        assert!(matches!(err.error, HarvestError::Validation(_)));
        assert!(err.prefix.is_none());
    }
}

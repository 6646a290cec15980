//! Multi-run experiments and their aggregates.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{HarvestError, Result};
use crate::graph::HiddenGraph;
use crate::rng::run_seed;

use super::config::RunConfig;
use super::run::run_harvest;
use super::trace::RunTrace;

/// z-value of a two-sided 95% normal interval.
pub const Z95: f64 = 1.959963984540054;

/// Mean and 95% normal-approximation interval (sample standard deviation).
/// A single value gives a zero-width interval.
pub fn mean_ci(values: &[f64]) -> (f64, f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, mean, mean);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let half = Z95 * (var / n).sqrt();
    (mean, mean - half, mean + half)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub t: usize,
    pub mean: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmRow {
    pub run: usize,
    pub t: usize,
    pub arm: String,
    /// Targets found by this arm's queries over queries it issued so far;
    /// 0 before its first query.
    pub hit_ratio: f64,
    /// 1 if the arm issued query `t`, else 0; averaged over runs this is
    /// the fraction of runs using the arm at `t`.
    pub usage: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunError {
    pub run: usize,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub config_hash: String,
    pub budget: usize,
    pub arms: Vec<String>,
    /// Completed runs in run-index order.
    pub traces: Vec<RunTrace>,
    pub failures: Vec<RunError>,
    pub summary: Vec<SummaryRow>,
}

impl ExperimentResult {
    pub fn from_traces(config_hash: String, budget: usize, traces: Vec<RunTrace>, failures: Vec<RunError>) -> Self {
        let arms = traces.first().map(|t| t.header.arms.clone()).unwrap_or_default();
        let summary = summarize(&traces, budget);
        ExperimentResult {
            config_hash,
            budget,
            arms,
            traces,
            failures,
            summary,
        }
    }

    /// Cumulative targets at the budget, one per completed run.
    pub fn finals(&self) -> Vec<f64> {
        self.traces
            .iter()
            .map(|t| *t.curve(self.budget).last().unwrap_or(&0) as f64)
            .collect()
    }

    pub fn arm_rows(&self) -> Vec<ArmRow> {
        arm_rows(&self.traces, &self.arms, self.budget)
    }
}

/// Per-step mean and CI of cumulative targets over runs; exhausted runs are
/// padded with their last value.
pub fn summarize(traces: &[RunTrace], budget: usize) -> Vec<SummaryRow> {
    if traces.is_empty() {
        return Vec::new();
    }
    let curves: Vec<Vec<usize>> = traces.iter().map(|t| t.curve(budget)).collect();
    (0..budget)
        .map(|i| {
            let col: Vec<f64> = curves.iter().map(|c| c[i] as f64).collect();
            let (mean, ci_lo, ci_hi) = mean_ci(&col);
            SummaryRow {
                t: i + 1,
                mean,
                ci_lo,
                ci_hi,
            }
        })
        .collect()
}

/// Hit ratio and usage of each arm for each run and step. Steps past an
/// early exhaustion repeat the final ratios with zero usage.
pub fn arm_rows(traces: &[RunTrace], arms: &[String], budget: usize) -> Vec<ArmRow> {
    let mut rows = Vec::with_capacity(traces.len() * budget * arms.len());
    for trace in traces {
        let mut queries: BTreeMap<&str, (usize, usize)> = arms.iter().map(|a| (a.as_str(), (0, 0))).collect();
        for t in 1..=budget {
            let step = trace.steps.get(t - 1);
            if let Some(s) = step {
                let e = queries.entry(s.arm.as_str()).or_insert((0, 0));
                e.0 += 1;
                e.1 += s.label as usize;
            }
            for a in arms {
                let (q, hits) = queries.get(a.as_str()).copied().unwrap_or((0, 0));
                rows.push(ArmRow {
                    run: trace.header.run,
                    t,
                    arm: a.clone(),
                    hit_ratio: if q == 0 { 0.0 } else { hits as f64 / q as f64 },
                    usage: step.is_some_and(|s| &s.arm == a) as u8,
                });
            }
        }
    }
    rows
}

/// Runs `n_runs` searches with seeds derived from `(master_seed, run)` on a
/// pool of `threads` workers. Results do not depend on `threads`.
pub fn run_experiment(
    cfg: &RunConfig,
    hidden: Arc<HiddenGraph>,
    n_runs: usize,
    threads: usize,
) -> Result<ExperimentResult> {
    if n_runs == 0 {
        return Err(HarvestError::Validation("n_runs must be >= 1".into()));
    }
    cfg.validate()?;
    let budget = cfg.resolve_budget(&hidden)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| HarvestError::Validation(format!("thread pool: {e}")))?;
    let outcomes: Vec<_> = pool.install(|| {
        (0..n_runs)
            .into_par_iter()
            .map(|run| {
                let mut out = run_harvest(cfg, hidden.clone(), run_seed(cfg.master_seed, run));
                if let Ok(t) = &mut out {
                    t.header.run = run;
                }
                (run, out)
            })
            .collect()
    });
    let mut traces = Vec::new();
    let mut failures = Vec::new();
    for (run, out) in outcomes {
        match out {
            Ok(t) => traces.push(t),
            Err(f) => {
                log::warn!("run {run} failed: {}", f.error);
                failures.push(RunError {
                    run,
                    message: f.error.to_string(),
                });
            }
        }
    }
    if !failures.is_empty() {
        log::warn!(
            "{} of {n_runs} runs failed; aggregates cover {} completed runs",
            failures.len(),
            traces.len()
        );
    }
    Ok(ExperimentResult::from_traces(cfg.hash(), budget, traces, failures))
}

//! Orchestration: single runs, multi-run experiments, replay studies,
//! regret tables and file outputs.

mod arms;
mod config;
mod csv_out;
mod experiment;
mod regret;
mod replay;
mod run;
mod trace;

pub use arms::Arm;
pub use config::{
    parse_config_text, DatasetSpec, LearnerParams, ModelKind, RunConfig, SamplerConfig, SamplerKind, SeedRule,
    Strategy,
};
pub use csv_out::{curve_rows, emit_csv, read_arms, read_curves, read_summary, CurveRow};
pub use experiment::{arm_rows, mean_ci, run_experiment, summarize, ArmRow, ExperimentResult, RunError, SummaryRow, Z95};
pub use regret::{read_results_dir, regret_report, regret_table, RegretReport};
pub use replay::{replay_border_hypothesis, replay_training_hypothesis, same_query_sequence, ReplayMode};
pub use run::{learner_seed, resolve_seeds, run_harvest, RunFailure, COLD_START_ARM, SNUCB1_ARM};
pub use trace::{RunStatus, RunTrace, StepRecord, TraceHeader};

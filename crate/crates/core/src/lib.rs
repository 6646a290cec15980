//! Selective harvesting over partially observed networks.
//!
//! A searcher starts from seed nodes and repeatedly queries one node of
//! the border set (unqueried neighbors of queried nodes), learning its
//! label, attributes and edges. The goal is to find as many target nodes
//! as possible within a query budget.
//!
//! * [`graph`]: hidden network, loaders, synthetic generator and the query oracle
//! * [`features`]: per-border-node features over the observed graph
//! * [`learners`]: EWLS, logistic regression, random forest, ListNet
//! * [`heuristics`]: MOD, observed-graph active search, SN-UCB1
//! * [`bandit`]: arm-selection policies (including dynamic Thompson sampling)
//!   and rank-based samplers
//! * [`harness`]: run loop, multi-run experiments, replays, regret, CSV output

pub mod bandit;
pub mod error;
pub mod features;
pub mod graph;
pub mod harness;
pub mod heuristics;
pub mod learners;
pub mod linalg;
pub mod rng;

pub use error::{HarvestError, Result};
pub use features::{FeatureMatrix, FeatureVector};
pub use graph::{HiddenGraph, NodeId, ObservedState, QueryResult, SynthParams};
pub use learners::{Observation, Scorer};

//! Run configuration and its flat `key = value` text form.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bandit::{PolicyKind, RankFamily, TopSchedule};
use crate::error::{HarvestError, Result};
use crate::graph::{load_graph, synth_generate, HiddenGraph, SynthParams};
use crate::heuristics::PropagationConfig;
use crate::learners::{ForestParams, ListNetParams};

/// Model that can serve as an arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    Mod,
    ActiveSearch,
    LogReg,
    RandomForest,
    ListNet,
    Ewls,
}

impl ModelKind {
    pub const ALL: [ModelKind; 6] = [
        ModelKind::Mod,
        ModelKind::ActiveSearch,
        ModelKind::LogReg,
        ModelKind::RandomForest,
        ModelKind::ListNet,
        ModelKind::Ewls,
    ];

    /// Name used in traces and CSV files.
    pub fn label(self) -> &'static str {
        match self {
            ModelKind::Mod => "MOD",
            ModelKind::ActiveSearch => "AS",
            ModelKind::LogReg => "LogReg",
            ModelKind::RandomForest => "RF",
            ModelKind::ListNet => "ListNet",
            ModelKind::Ewls => "EWLS",
        }
    }

    /// Name used in config files.
    pub fn key(self) -> &'static str {
        match self {
            ModelKind::Mod => "mod",
            ModelKind::ActiveSearch => "active_search",
            ModelKind::LogReg => "logreg",
            ModelKind::RandomForest => "rf",
            ModelKind::ListNet => "listnet",
            ModelKind::Ewls => "ewls",
        }
    }

    pub fn is_heuristic(self) -> bool {
        matches!(self, ModelKind::Mod | ModelKind::ActiveSearch)
    }
}

impl FromStr for ModelKind {
    type Err = HarvestError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        Ok(match s.as_str() {
            "mod" => ModelKind::Mod,
            "as" | "active_search" | "activesearch" => ModelKind::ActiveSearch,
            "logreg" | "lr" => ModelKind::LogReg,
            "rf" | "random_forest" | "randomforest" => ModelKind::RandomForest,
            "listnet" => ModelKind::ListNet,
            "ewls" => ModelKind::Ewls,
            _ => return Err(HarvestError::Validation(format!("unknown model '{s}'"))),
        })
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Strategy {
    Standalone(ModelKind),
    RoundRobin,
    D3ts,
    Ts,
    Ucb1,
    EpsGreedy,
    Exp3,
    SnUcb1,
}

impl FromStr for Strategy {
    type Err = HarvestError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        if let Some(model) = s.strip_prefix("standalone:") {
            if model == "snucb1" || model == "sn-ucb1" {
                return Ok(Strategy::SnUcb1);
            }
            return Ok(Strategy::Standalone(model.parse()?));
        }
        Ok(match s.as_str() {
            "round_robin" | "rr" => Strategy::RoundRobin,
            "d3ts" | "dts" => Strategy::D3ts,
            "ts" => Strategy::Ts,
            "ucb1" => Strategy::Ucb1,
            "eps_greedy" | "epsilon_greedy" => Strategy::EpsGreedy,
            "exp3" => Strategy::Exp3,
            "snucb1" | "sn-ucb1" => Strategy::SnUcb1,
            _ => return Err(HarvestError::Validation(format!("unknown strategy '{s}'"))),
        })
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Standalone(m) => write!(f, "standalone:{m}"),
            Strategy::RoundRobin => f.write_str("round_robin"),
            Strategy::D3ts => f.write_str("d3ts"),
            Strategy::Ts => f.write_str("ts"),
            Strategy::Ucb1 => f.write_str("ucb1"),
            Strategy::EpsGreedy => f.write_str("eps_greedy"),
            Strategy::Exp3 => f.write_str("exp3"),
            Strategy::SnUcb1 => f.write_str("snucb1"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SeedRule {
    /// Node ids as named in the input files.
    Explicit(Vec<String>),
    /// `count` distinct targets drawn uniformly.
    UniformTarget { count: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SamplerKind {
    Argmax,
    Ranked {
        family: RankFamily,
        top: TopSchedule,
        mass: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub kind: SamplerKind,
    /// Probability of querying a uniformly random border node instead.
    pub random_query_prob: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            kind: SamplerKind::Argmax,
            random_query_prob: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerParams {
    pub ewls_beta: f64,
    pub ewls_lambda: f64,
    pub logreg_lambda: f64,
    pub forest: ForestParams,
    pub listnet: ListNetParams,
    pub propagation: PropagationConfig,
    /// Batch learners refit after this many new observations.
    pub refit_every: usize,
}

impl Default for LearnerParams {
    fn default() -> Self {
        LearnerParams {
            ewls_beta: 0.99,
            ewls_lambda: 1.0,
            logreg_lambda: 1.0,
            forest: ForestParams::default(),
            listnet: ListNetParams::default(),
            propagation: PropagationConfig::default(),
            refit_every: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DatasetSpec {
    Files {
        edges: PathBuf,
        labels: PathBuf,
        attributes: Option<PathBuf>,
    },
    Synth(SynthParams),
}

impl DatasetSpec {
    pub fn load(&self) -> Result<HiddenGraph> {
        match self {
            DatasetSpec::Files {
                edges,
                labels,
                attributes,
            } => Ok(load_graph(edges, labels, attributes.as_deref())?.0),
            DatasetSpec::Synth(p) => synth_generate(p),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub dataset: DatasetSpec,
    pub seed_rule: SeedRule,
    /// Queries per run; `None` means the number of targets in the graph.
    pub budget: Option<usize>,
    pub cold_start_steps: usize,
    pub cold_start: ModelKind,
    pub strategy: Strategy,
    /// Arm registration order for bandit strategies.
    pub models: Vec<ModelKind>,
    pub cap_c: f64,
    pub epsilon: f64,
    pub gamma: f64,
    pub learners: LearnerParams,
    pub sampler: SamplerConfig,
    pub master_seed: u64,
    pub runs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dataset: DatasetSpec::Synth(SynthParams::default()),
            seed_rule: SeedRule::UniformTarget { count: 1 },
            budget: None,
            cold_start_steps: 20,
            cold_start: ModelKind::Mod,
            strategy: Strategy::D3ts,
            models: vec![
                ModelKind::Mod,
                ModelKind::ActiveSearch,
                ModelKind::LogReg,
                ModelKind::RandomForest,
                ModelKind::ListNet,
            ],
            cap_c: 5.0,
            epsilon: 0.1,
            gamma: 0.1,
            learners: LearnerParams::default(),
            sampler: SamplerConfig::default(),
            master_seed: 0,
            runs: 1,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| HarvestError::Validation(format!("{key}: cannot parse '{value}'")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(HarvestError::Validation(format!("{key}: expected a boolean, got '{value}'"))),
    }
}

fn parse_top(value: &str) -> Result<TopSchedule> {
    let v = value.trim();
    if v.eq_ignore_ascii_case("decaying") {
        return Ok(TopSchedule::Decaying);
    }
    if let Some(pct) = v.strip_suffix('%') {
        let f: f64 = parse_num("sampler.top", pct)?;
        if !(f > 0.0 && f <= 100.0) {
            return Err(HarvestError::Validation(format!("sampler.top: {v} out of range")));
        }
        return Ok(TopSchedule::Fraction(f / 100.0));
    }
    Ok(TopSchedule::Count(parse_num("sampler.top", v)?))
}

/// Splits `key = value` text into pairs. `#` starts a comment.
pub fn parse_config_text(text: &str, origin: &Path) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| HarvestError::parse(origin, i + 1, "expected 'key = value'"))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(HarvestError::parse(origin, i + 1, "empty key"));
        }
        pairs.push((k.to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}

impl RunConfig {
    /// Reads a config file on top of the defaults.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = RunConfig::default();
        for (k, v) in parse_config_text(&text, path)? {
            cfg.set(&k, &v)?;
        }
        Ok(cfg)
    }

    /// Sets one key. Later calls override earlier ones.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "edges" | "labels" | "attrs" => self.set_path(key.trim(), PathBuf::from(v)),
            "synth.n" => self.synth_mut()?.n = parse_num(key, v)?,
            "synth.target_fraction" => self.synth_mut()?.target_fraction = parse_num(key, v)?,
            "synth.p_in" => self.synth_mut()?.p_in = parse_num(key, v)?,
            "synth.p_out" => self.synth_mut()?.p_out = parse_num(key, v)?,
            "synth.attr_dim" => self.synth_mut()?.attr_dim = parse_num(key, v)?,
            "synth.attr_flip" => self.synth_mut()?.attr_flip = parse_num(key, v)?,
            "synth.seed" => self.synth_mut()?.seed = parse_num(key, v)?,
            "seeds" => {
                let ids: Vec<String> = v
                    .split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect();
                self.seed_rule = SeedRule::Explicit(ids);
            }
            "seed_rule" => match v {
                "uniform" | "uniform_target" => {
                    if !matches!(self.seed_rule, SeedRule::UniformTarget { .. }) {
                        self.seed_rule = SeedRule::UniformTarget { count: 1 };
                    }
                }
                "explicit" => {
                    if !matches!(self.seed_rule, SeedRule::Explicit(_)) {
                        self.seed_rule = SeedRule::Explicit(Vec::new());
                    }
                }
                _ => return Err(HarvestError::Validation(format!("seed_rule: unknown rule '{v}'"))),
            },
            "seed_count" => self.seed_rule = SeedRule::UniformTarget { count: parse_num(key, v)? },
            "budget" => {
                self.budget = if v == "auto" { None } else { Some(parse_num(key, v)?) };
            }
            "cold_start_steps" => self.cold_start_steps = parse_num(key, v)?,
            "cold_start" => self.cold_start = v.parse()?,
            "strategy" => self.strategy = v.parse()?,
            "models" => {
                self.models = v
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(str::parse)
                    .collect::<Result<_>>()?;
            }
            "cap_c" => self.cap_c = parse_num(key, v)?,
            "epsilon" => self.epsilon = parse_num(key, v)?,
            "gamma" => self.gamma = parse_num(key, v)?,
            "ewls.beta" => self.learners.ewls_beta = parse_num(key, v)?,
            "ewls.lambda" => self.learners.ewls_lambda = parse_num(key, v)?,
            "logreg.lambda" => self.learners.logreg_lambda = parse_num(key, v)?,
            "rf.trees" => self.learners.forest.n_trees = parse_num(key, v)?,
            "rf.mtry" => self.learners.forest.mtry = parse_num(key, v)?,
            "rf.min_split" => self.learners.forest.min_split = parse_num(key, v)?,
            "rf.max_depth" => self.learners.forest.max_depth = parse_num(key, v)?,
            "rf.bootstrap" => self.learners.forest.bootstrap = parse_bool(key, v)?,
            "listnet.iterations" => self.learners.listnet.iterations = parse_num(key, v)?,
            "listnet.tol" => self.learners.listnet.tol = parse_num(key, v)?,
            "listnet.step" => self.learners.listnet.step = parse_num(key, v)?,
            "as.w0" => self.learners.propagation.virtual_weight = parse_num(key, v)?,
            "as.tol" => self.learners.propagation.tol = parse_num(key, v)?,
            "as.max_iters" => self.learners.propagation.max_iters = parse_num(key, v)?,
            "as.prior" => self.learners.propagation.prior = parse_num(key, v)?,
            "refit_every" => self.learners.refit_every = parse_num(key, v)?,
            "sampler" => {
                self.sampler.kind = match v {
                    "argmax" => SamplerKind::Argmax,
                    "geometric" | "zeta" => {
                        let family = if v == "geometric" {
                            RankFamily::Geometric
                        } else {
                            RankFamily::Zeta
                        };
                        match self.sampler.kind {
                            SamplerKind::Ranked { top, mass, .. } => SamplerKind::Ranked { family, top, mass },
                            SamplerKind::Argmax => SamplerKind::Ranked {
                                family,
                                top: TopSchedule::Count(10),
                                mass: 0.9,
                            },
                        }
                    }
                    _ => return Err(HarvestError::Validation(format!("sampler: unknown kind '{v}'"))),
                }
            }
            "sampler.top" => match &mut self.sampler.kind {
                SamplerKind::Ranked { top, .. } => *top = parse_top(v)?,
                SamplerKind::Argmax => {
                    return Err(HarvestError::Validation("sampler.top needs sampler = geometric|zeta first".into()))
                }
            },
            "sampler.mass" => match &mut self.sampler.kind {
                SamplerKind::Ranked { mass, .. } => *mass = parse_num(key, v)?,
                SamplerKind::Argmax => {
                    return Err(HarvestError::Validation("sampler.mass needs sampler = geometric|zeta first".into()))
                }
            },
            "random_query_prob" => self.sampler.random_query_prob = parse_num(key, v)?,
            "master_seed" => self.master_seed = parse_num(key, v)?,
            "runs" => self.runs = parse_num(key, v)?,
            other => return Err(HarvestError::Validation(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    fn set_path(&mut self, key: &str, path: PathBuf) {
        let (mut edges, mut labels, mut attributes) = match &self.dataset {
            DatasetSpec::Files {
                edges,
                labels,
                attributes,
            } => (edges.clone(), labels.clone(), attributes.clone()),
            DatasetSpec::Synth(_) => (PathBuf::new(), PathBuf::new(), None),
        };
        match key {
            "edges" => edges = path,
            "labels" => labels = path,
            _ => attributes = Some(path),
        }
        self.dataset = DatasetSpec::Files {
            edges,
            labels,
            attributes,
        };
    }

    fn synth_mut(&mut self) -> Result<&mut SynthParams> {
        match &mut self.dataset {
            DatasetSpec::Synth(p) => Ok(p),
            DatasetSpec::Files { .. } => Err(HarvestError::Validation(
                "synth.* keys cannot be combined with edges/labels files".into(),
            )),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HarvestError::Validation(m));
        if let DatasetSpec::Files { edges, labels, .. } = &self.dataset {
            if edges.as_os_str().is_empty() || labels.as_os_str().is_empty() {
                return bad("both an edges file and a labels file are required".into());
            }
        }
        if self.models.is_empty() {
            return bad("model set is empty".into());
        }
        let mut seen = self.models.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.models.len() {
            return bad("model set lists a model twice".into());
        }
        if !self.cold_start.is_heuristic() {
            return bad(format!("cold-start scorer must be a heuristic, got {}", self.cold_start));
        }
        if let Some(t) = self.budget {
            if t < self.cold_start_steps {
                return bad(format!("budget {t} is below cold_start_steps {}", self.cold_start_steps));
            }
        }
        match &self.seed_rule {
            SeedRule::Explicit(ids) if ids.is_empty() => return bad("explicit seed rule needs seeds".into()),
            SeedRule::UniformTarget { count: 0 } => return bad("seed_count must be >= 1".into()),
            _ => {}
        }
        if self.runs == 0 {
            return bad("runs must be >= 1".into());
        }
        if !(0.0..=1.0).contains(&self.sampler.random_query_prob) {
            return bad("random_query_prob must be in [0, 1]".into());
        }
        if let SamplerKind::Ranked { mass, .. } = self.sampler.kind {
            if !(mass > 0.0 && mass < 1.0) {
                return bad(format!("sampler.mass {mass} not in (0, 1)"));
            }
        }
        let lp = &self.learners;
        if !(lp.ewls_beta > 0.0 && lp.ewls_beta <= 1.0) || !(lp.ewls_lambda > 0.0) {
            return bad("ewls.beta must be in (0, 1] and ewls.lambda > 0".into());
        }
        if !(lp.logreg_lambda >= 0.0) {
            return bad("logreg.lambda must be >= 0".into());
        }
        if lp.forest.n_trees == 0 || lp.listnet.iterations == 0 || lp.refit_every == 0 {
            return bad("rf.trees, listnet.iterations and refit_every must be >= 1".into());
        }
        lp.propagation.validate()?;
        if let Some(kind) = self.policy_kind() {
            kind.build(1)?;
        }
        if let DatasetSpec::Synth(p) = &self.dataset {
            p.validate()?;
        }
        Ok(())
    }

    /// Bandit policy for bandit strategies.
    pub fn policy_kind(&self) -> Option<PolicyKind> {
        Some(match self.strategy {
            Strategy::RoundRobin => PolicyKind::RoundRobin,
            Strategy::D3ts => PolicyKind::DynamicThompson { cap: self.cap_c },
            Strategy::Ts => PolicyKind::Thompson,
            Strategy::Ucb1 => PolicyKind::Ucb1,
            Strategy::EpsGreedy => PolicyKind::EpsilonGreedy { epsilon: self.epsilon },
            Strategy::Exp3 => PolicyKind::Exp3 { gamma: self.gamma },
            Strategy::Standalone(_) | Strategy::SnUcb1 => return None,
        })
    }

    /// Models that act as arms after the cold start.
    pub fn arm_models(&self) -> Vec<ModelKind> {
        match self.strategy {
            Strategy::Standalone(m) => vec![m],
            Strategy::SnUcb1 => Vec::new(),
            _ => self.models.clone(),
        }
    }

    pub fn resolve_budget(&self, hidden: &HiddenGraph) -> Result<usize> {
        let t = self.budget.unwrap_or_else(|| hidden.target_count());
        if t < self.cold_start_steps {
            return Err(HarvestError::Validation(format!(
                "budget {t} is below cold_start_steps {}",
                self.cold_start_steps
            )));
        }
        Ok(t)
    }

    /// Short digest of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.cold_start_steps, 20);
        assert_eq!(cfg.policy_kind(), Some(PolicyKind::DynamicThompson { cap: 5.0 }));
    }

    #[test]
    fn text_round_trip_and_overrides() {
        let text = "# comment\nstrategy = standalone:ewls\nbudget = 50\nmodels = mod, rf\n\nsampler = zeta\nsampler.top = 10%\n";
        let mut cfg = RunConfig::default();
        for (k, v) in parse_config_text(text, Path::new("cfg")).unwrap() {
            cfg.set(&k, &v).unwrap();
        }
        cfg.set("budget", "60").unwrap();
        assert_eq!(cfg.strategy, Strategy::Standalone(ModelKind::Ewls));
        assert_eq!(cfg.budget, Some(60));
        assert_eq!(cfg.models, vec![ModelKind::Mod, ModelKind::RandomForest]);
        assert_eq!(
            cfg.sampler.kind,
            SamplerKind::Ranked {
                family: RankFamily::Zeta,
                top: TopSchedule::Fraction(0.1),
                mass: 0.9
            }
        );
        assert_eq!(cfg.arm_models(), vec![ModelKind::Ewls]);
    }

    #[test]
    fn bad_lines_and_keys() {
        match parse_config_text("a = 1\nnonsense\n", Path::new("c.cfg")) {
            Err(HarvestError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(RunConfig::default().set("colour", "red").is_err());
        assert!(RunConfig::default().set("budget", "many").is_err());
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut cfg = RunConfig::default();
        cfg.budget = Some(5);
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.models.clear();
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.cap_c = 1.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::default();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.cap_c = 10.0;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in ["standalone:rf", "round_robin", "d3ts", "ts", "ucb1", "eps_greedy", "exp3", "snucb1"] {
            assert_eq!(s.parse::<Strategy>().unwrap().to_string(), s);
        }
    }
}

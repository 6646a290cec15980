//! `harvest`: run selective-harvesting searches from the command line.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use harvest_core::graph::write_graph;
use harvest_core::harness::{
    emit_csv, mean_ci, read_results_dir, regret_report, replay_border_hypothesis, replay_training_hypothesis,
    run_experiment, ExperimentResult, ReplayMode, RunConfig, RunTrace,
};
use harvest_core::HiddenGraph;

#[derive(Parser)]
#[command(name = "harvest", version, about = "Selective harvesting over partially observed networks")]
struct Cli {
    /// Log verbosity: -v for info, -vv for debug.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One search; writes CSV files and trace-0.jsonl.
    Run {
        #[command(flatten)]
        common: Common,
    },
    /// Many independent searches with 95% confidence intervals.
    Experiment {
        #[command(flatten)]
        common: Common,
        /// Worker threads (default: available parallelism). Outputs do not depend on it.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Replays a standalone scorer against another run's graphs or observations.
    Replay {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_mode)]
        mode: ReplayMode,
        /// Trace supplying the training observations.
        #[arg(long)]
        obs_trace: PathBuf,
        /// Trace supplying the sequence of observed graphs.
        #[arg(long)]
        graph_trace: PathBuf,
    },
    /// Classifier-set regret from `<dir>/<dataset>/<set>/summary.csv`.
    Regret {
        #[arg(long)]
        results_dir: PathBuf,
    },
    /// Generates a planted-partition graph and writes it as TSV files.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        target_fraction: Option<f64>,
        #[arg(long)]
        p_in: Option<f64>,
        #[arg(long)]
        p_out: Option<f64>,
        #[arg(long)]
        attr_dim: Option<usize>,
        #[arg(long)]
        attr_flip: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

/// Flags shared by the search commands. They are applied on top of the
/// config file, so they override its values.
#[derive(Args)]
struct Common {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    edges: Option<PathBuf>,
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long)]
    attrs: Option<PathBuf>,
    /// Comma-separated seed node ids.
    #[arg(long)]
    seeds: Option<String>,
    /// `uniform` (over the target population) or `explicit`.
    #[arg(long)]
    seed_rule: Option<String>,
    /// Queries per run, or `auto` for the target-population size.
    #[arg(long)]
    budget: Option<String>,
    /// `standalone:<model>`, `rr`, `d3ts`, `ts`, `ucb1`, `eps_greedy`, `exp3` or `snucb1`.
    #[arg(long)]
    strategy: Option<String>,
    /// Comma-separated model set: mod, active_search, logreg, rf, listnet, ewls.
    #[arg(long)]
    models: Option<String>,
    #[arg(long)]
    cap_c: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long)]
    runs: Option<String>,
    #[arg(long)]
    master_seed: Option<String>,
    /// Any other config key, as `key=value`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory (or trace file for `replay`).
    #[arg(long)]
    out: PathBuf,
}

fn parse_mode(s: &str) -> std::result::Result<ReplayMode, String> {
    s.parse().map_err(|e: harvest_core::HarvestError| e.to_string())
}

impl Common {
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::from_file(p).with_context(|| format!("reading {}", p.display()))?,
            None => RunConfig::default(),
        };
        let paths = [("edges", &self.edges), ("labels", &self.labels), ("attrs", &self.attrs)];
        for (key, value) in paths {
            if let Some(p) = value {
                cfg.set(key, &p.to_string_lossy())?;
            }
        }
        let flags = [
            ("seed_rule", &self.seed_rule),
            ("seeds", &self.seeds),
            ("budget", &self.budget),
            ("strategy", &self.strategy),
            ("models", &self.models),
            ("cap_c", &self.cap_c),
            ("epsilon", &self.epsilon),
            ("gamma", &self.gamma),
            ("runs", &self.runs),
            ("master_seed", &self.master_seed),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v).with_context(|| format!("--{}", key.replace('_', "-")))?;
            }
        }
        for kv in &self.overrides {
            let (k, v) = kv.split_once('=').with_context(|| format!("--set expects key=value, got '{kv}'"))?;
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn load(cfg: &RunConfig) -> Result<Arc<HiddenGraph>> {
    let g = cfg.dataset.load().context("loading the graph")?;
    log::info!(
        "graph {}: {} nodes, {} edges, {} targets",
        g.fingerprint(),
        g.node_count(),
        g.edge_count(),
        g.target_count()
    );
    Ok(Arc::new(g))
}

fn report(result: &ExperimentResult, out: &Path) -> Result<()> {
    let written = emit_csv(result, out)?;
    let (mean, lo, hi) = mean_ci(&result.finals());
    println!(
        "{} runs completed, {} failed; targets at T={}: mean {mean:.2}, 95% CI [{lo:.2}, {hi:.2}]",
        result.traces.len(),
        result.failures.len(),
        result.budget
    );
    for f in &result.failures {
        eprintln!("run {} failed: {}", f.run, f.message);
    }
    println!("wrote {} files to {}", written.len(), out.display());
    if result.traces.is_empty() {
        bail!("every run failed");
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match cli.command {
        Command::Run { common } => {
            let cfg = common.config()?;
            let g = load(&cfg)?;
            report(&run_experiment(&cfg, g, 1, 1)?, &common.out)
        }
        Command::Experiment { common, threads } => {
            let cfg = common.config()?;
            let g = load(&cfg)?;
            let threads = threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            report(&run_experiment(&cfg, g, cfg.runs, threads)?, &common.out)
        }
        Command::Replay {
            common,
            mode,
            obs_trace,
            graph_trace,
        } => {
            let cfg = common.config()?;
            let g = load(&cfg)?;
            let obs = RunTrace::load(&obs_trace).with_context(|| format!("reading {}", obs_trace.display()))?;
            let graph = RunTrace::load(&graph_trace).with_context(|| format!("reading {}", graph_trace.display()))?;
            let t = match mode {
                ReplayMode::Border => replay_border_hypothesis(&cfg, &obs, &graph, g)?,
                ReplayMode::Training => replay_training_hypothesis(&cfg, &graph, &obs, g)?,
            };
            if let Some(dir) = common.out.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            t.save(&common.out)?;
            println!(
                "{}: {} payoffs over {} steps ({} distinct targets); source run found {}",
                t.header.strategy,
                t.final_targets(),
                t.steps.len(),
                t.distinct_targets(),
                graph.final_targets()
            );
            Ok(())
        }
        Command::Regret { results_dir } => {
            let results = read_results_dir(&results_dir)?;
            let r = regret_report(&results)?;
            for (dataset, sets) in &r.per_dataset {
                for (set, regret) in sets {
                    println!("{dataset}\t{set}\t{regret:.4}");
                }
            }
            println!("min-max\t{}\t{:.4}", r.min_max.0, r.min_max.1);
            println!("min-avg\t{}\t{:.4}", r.min_avg.0, r.min_avg.1);
            Ok(())
        }
        Command::Synth {
            out,
            config,
            n,
            target_fraction,
            p_in,
            p_out,
            attr_dim,
            attr_flip,
            seed,
        } => {
            let mut cfg = match &config {
                Some(p) => RunConfig::from_file(p)?,
                None => RunConfig::default(),
            };
            let keys = [
                ("synth.n", n.map(|v| v.to_string())),
                ("synth.target_fraction", target_fraction.map(|v| v.to_string())),
                ("synth.p_in", p_in.map(|v| v.to_string())),
                ("synth.p_out", p_out.map(|v| v.to_string())),
                ("synth.attr_dim", attr_dim.map(|v| v.to_string())),
                ("synth.attr_flip", attr_flip.map(|v| v.to_string())),
                ("synth.seed", seed.map(|v| v.to_string())),
            ];
            for (k, v) in keys {
                if let Some(v) = v {
                    cfg.set(k, &v)?;
                }
            }
            let g = load(&cfg)?;
            write_graph(&g, &out)?;
            println!(
                "wrote {} nodes, {} edges, {} targets to {}",
                g.node_count(),
                g.edge_count(),
                g.target_count(),
                out.display()
            );
            Ok(())
        }
    }
}

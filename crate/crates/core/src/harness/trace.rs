//! Per-run records and their JSON-lines file form.
//!
//! A trace file holds one `header` record, one `step` record per query and
//! a final `end` record. The observed graph at any step is recovered by
//! replaying the seeds and the query prefix against the hidden graph.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{HarvestError, Result};
use crate::graph::{HiddenGraph, NodeId};
use crate::learners::Observation;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub run: usize,
    pub run_seed: u64,
    pub config_hash: String,
    /// Fingerprint of the hidden graph.
    pub graph: String,
    pub seeds: Vec<String>,
    pub strategy: String,
    pub arms: Vec<String>,
    pub budget: usize,
    pub cold_start: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: usize,
    pub arm: String,
    pub node: String,
    pub label: bool,
    pub cum_targets: usize,
    /// Border size before the query.
    pub border_size: usize,
    /// Raw features of the chosen node before it was queried.
    pub features: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    BudgetReached,
    BorderExhausted,
    Aborted { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Record {
    Header(TraceHeader),
    Step(StepRecord),
    End { status: RunStatus },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub header: TraceHeader,
    pub steps: Vec<StepRecord>,
    pub status: RunStatus,
}

impl RunTrace {
    pub fn final_targets(&self) -> usize {
        self.steps.last().map_or(0, |s| s.cum_targets)
    }

    /// Targets among the distinct nodes named by the steps. Equals
    /// `final_targets` for ordinary runs; a replay may name a node twice.
    pub fn distinct_targets(&self) -> usize {
        let mut seen = HashSet::new();
        self.steps.iter().filter(|s| s.label && seen.insert(s.node.as_str())).count()
    }

    /// Cumulative targets for `t = 1..=len`, padded with the last value.
    pub fn curve(&self, len: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.steps.iter().take(len).map(|s| s.cum_targets).collect();
        let last = out.last().copied().unwrap_or(0);
        out.resize(len, last);
        out
    }

    fn resolve(hidden: &HiddenGraph, name: &str) -> Result<NodeId> {
        hidden
            .ids()
            .get(name)
            .ok_or_else(|| HarvestError::Validation(format!("trace names unknown node '{name}'")))
    }

    pub fn seed_ids(&self, hidden: &HiddenGraph) -> Result<Vec<NodeId>> {
        self.header.seeds.iter().map(|s| Self::resolve(hidden, s)).collect()
    }

    /// Queried nodes in order.
    pub fn query_ids(&self, hidden: &HiddenGraph) -> Result<Vec<NodeId>> {
        self.steps.iter().map(|s| Self::resolve(hidden, &s.node)).collect()
    }

    /// `(features, label)` pairs in query order.
    pub fn observations(&self) -> Vec<Observation> {
        self.steps
            .iter()
            .map(|s| Observation {
                features: s.features.clone(),
                label: s.label,
            })
            .collect()
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        let mut line = |r: &Record| -> Result<()> {
            serde_json::to_writer(&mut out, r)?;
            out.write_all(b"\n")?;
            Ok(())
        };
        line(&Record::Header(self.header.clone()))?;
        for s in &self.steps {
            line(&Record::Step(s.clone()))?;
        }
        line(&Record::End {
            status: self.status.clone(),
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_jsonl(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_jsonl(BufReader::new(File::open(path)?), path)
    }

    pub fn read_jsonl<R: BufRead>(input: R, origin: &Path) -> Result<Self> {
        let mut header = None;
        let mut steps = Vec::new();
        let mut status = None;
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: Record =
                serde_json::from_str(&line).map_err(|e| HarvestError::parse(origin, i + 1, e.to_string()))?;
            match rec {
                Record::Header(h) if header.is_none() => header = Some(h),
                Record::Step(s) if header.is_some() && status.is_none() => {
                    if s.t != steps.len() + 1 {
                        return Err(HarvestError::parse(origin, i + 1, format!("step {} out of order", s.t)));
                    }
                    steps.push(s)
                }
                Record::End { status: st } if header.is_some() && status.is_none() => status = Some(st),
                _ => return Err(HarvestError::parse(origin, i + 1, "record out of place")),
            }
        }
        let header = header.ok_or_else(|| HarvestError::parse(origin, 1, "missing header"))?;
        let status = status.ok_or_else(|| HarvestError::parse(origin, steps.len() + 2, "missing end record"))?;
        Ok(RunTrace { header, steps, status })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RunTrace {
        RunTrace {
            header: TraceHeader {
                run: 3,
                run_seed: 42,
                config_hash: "abc".into(),
                graph: "f00".into(),
                seeds: vec!["7".into()],
                strategy: "d3ts".into(),
                arms: vec!["cold-start".into(), "MOD".into()],
                budget: 4,
                cold_start: 1,
            },
            steps: vec![
                StepRecord {
                    t: 1,
                    arm: "cold-start".into(),
                    node: "2".into(),
                    label: true,
                    cum_targets: 1,
                    border_size: 3,
                    features: vec![0.1, 1.0 / 3.0, -0.0],
                    flags: vec![],
                },
                StepRecord {
                    t: 2,
                    arm: "MOD".into(),
                    node: "5".into(),
                    label: false,
                    cum_targets: 1,
                    border_size: 4,
                    features: vec![2.5e-300, 0.0, 1e10],
                    flags: vec!["LogReg: single class".into()],
                },
            ],
            status: RunStatus::BorderExhausted,
        }
    }

    #[test]
    fn jsonl_round_trip_is_exact() {
        let t = sample();
        let mut buf = Vec::new();
        t.write_jsonl(&mut buf).unwrap();
        let back = RunTrace::read_jsonl(&buf[..], Path::new("t")).unwrap();
        assert_eq!(back, t);
        let mut again = Vec::new();
        back.write_jsonl(&mut again).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn curve_pads_with_last_value() {
        assert_eq!(sample().curve(4), vec![1, 1, 1, 1]);
        assert_eq!(sample().curve(1), vec![1]);
    }

    #[test]
    fn rejects_malformed_files() {
        let t = sample();
        let mut buf = Vec::new();
        t.write_jsonl(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let no_end: String = text.lines().take(3).map(|l| format!("{l}\n")).collect();
        assert!(RunTrace::read_jsonl(no_end.as_bytes(), Path::new("t")).is_err());
        let garbage = format!("{}\n{{oops\n", text.lines().next().unwrap());
        match RunTrace::read_jsonl(garbage.as_bytes(), Path::new("t")) {
            Err(HarvestError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }
}

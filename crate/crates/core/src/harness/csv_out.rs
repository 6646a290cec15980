//! CSV and trace files for an experiment.
//!
//! Column order is fixed:
//! `curves.csv` run,t,cum_targets,arm,node,label,border_size;
//! `arms.csv` run,t,arm,hit_ratio,usage;
//! `summary.csv` t,mean,ci_lo,ci_hi.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::Result;

use super::experiment::{ArmRow, ExperimentResult, SummaryRow};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub run: usize,
    pub t: usize,
    pub cum_targets: usize,
    pub arm: String,
    pub node: String,
    pub label: u8,
    pub border_size: usize,
}

const CURVE_HEADER: [&str; 7] = ["run", "t", "cum_targets", "arm", "node", "label", "border_size"];
const ARM_HEADER: [&str; 5] = ["run", "t", "arm", "hit_ratio", "usage"];
const SUMMARY_HEADER: [&str; 4] = ["t", "mean", "ci_lo", "ci_hi"];

fn write_rows<T: Serialize>(path: &Path, header: &[&str], rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(BufWriter::new(File::create(path)?));
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn read_rows<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    let rows = r.deserialize().collect::<std::result::Result<Vec<T>, _>>()?;
    Ok(rows)
}

pub fn curve_rows(result: &ExperimentResult) -> Vec<CurveRow> {
    result
        .traces
        .iter()
        .flat_map(|tr| {
            tr.steps.iter().map(move |s| CurveRow {
                run: tr.header.run,
                t: s.t,
                cum_targets: s.cum_targets,
                arm: s.arm.clone(),
                node: s.node.clone(),
                label: s.label as u8,
                border_size: s.border_size,
            })
        })
        .collect()
}

/// Writes `curves.csv`, `arms.csv`, `summary.csv` and one `trace-<run>.jsonl`
/// per completed run. Returns the paths written.
pub fn emit_csv(result: &ExperimentResult, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let curves = out_dir.join("curves.csv");
    let arms = out_dir.join("arms.csv");
    let summary = out_dir.join("summary.csv");
    write_rows(&curves, &CURVE_HEADER, curve_rows(result))?;
    write_rows(&arms, &ARM_HEADER, result.arm_rows())?;
    write_rows(&summary, &SUMMARY_HEADER, &result.summary)?;
    let mut written = vec![curves, arms, summary];
    for t in &result.traces {
        let p = out_dir.join(format!("trace-{}.jsonl", t.header.run));
        t.save(&p)?;
        written.push(p);
    }
    Ok(written)
}

pub fn read_curves(path: &Path) -> Result<Vec<CurveRow>> {
    read_rows(path)
}

pub fn read_arms(path: &Path) -> Result<Vec<ArmRow>> {
    read_rows(path)
}

pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>> {
    read_rows(path)
}

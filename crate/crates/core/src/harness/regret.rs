//! Normalized regret of classifier sets: `R(M, D) = 1 − N₊(M, D) / max N₊(·, D)`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{HarvestError, Result};

use super::csv_out::read_summary;

/// Regret of every set on one dataset.
pub fn regret_table(dataset: &str, found: &BTreeMap<String, f64>) -> Result<BTreeMap<String, f64>> {
    if found.is_empty() {
        return Err(HarvestError::Validation(format!("no classifier sets for dataset `{dataset}`")));
    }
    if let Some((set, v)) = found.iter().find(|(_, v)| !(**v >= 0.0) || !v.is_finite()) {
        return Err(HarvestError::Validation(format!("set `{set}` has invalid target count {v}")));
    }
    let best = found.values().copied().fold(0.0, f64::max);
    if best <= 0.0 {
        return Err(HarvestError::UndefinedRegret(dataset.to_string()));
    }
    Ok(found.iter().map(|(k, v)| (k.clone(), 1.0 - v / best)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretReport {
    /// dataset -> set -> regret
    pub per_dataset: BTreeMap<String, BTreeMap<String, f64>>,
    /// Set with the smallest worst-case regret, and that regret.
    pub min_max: (String, f64),
    /// Set with the smallest mean regret, and that mean.
    pub min_avg: (String, f64),
}

/// Regrets over several datasets. Every dataset must report the same sets;
/// ties go to the lexicographically first set.
pub fn regret_report(results: &BTreeMap<String, BTreeMap<String, f64>>) -> Result<RegretReport> {
    let mut per_dataset = BTreeMap::new();
    for (d, found) in results {
        per_dataset.insert(d.clone(), regret_table(d, found)?);
    }
    let mut sets = per_dataset
        .values()
        .next()
        .ok_or_else(|| HarvestError::Validation("no datasets".into()))?
        .keys();
    let first: Vec<String> = sets.by_ref().cloned().collect();
    for (d, table) in &per_dataset {
        if !table.keys().eq(first.iter()) {
            return Err(HarvestError::Validation(format!(
                "dataset `{d}` reports a different collection of classifier sets"
            )));
        }
    }
    let mut min_max: Option<(String, f64)> = None;
    let mut min_avg: Option<(String, f64)> = None;
    for set in &first {
        let rs: Vec<f64> = per_dataset.values().map(|t| t[set]).collect();
        let worst = rs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let avg = rs.iter().sum::<f64>() / rs.len() as f64;
        if min_max.as_ref().is_none_or(|(_, v)| worst < *v) {
            min_max = Some((set.clone(), worst));
        }
        if min_avg.as_ref().is_none_or(|(_, v)| avg < *v) {
            min_avg = Some((set.clone(), avg));
        }
    }
    Ok(RegretReport {
        per_dataset,
        min_max: min_max.expect("at least one set"),
        min_avg: min_avg.expect("at least one set"),
    })
}

/// Reads `<dir>/<dataset>/<set>/summary.csv` and takes the final mean as
/// the set's target count.
pub fn read_results_dir(dir: &Path) -> Result<BTreeMap<String, BTreeMap<String, f64>>> {
    let mut out = BTreeMap::new();
    let mut datasets: Vec<_> = fs::read_dir(dir)?.collect::<std::io::Result<Vec<_>>>()?;
    datasets.sort_by_key(|e| e.file_name());
    for d in datasets {
        if !d.file_type()?.is_dir() {
            continue;
        }
        let mut sets: Vec<_> = fs::read_dir(d.path())?.collect::<std::io::Result<Vec<_>>>()?;
        sets.sort_by_key(|e| e.file_name());
        let mut table = BTreeMap::new();
        for s in sets {
            let summary = s.path().join("summary.csv");
            if !summary.is_file() {
                continue;
            }
            let rows = read_summary(&summary)?;
            let last = rows
                .last()
                .ok_or_else(|| HarvestError::Validation(format!("{} has no rows", summary.display())))?;
            table.insert(s.file_name().to_string_lossy().into_owned(), last.mean);
        }
        if !table.is_empty() {
            out.insert(d.file_name().to_string_lossy().into_owned(), table);
        }
    }
    if out.is_empty() {
        return Err(HarvestError::Validation(format!(
            "no <dataset>/<set>/summary.csv files under {}",
            dir.display()
        )));
    }
    Ok(out)
}

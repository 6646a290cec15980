//! Tab-separated graph files.
//!
//! * edges: `u<TAB>v` per line
//! * labels: `node<TAB>{0|1}` per line
//! * attributes: `node<TAB>attr_index<TAB>value` per line, omitted entries are 0
//!
//! Blank lines and lines starting with `#` are skipped everywhere.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{EdgeReport, HiddenGraph, IdMap, NodeId, SparseVec};
use crate::error::{HarvestError, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub edges: EdgeReport,
    /// Nodes that appear in no edge.
    pub isolated: usize,
}

fn records(path: &Path) -> Result<impl Iterator<Item = Result<(usize, Vec<String>)>>> {
    let file = File::open(path)?;
    let reader = BufReader::new(file);
    Ok(reader.lines().enumerate().filter_map(|(i, line)| match line {
        Err(e) => Some(Err(e.into())),
        Ok(line) => {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                None
            } else {
                let fields = trimmed.split('\t').map(|s| s.trim().to_string()).collect();
                Some(Ok((i + 1, fields)))
            }
        }
    }))
}

fn expect_fields(path: &Path, line: usize, fields: &[String], n: usize) -> Result<()> {
    if fields.len() != n || fields.iter().any(|f| f.is_empty()) {
        return Err(HarvestError::parse(
            path,
            line,
            format!("expected {n} tab-separated fields, found {}", fields.len()),
        ));
    }
    Ok(())
}

/// Loads a hidden graph from the three files. Ids are assigned in order of
/// first appearance: edges file first, then labels file. Every node must
/// have a label; nodes present only in the labels file are kept isolated.
pub fn load_graph(
    edges_path: &Path,
    labels_path: &Path,
    attributes_path: Option<&Path>,
) -> Result<(HiddenGraph, LoadReport)> {
    let mut ids = IdMap::new();
    let mut edges: Vec<(NodeId, NodeId)> = Vec::new();
    for rec in records(edges_path)? {
        let (line, f) = rec?;
        expect_fields(edges_path, line, &f, 2)?;
        let u = ids.intern(&f[0]);
        let v = ids.intern(&f[1]);
        edges.push((u, v));
    }
    let in_edges = ids.len();

    let mut labels: Vec<Option<bool>> = vec![None; ids.len()];
    for rec in records(labels_path)? {
        let (line, f) = rec?;
        expect_fields(labels_path, line, &f, 2)?;
        let v = ids.intern(&f[0]);
        if v >= labels.len() {
            labels.resize(v + 1, None);
        }
        labels[v] = Some(match f[1].as_str() {
            "0" => false,
            "1" => true,
            other => {
                return Err(HarvestError::Validation(format!(
                    "{}:{line}: label `{other}` for node `{}` is not 0 or 1",
                    labels_path.display(),
                    f[0]
                )))
            }
        });
    }
    let labels: Vec<bool> = labels
        .into_iter()
        .enumerate()
        .map(|(v, y)| {
            y.ok_or_else(|| HarvestError::Validation(format!("node `{}` has no label", ids.name(v))))
        })
        .collect::<Result<_>>()?;

    let n = ids.len();
    let mut attr_entries: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
    let mut attr_dim = 0usize;
    if let Some(path) = attributes_path {
        for rec in records(path)? {
            let (line, f) = rec?;
            expect_fields(path, line, &f, 3)?;
            let v = ids.get(&f[0]).ok_or_else(|| {
                HarvestError::Validation(format!(
                    "{}:{line}: attribute row for unknown node `{}`",
                    path.display(),
                    f[0]
                ))
            })?;
            let index: u32 = f[1]
                .parse()
                .map_err(|_| HarvestError::parse(path, line, format!("bad attribute index `{}`", f[1])))?;
            let value: f64 = f[2]
                .parse()
                .map_err(|_| HarvestError::parse(path, line, format!("bad attribute value `{}`", f[2])))?;
            if !value.is_finite() {
                return Err(HarvestError::parse(path, line, "attribute value is not finite"));
            }
            attr_dim = attr_dim.max(index as usize + 1);
            attr_entries[v].push((index, value));
        }
    }
    let attributes = attr_entries.into_iter().map(SparseVec::from_entries).collect();

    let (graph, edge_report) = HiddenGraph::from_parts(ids, edges, labels, attributes, attr_dim)?;
    if edge_report.duplicates > 0 || edge_report.self_loops > 0 {
        log::warn!(
            "{}: dropped {} duplicate edges and {} self-loops",
            edges_path.display(),
            edge_report.duplicates,
            edge_report.self_loops
        );
    }
    let isolated = (0..graph.node_count()).filter(|&v| graph.degree(v) == 0).count();
    debug_assert!(isolated >= n - in_edges);
    Ok((
        graph,
        LoadReport {
            edges: edge_report,
            isolated,
        },
    ))
}

/// Writes `edges.tsv`, `labels.tsv`, `attrs.tsv` and the id map `ids.tsv`
/// into `dir`.
pub fn write_graph(graph: &HiddenGraph, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let ids = graph.ids();

    let mut w = BufWriter::new(File::create(dir.join("edges.tsv"))?);
    for (u, v) in graph.edges() {
        writeln!(w, "{}\t{}", ids.name(u), ids.name(v))?;
    }
    w.flush()?;

    let mut w = BufWriter::new(File::create(dir.join("labels.tsv"))?);
    for v in 0..graph.node_count() {
        writeln!(w, "{}\t{}", ids.name(v), graph.label(v) as u8)?;
    }
    w.flush()?;

    let mut w = BufWriter::new(File::create(dir.join("attrs.tsv"))?);
    for v in 0..graph.node_count() {
        for &(i, x) in graph.attributes(v).entries() {
            writeln!(w, "{}\t{}\t{}", ids.name(v), i, x)?;
        }
    }
    w.flush()?;

    let mut w = BufWriter::new(File::create(dir.join("ids.tsv"))?);
    for v in 0..graph.node_count() {
        writeln!(w, "{}\t{}", v, ids.name(v))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads an `index<TAB>name` id map as written by [`write_graph`].
pub fn read_id_map(path: &Path) -> Result<IdMap> {
    let mut map = IdMap::new();
    for rec in records(path)? {
        let (line, f) = rec?;
        expect_fields(path, line, &f, 2)?;
        let index: usize = f[0]
            .parse()
            .map_err(|_| HarvestError::parse(path, line, "bad index"))?;
        if index != map.len() || map.get(&f[1]).is_some() {
            return Err(HarvestError::parse(path, line, "id map must list each index once, in order"));
        }
        map.intern(&f[1]);
    }
    Ok(map)
}

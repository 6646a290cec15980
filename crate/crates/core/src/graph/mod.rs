//! The hidden network and the searcher's evolving view of it.

mod io;
mod state;
mod synth;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{HarvestError, Result};

pub use io::{load_graph, read_id_map, write_graph, LoadReport};
pub use state::{init_state, NodeStatus, ObservedState, QueryResult};
pub use synth::{synth_generate, SynthParams};

/// Dense internal node index.
pub type NodeId = usize;

/// Sparse real vector stored as `(index, value)` pairs sorted by index.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseVec {
    entries: Vec<(u32, f64)>,
}

impl SparseVec {
    /// Builds a vector from unsorted entries. Later duplicates overwrite
    /// earlier ones; explicit zeros are dropped.
    pub fn from_entries(mut entries: Vec<(u32, f64)>) -> Self {
        // stable sort keeps input order among equal indices, so the last one wins
        entries.sort_by_key(|&(i, _)| i);
        let mut out: Vec<(u32, f64)> = Vec::with_capacity(entries.len());
        for (i, v) in entries {
            match out.last_mut() {
                Some(last) if last.0 == i => last.1 = v,
                _ => out.push((i, v)),
            }
        }
        out.retain(|&(_, v)| v != 0.0);
        SparseVec { entries: out }
    }

    pub fn from_dense(values: &[f64]) -> Self {
        let entries = values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(i, &v)| (i as u32, v))
            .collect();
        SparseVec { entries }
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn get(&self, index: usize) -> f64 {
        self.entries
            .binary_search_by_key(&(index as u32), |&(i, _)| i)
            .map(|p| self.entries[p].1)
            .unwrap_or(0.0)
    }

    pub fn to_dense(&self, dim: usize) -> Vec<f64> {
        let mut out = vec![0.0; dim];
        for &(i, v) in &self.entries {
            out[i as usize] = v;
        }
        out
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.last().map(|&(i, _)| i as usize)
    }
}

/// Bidirectional map between external string ids and dense indices.
#[derive(Debug, Clone, Default)]
pub struct IdMap {
    names: Vec<String>,
    index: HashMap<String, NodeId>,
}

impl IdMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// `n` nodes named `"0"`, `"1"`, ...
    pub fn sequential(n: usize) -> Self {
        let mut map = Self::new();
        for i in 0..n {
            map.intern(&i.to_string());
        }
        map
    }

    pub fn intern(&mut self, name: &str) -> NodeId {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        id
    }

    pub fn get(&self, name: &str) -> Option<NodeId> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: NodeId) -> &str {
        &self.names[id]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

/// Ground-truth network: topology, node attributes and binary labels.
///
/// Only the query oracle ([`ObservedState`]) should read labels and
/// attributes; searchers see them through the observed state.
#[derive(Debug, Clone)]
pub struct HiddenGraph {
    adjacency: Vec<Vec<NodeId>>,
    labels: Vec<bool>,
    attributes: Vec<SparseVec>,
    attr_dim: usize,
    ids: IdMap,
    edge_count: usize,
}

/// Counts of edges dropped while assembling a graph.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EdgeReport {
    pub duplicates: usize,
    pub self_loops: usize,
}

impl HiddenGraph {
    /// Assembles a simple undirected graph. Duplicate edges (in either
    /// orientation) and self-loops are dropped and counted.
    pub fn from_parts(
        ids: IdMap,
        edges: impl IntoIterator<Item = (NodeId, NodeId)>,
        labels: Vec<bool>,
        attributes: Vec<SparseVec>,
        attr_dim: usize,
    ) -> Result<(Self, EdgeReport)> {
        let n = ids.len();
        if labels.len() != n {
            return Err(HarvestError::Validation(format!(
                "{} labels for {} nodes",
                labels.len(),
                n
            )));
        }
        if attributes.len() != n {
            return Err(HarvestError::Validation(format!(
                "{} attribute vectors for {} nodes",
                attributes.len(),
                n
            )));
        }
        for (v, a) in attributes.iter().enumerate() {
            if let Some(i) = a.max_index() {
                if i >= attr_dim {
                    return Err(HarvestError::Validation(format!(
                        "node `{}` has attribute index {} >= dimension {}",
                        ids.name(v),
                        i,
                        attr_dim
                    )));
                }
            }
        }

        let mut report = EdgeReport::default();
        let mut adjacency = vec![Vec::new(); n];
        let mut raw = 0usize;
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(HarvestError::Validation(format!(
                    "edge ({u}, {v}) references a node outside 0..{n}"
                )));
            }
            if u == v {
                report.self_loops += 1;
                continue;
            }
            raw += 1;
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        let mut kept = 0usize;
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
            kept += list.len();
        }
        let edge_count = kept / 2;
        report.duplicates = raw - edge_count;

        let graph = HiddenGraph {
            adjacency,
            labels,
            attributes,
            attr_dim,
            ids,
            edge_count,
        };
        Ok((graph, report))
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn attr_dim(&self) -> usize {
        self.attr_dim
    }

    /// Sorted neighbor list.
    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adjacency[v].len()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    pub fn label(&self, v: NodeId) -> bool {
        self.labels[v]
    }

    pub fn attributes(&self, v: NodeId) -> &SparseVec {
        &self.attributes[v]
    }

    pub fn ids(&self) -> &IdMap {
        &self.ids
    }

    pub fn target_count(&self) -> usize {
        self.labels.iter().filter(|&&y| y).count()
    }

    pub fn targets(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.labels.iter().enumerate().filter(|(_, &y)| y).map(|(v, _)| v)
    }

    /// Undirected edges with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, nbrs)| nbrs.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// Content hash over ids, topology, labels and attributes. Traces carry it
    /// so replays can refuse traces recorded on a different network.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.node_count() as u64).to_le_bytes());
        h.update((self.attr_dim as u64).to_le_bytes());
        for v in 0..self.node_count() {
            h.update(self.ids.name(v).as_bytes());
            h.update([0u8, self.labels[v] as u8]);
            h.update((self.adjacency[v].len() as u64).to_le_bytes());
            for &w in &self.adjacency[v] {
                h.update((w as u64).to_le_bytes());
            }
            for &(i, x) in self.attributes[v].entries() {
                h.update(i.to_le_bytes());
                h.update(x.to_bits().to_le_bytes());
            }
        }
        let digest = h.finalize();
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Checks the structural invariants: symmetric, sorted, simple adjacency
    /// and in-range attribute indices.
    pub fn validate(&self) -> Result<()> {
        for (u, nbrs) in self.adjacency.iter().enumerate() {
            if nbrs.windows(2).any(|w| w[0] >= w[1]) {
                return Err(HarvestError::Validation(format!(
                    "neighbors of {u} not strictly sorted"
                )));
            }
            for &v in nbrs {
                if v == u {
                    return Err(HarvestError::Validation(format!("self-loop at {u}")));
                }
                if !self.has_edge(v, u) {
                    return Err(HarvestError::Validation(format!("edge ({u},{v}) not symmetric")));
                }
            }
        }
        for a in &self.attributes {
            if a.max_index().is_some_and(|i| i >= self.attr_dim) {
                return Err(HarvestError::Validation("attribute index out of range".into()));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// Graph on nodes "0".."n-1" with the given edges and labels, no attributes.
    pub fn graph(n: usize, edges: &[(usize, usize)], targets: &[usize]) -> HiddenGraph {
        let mut labels = vec![false; n];
        for &t in targets {
            labels[t] = true;
        }
        HiddenGraph::from_parts(
            IdMap::sequential(n),
            edges.iter().copied(),
            labels,
            vec![SparseVec::default(); n],
            0,
        )
        .unwrap()
        .0
    }
}

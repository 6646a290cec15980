use std::sync::Arc;

use super::{HiddenGraph, NodeId, SparseVec};
use crate::error::{HarvestError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeStatus {
    /// Neither queried nor adjacent to a queried node.
    Unseen,
    Border,
    Queried,
}

/// What the oracle reveals about a queried node.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryResult {
    pub node: NodeId,
    pub label: bool,
    pub attributes: SparseVec,
    /// Neighbors that entered the border set because of this query.
    pub revealed_neighbors: Vec<NodeId>,
}

/// The searcher's view: queried set, border set and the observed subgraph.
///
/// The observed graph holds every edge incident to a queried node and no
/// edge between two border nodes. Because a queried node's neighbors are
/// all in `Q ∪ B`, its observed neighbors are exactly its hidden
/// neighbors; a border node's observed neighbors are its queried
/// neighbors. The adjacency is therefore derived on demand rather than
/// stored.
#[derive(Debug, Clone)]
pub struct ObservedState {
    hidden: Arc<HiddenGraph>,
    status: Vec<NodeStatus>,
    queried: Vec<NodeId>,
    border: Vec<NodeId>,
    border_pos: Vec<usize>,
    queried_nbrs: Vec<u32>,
    target_nbrs: Vec<u32>,
    targets_queried: usize,
    seed_count: usize,
}

const NOT_IN_BORDER: usize = usize::MAX;

/// Queries the seed nodes and returns the initial state.
pub fn init_state(hidden: Arc<HiddenGraph>, seeds: &[NodeId]) -> Result<ObservedState> {
    if seeds.is_empty() {
        return Err(HarvestError::Validation("seed list is empty".into()));
    }
    let n = hidden.node_count();
    let mut state = ObservedState {
        status: vec![NodeStatus::Unseen; n],
        queried: Vec::with_capacity(seeds.len()),
        border: Vec::new(),
        border_pos: vec![NOT_IN_BORDER; n],
        queried_nbrs: vec![0; n],
        target_nbrs: vec![0; n],
        targets_queried: 0,
        seed_count: seeds.len(),
        hidden,
    };
    for &s in seeds {
        if s >= n {
            return Err(HarvestError::Validation(format!("seed {s} is not a node (n = {n})")));
        }
        if state.status[s] == NodeStatus::Queried {
            return Err(HarvestError::Validation(format!(
                "seed `{}` listed twice",
                state.hidden.ids().name(s)
            )));
        }
        state.reveal(s);
    }
    state.debug_validate();
    Ok(state)
}

impl ObservedState {
    /// Queries a border node.
    pub fn query(&mut self, node: NodeId) -> Result<QueryResult> {
        if self.border.is_empty() {
            return Err(HarvestError::ExhaustedBorder);
        }
        if node >= self.status.len() || self.status[node] != NodeStatus::Border {
            return Err(HarvestError::Contract(format!("node {node} is not in the border set")));
        }
        let result = self.reveal(node);
        self.debug_validate();
        Ok(result)
    }

    fn reveal(&mut self, node: NodeId) -> QueryResult {
        if self.status[node] == NodeStatus::Border {
            let pos = self.border_pos[node];
            self.border.swap_remove(pos);
            if let Some(&moved) = self.border.get(pos) {
                self.border_pos[moved] = pos;
            }
            self.border_pos[node] = NOT_IN_BORDER;
        }
        self.status[node] = NodeStatus::Queried;
        self.queried.push(node);

        let hidden = Arc::clone(&self.hidden);
        let label = hidden.label(node);
        if label {
            self.targets_queried += 1;
        }
        let mut revealed = Vec::new();
        for &w in hidden.neighbors(node) {
            self.queried_nbrs[w] += 1;
            self.target_nbrs[w] += label as u32;
            if self.status[w] == NodeStatus::Unseen {
                self.status[w] = NodeStatus::Border;
                self.border_pos[w] = self.border.len();
                self.border.push(w);
                revealed.push(w);
            }
        }
        QueryResult {
            node,
            label,
            attributes: hidden.attributes(node).clone(),
            revealed_neighbors: revealed,
        }
    }

    pub fn hidden(&self) -> &Arc<HiddenGraph> {
        &self.hidden
    }

    pub fn node_count(&self) -> usize {
        self.status.len()
    }

    pub fn status(&self, v: NodeId) -> NodeStatus {
        self.status[v]
    }

    pub fn is_queried(&self, v: NodeId) -> bool {
        self.status[v] == NodeStatus::Queried
    }

    pub fn is_border(&self, v: NodeId) -> bool {
        self.status[v] == NodeStatus::Border
    }

    /// Queried nodes in query order, seeds first.
    pub fn queried(&self) -> &[NodeId] {
        &self.queried
    }

    /// Border nodes in a deterministic (but unspecified) order.
    pub fn border(&self) -> &[NodeId] {
        &self.border
    }

    /// Number of queried nodes, seeds included.
    pub fn step(&self) -> usize {
        self.queried.len()
    }

    pub fn seed_count(&self) -> usize {
        self.seed_count
    }

    /// Queries issued after the seeds.
    pub fn queries_made(&self) -> usize {
        self.queried.len() - self.seed_count
    }

    /// Targets among all queried nodes, seeds included.
    pub fn targets_queried(&self) -> usize {
        self.targets_queried
    }

    /// Label of a queried node; `None` for anything not yet queried.
    pub fn label(&self, v: NodeId) -> Option<bool> {
        self.is_queried(v).then(|| self.hidden.label(v))
    }

    /// Attributes of a queried node.
    pub fn attributes(&self, v: NodeId) -> Option<&SparseVec> {
        self.is_queried(v).then(|| self.hidden.attributes(v))
    }

    pub fn attr_dim(&self) -> usize {
        self.hidden.attr_dim()
    }

    /// Neighbors of `v` in the observed graph, ascending.
    pub fn observed_neighbors(&self, v: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        let own = self.status[v];
        self.hidden.neighbors(v).iter().copied().filter(move |&w| match own {
            NodeStatus::Queried => true,
            NodeStatus::Border => self.status[w] == NodeStatus::Queried,
            NodeStatus::Unseen => false,
        })
    }

    pub fn observed_degree(&self, v: NodeId) -> usize {
        match self.status[v] {
            NodeStatus::Queried => self.hidden.degree(v),
            NodeStatus::Border => self.queried_nbrs[v] as usize,
            NodeStatus::Unseen => 0,
        }
    }

    /// Whether `(u, v)` is an edge of the observed graph.
    pub fn has_observed_edge(&self, u: NodeId, v: NodeId) -> bool {
        (self.is_queried(u) || self.is_queried(v))
            && self.status[u] != NodeStatus::Unseen
            && self.status[v] != NodeStatus::Unseen
            && self.hidden.has_edge(u, v)
    }

    /// Count of queried neighbors of any node.
    pub fn queried_neighbor_count(&self, v: NodeId) -> usize {
        self.queried_nbrs[v] as usize
    }

    /// Count of queried target neighbors of any node.
    pub fn target_neighbor_count(&self, v: NodeId) -> usize {
        self.target_nbrs[v] as usize
    }

    /// Observed edges `(u, v)` with `u < v`, ascending.
    pub fn observed_edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::new();
        for &u in &self.queried {
            for &w in self.hidden.neighbors(u) {
                if !self.is_queried(w) || u < w {
                    out.push((u.min(w), u.max(w)));
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Rebuilds a state from seeds and a query sequence.
    pub fn replay(hidden: Arc<HiddenGraph>, seeds: &[NodeId], queries: &[NodeId]) -> Result<Self> {
        let mut state = init_state(hidden, seeds)?;
        for &v in queries {
            state.query(v)?;
        }
        Ok(state)
    }

    fn debug_validate(&self) {
        if cfg!(debug_assertions) {
            if let Err(e) = self.validate() {
                panic!("observed state invariant broken: {e}");
            }
        }
    }

    /// Checks the state invariants.
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(HarvestError::Validation(m));
        let mut n_queried = 0;
        for (v, &s) in self.status.iter().enumerate() {
            match s {
                NodeStatus::Queried => n_queried += 1,
                NodeStatus::Border => {
                    let pos = self.border_pos[v];
                    if self.border.get(pos) != Some(&v) {
                        return fail(format!("border index of {v} stale"));
                    }
                    if self.queried_nbrs[v] == 0 {
                        return fail(format!("border node {v} has no queried neighbor"));
                    }
                }
                NodeStatus::Unseen => {
                    if self.queried_nbrs[v] != 0 {
                        return fail(format!("unseen node {v} touches the queried set"));
                    }
                }
            }
        }
        if n_queried != self.queried.len() {
            return fail("queried list and status disagree".into());
        }
        if self.queried.len() + self.border.len() > self.status.len() {
            return fail("|Q| + |B| exceeds |V|".into());
        }
        let targets = self.queried.iter().filter(|&&v| self.hidden.label(v)).count();
        if targets != self.targets_queried {
            return fail("target tally out of sync".into());
        }
        for &b in &self.border {
            if self.status[b] != NodeStatus::Border {
                return fail(format!("border list holds non-border node {b}"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::graph;
    use super::*;

    fn arc(g: HiddenGraph) -> Arc<HiddenGraph> {
        Arc::new(g)
    }

    fn sorted(mut v: Vec<NodeId>) -> Vec<NodeId> {
        v.sort_unstable();
        v
    }

    #[test]
    fn single_seed_with_three_neighbors() {
        let g = arc(graph(5, &[(0, 1), (0, 2), (0, 3), (3, 4)], &[0]));
        let s = init_state(g, &[0]).unwrap();
        assert_eq!(s.queried(), &[0]);
        assert_eq!(sorted(s.border().to_vec()), vec![1, 2, 3]);
        assert_eq!(s.step(), 1);
    }

    #[test]
    fn adjacent_seeds_share_an_observed_edge() {
        let g = arc(graph(4, &[(0, 1), (1, 2), (0, 3)], &[]));
        let s = init_state(g, &[0, 1]).unwrap();
        assert!(s.observed_edges().contains(&(0, 1)));
        assert!(!s.is_border(0) && !s.is_border(1));
        assert_eq!(sorted(s.border().to_vec()), vec![2, 3]);
    }

    #[test]
    fn isolated_seed_leaves_empty_border() {
        let g = arc(graph(3, &[(1, 2)], &[0]));
        let mut s = init_state(g, &[0]).unwrap();
        assert!(s.border().is_empty());
        assert!(matches!(s.query(1), Err(HarvestError::ExhaustedBorder)));
    }

    #[test]
    fn path_graph_query() {
        let g = arc(graph(3, &[(0, 1), (1, 2)], &[]));
        let mut s = init_state(g, &[0]).unwrap();
        let r = s.query(1).unwrap();
        assert_eq!(r.revealed_neighbors, vec![2]);
        assert_eq!(s.queried(), &[0, 1]);
        assert_eq!(s.border(), &[2]);
        assert_eq!(s.observed_edges(), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn triangle_query_reveals_both_edges_to_border_node() {
        let g = arc(graph(3, &[(0, 1), (1, 2), (0, 2)], &[]));
        let mut s = init_state(g, &[0]).unwrap();
        // before: 1 and 2 are both border; their shared edge is hidden
        assert_eq!(s.observed_edges(), vec![(0, 1), (0, 2)]);
        assert!(!s.has_observed_edge(1, 2));
        s.query(1).unwrap();
        assert_eq!(s.observed_edges(), vec![(0, 1), (0, 2), (1, 2)]);
        assert_eq!(s.observed_neighbors(2).collect::<Vec<_>>(), vec![0, 1]);
    }

    #[test]
    fn border_edges_hidden_until_endpoint_queried() {
        // star 0-{1,2}, plus hidden edge 1-2 and 2-3
        let g = arc(graph(4, &[(0, 1), (0, 2), (1, 2), (2, 3)], &[]));
        let s = init_state(g, &[0]).unwrap();
        assert_eq!(s.observed_neighbors(1).collect::<Vec<_>>(), vec![0]);
        assert_eq!(s.observed_degree(2), 1);
    }

    #[test]
    fn querying_twice_is_a_contract_violation() {
        let g = arc(graph(3, &[(0, 1), (1, 2)], &[]));
        let mut s = init_state(g, &[0]).unwrap();
        s.query(1).unwrap();
        assert!(matches!(s.query(1), Err(HarvestError::Contract(_))));
        assert!(matches!(s.query(0), Err(HarvestError::Contract(_))));
    }

    #[test]
    fn unknown_seed_rejected() {
        let g = arc(graph(2, &[(0, 1)], &[]));
        assert!(matches!(init_state(g.clone(), &[7]), Err(HarvestError::Validation(_))));
        assert!(matches!(init_state(g, &[]), Err(HarvestError::Validation(_))));
    }

    #[test]
    fn labels_visible_only_after_query() {
        let g = arc(graph(3, &[(0, 1), (1, 2)], &[1, 2]));
        let mut s = init_state(g, &[0]).unwrap();
        assert_eq!(s.label(0), Some(false));
        assert_eq!(s.label(1), None);
        s.query(1).unwrap();
        assert_eq!(s.label(1), Some(true));
        assert_eq!(s.target_neighbor_count(2), 1);
    }
}

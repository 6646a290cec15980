//! Per-border-node features computed from the observed graph.
//!
//! Layout of [`FeatureVector::to_vec`]: the eleven scalar columns named in
//! [`SCALAR_COLUMNS`], followed by one mean-attribute column per attribute.

use serde::{Deserialize, Serialize};

use crate::error::{HarvestError, Result};
use crate::graph::{NodeId, ObservedState};

pub const SCALAR_COLUMNS: [&str; 11] = [
    "observed_degree",
    "observed_triangles",
    "num_target_neighbors",
    "frac_target_neighbors",
    "num_tri_two_target",
    "frac_tri_two_target",
    "num_tri_two_nontarget",
    "frac_tri_two_nontarget",
    "num_nbrs_mostly_target",
    "frac_nbrs_mostly_target",
    "rw2_payoff",
];

/// Standard deviations below this are treated as zero when standardizing.
pub const STD_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub observed_degree: usize,
    pub observed_triangles: usize,
    pub num_target_neighbors: usize,
    pub frac_target_neighbors: f64,
    pub num_tri_two_target: usize,
    pub frac_tri_two_target: f64,
    pub num_tri_two_nontarget: usize,
    pub frac_tri_two_nontarget: f64,
    pub num_nbrs_mostly_target: usize,
    pub frac_nbrs_mostly_target: f64,
    pub rw2_payoff: f64,
    /// Mean attribute value over queried neighbors.
    pub attr_blend: Vec<f64>,
}

impl FeatureVector {
    pub fn dim(attr_dim: usize) -> usize {
        SCALAR_COLUMNS.len() + attr_dim
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(Self::dim(self.attr_blend.len()));
        out.extend_from_slice(&[
            self.observed_degree as f64,
            self.observed_triangles as f64,
            self.num_target_neighbors as f64,
            self.frac_target_neighbors,
            self.num_tri_two_target as f64,
            self.frac_tri_two_target,
            self.num_tri_two_nontarget as f64,
            self.frac_tri_two_nontarget,
            self.num_nbrs_mostly_target as f64,
            self.frac_nbrs_mostly_target,
            self.rw2_payoff,
        ]);
        out.extend_from_slice(&self.attr_blend);
        out
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn check_border(state: &ObservedState, node: NodeId) -> Result<()> {
    if node >= state.node_count() || !state.is_border(node) {
        return Err(HarvestError::Contract(format!(
            "features requested for node {node}, which is not in the border set"
        )));
    }
    Ok(())
}

/// Reusable scratch space for extracting many border nodes in one step.
#[derive(Debug, Default)]
pub struct FeatureExtractor {
    stamp: Vec<u32>,
    epoch: u32,
}

impl FeatureExtractor {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn extract(&mut self, state: &ObservedState, node: NodeId) -> Result<FeatureVector> {
        check_border(state, node)?;
        Ok(self.extract_unchecked(state, node))
    }

    /// Raw feature rows for every border node, in border order.
    pub fn border_rows(&mut self, state: &ObservedState) -> Vec<Vec<f64>> {
        state
            .border()
            .iter()
            .map(|&b| self.extract_unchecked(state, b).to_vec())
            .collect()
    }

    /// Raw feature rows for the given border nodes.
    pub fn rows(&mut self, state: &ObservedState, nodes: &[NodeId]) -> Result<Vec<Vec<f64>>> {
        nodes
            .iter()
            .map(|&v| self.extract(state, v).map(|f| f.to_vec()))
            .collect()
    }

    fn extract_unchecked(&mut self, state: &ObservedState, u: NodeId) -> FeatureVector {
        let hidden = state.hidden();
        if self.stamp.len() != state.node_count() {
            self.stamp = vec![0; state.node_count()];
            self.epoch = 0;
        }
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
        let epoch = self.epoch;

        // a border node's observed neighbors are all queried
        let nbrs: Vec<NodeId> = state.observed_neighbors(u).collect();
        for &v in &nbrs {
            self.stamp[v] = epoch;
        }

        let degree = nbrs.len();
        let mut targets = 0;
        let mut mostly = 0;
        let mut walks = 0usize;
        let mut target_walks = 0usize;
        let mut attr = vec![0.0; state.attr_dim()];
        for &v in &nbrs {
            let y = hidden.label(v);
            targets += y as usize;
            let q = state.queried_neighbor_count(v);
            let tq = state.target_neighbor_count(v);
            if 2 * tq > q {
                mostly += 1;
            }
            walks += q;
            target_walks += tq;
            for &(i, x) in hidden.attributes(v).entries() {
                attr[i as usize] += x;
            }
        }
        if degree > 0 {
            for a in &mut attr {
                *a /= degree as f64;
            }
        }

        let (mut tri, mut tri_tt, mut tri_nn) = (0, 0, 0);
        for &v in &nbrs {
            let yv = hidden.label(v);
            for &w in hidden.neighbors(v) {
                if w > v && self.stamp[w] == epoch {
                    tri += 1;
                    match (yv, hidden.label(w)) {
                        (true, true) => tri_tt += 1,
                        (false, false) => tri_nn += 1,
                        _ => {}
                    }
                }
            }
        }

        FeatureVector {
            observed_degree: degree,
            observed_triangles: tri,
            num_target_neighbors: targets,
            frac_target_neighbors: ratio(targets, degree),
            num_tri_two_target: tri_tt,
            frac_tri_two_target: ratio(tri_tt, tri),
            num_tri_two_nontarget: tri_nn,
            frac_tri_two_nontarget: ratio(tri_nn, tri),
            num_nbrs_mostly_target: mostly,
            frac_nbrs_mostly_target: ratio(mostly, degree),
            rw2_payoff: ratio(target_walks, walks),
            attr_blend: attr,
        }
    }
}

/// Feature vector of a single border node.
pub fn extract(state: &ObservedState, node: NodeId) -> Result<FeatureVector> {
    FeatureExtractor::new().extract(state, node)
}

/// Expected label reached by a two-step walk from `node` that ends in the
/// queried set, or 0 when no such walk exists.
pub fn rw2_feature(state: &ObservedState, node: NodeId) -> Result<f64> {
    check_border(state, node)?;
    let (mut walks, mut hits) = (0usize, 0usize);
    for v in state.observed_neighbors(node) {
        walks += state.queried_neighbor_count(v);
        hits += state.target_neighbor_count(v);
    }
    Ok(ratio(hits, walks))
}

/// Per-column z-score statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Standardizer {
    /// Fits population mean and standard deviation per column.
    pub fn fit(rows: &[Vec<f64>]) -> Self {
        let dim = rows.first().map_or(0, Vec::len);
        let n = rows.len().max(1) as f64;
        let mut means = vec![0.0; dim];
        for r in rows {
            for (m, x) in means.iter_mut().zip(r) {
                *m += x;
            }
        }
        means.iter_mut().for_each(|m| *m /= n);
        let mut vars = vec![0.0; dim];
        for r in rows {
            for ((v, x), m) in vars.iter_mut().zip(r).zip(&means) {
                *v += (x - m) * (x - m);
            }
        }
        let stds = vars.into_iter().map(|v| (v / n).sqrt()).collect();
        Standardizer { means, stds }
    }

    /// Centers every column; scales only columns whose std clears the floor.
    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(x, (m, s))| if *s >= STD_FLOOR { (x - m) / s } else { x - m })
            .collect()
    }
}

/// Standardized training rows and border rows for one scoring step.
#[derive(Debug, Clone)]
pub struct FeatureMatrix {
    pub standardizer: Standardizer,
    pub training: Vec<Vec<f64>>,
    /// `(border node, standardized row)` in border order.
    pub border: Vec<(NodeId, Vec<f64>)>,
}

/// Fits standardization on `training_rows` (raw features) and applies it to
/// the training rows and to every current border node.
pub fn build_matrix(state: &ObservedState, training_rows: &[Vec<f64>]) -> Result<FeatureMatrix> {
    if training_rows.is_empty() {
        return Err(HarvestError::Contract("build_matrix needs at least one training row".into()));
    }
    let dim = FeatureVector::dim(state.attr_dim());
    if let Some(bad) = training_rows.iter().find(|r| r.len() != dim) {
        return Err(HarvestError::Contract(format!(
            "training row has {} columns, expected {dim}",
            bad.len()
        )));
    }
    let standardizer = Standardizer::fit(training_rows);
    let training = training_rows.iter().map(|r| standardizer.transform(r)).collect();
    let mut ex = FeatureExtractor::new();
    let border = state
        .border()
        .iter()
        .zip(ex.border_rows(state))
        .map(|(&b, r)| (b, standardizer.transform(&r)))
        .collect();
    Ok(FeatureMatrix {
        standardizer,
        training,
        border,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::graph::fixtures::graph;
    use crate::graph::init_state;

    #[test]
    fn mixed_neighbors_no_triangles() {
        // border node 2 touches seeds 0 (target) and 1 (non-target)
        let g = Arc::new(graph(3, &[(0, 2), (1, 2)], &[0]));
        let s = init_state(g, &[0, 1]).unwrap();
        let f = extract(&s, 2).unwrap();
        assert_eq!(f.num_target_neighbors, 1);
        assert_eq!(f.frac_target_neighbors, 0.5);
        assert_eq!(f.observed_triangles, 0);
        assert_eq!(f.num_tri_two_target, 0);
        assert_eq!(f.num_tri_two_nontarget, 0);
    }

    #[test]
    fn star_of_targets_uses_zero_over_zero() {
        let g = Arc::new(graph(4, &[(0, 3), (1, 3), (2, 3)], &[0, 1, 2]));
        let s = init_state(g, &[0, 1, 2]).unwrap();
        let f = extract(&s, 3).unwrap();
        assert_eq!(f.frac_target_neighbors, 1.0);
        assert_eq!(f.observed_triangles, 0);
        assert_eq!(f.frac_tri_two_target, 0.0);
        assert_eq!(f.rw2_payoff, 0.0);
    }

    #[test]
    fn triangles_split_by_label() {
        // 4 is border, adjacent to queried 0,1,2,3; queried edges 0-1 (TT), 2-3 (NN), 1-2 (TN)
        let g = Arc::new(graph(
            5,
            &[(0, 4), (1, 4), (2, 4), (3, 4), (0, 1), (2, 3), (1, 2)],
            &[0, 1],
        ));
        let s = init_state(g, &[0, 1, 2, 3]).unwrap();
        let f = extract(&s, 4).unwrap();
        assert_eq!(f.observed_triangles, 3);
        assert_eq!(f.num_tri_two_target, 1);
        assert_eq!(f.num_tri_two_nontarget, 1);
        assert!((f.frac_tri_two_target - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rw2_two_endpoints() {
        // u=0 border; v1=1 queried; v1 - {w1=2 target, w2=3 non-target} queried
        let g = Arc::new(graph(4, &[(0, 1), (1, 2), (1, 3)], &[2]));
        let s = init_state(g, &[1, 2, 3]).unwrap();
        assert_eq!(rw2_feature(&s, 0).unwrap(), 0.5);
    }

    #[test]
    fn rw2_back_edge_not_counted() {
        // u=0 border, v=1 queried with target neighbor w=2; walk u->v->u not counted since u is not queried
        let g = Arc::new(graph(3, &[(0, 1), (1, 2)], &[2]));
        let s = init_state(g, &[1, 2]).unwrap();
        assert_eq!(rw2_feature(&s, 0).unwrap(), 1.0);
    }

    #[test]
    fn rw2_without_walks_is_zero() {
        let g = Arc::new(graph(2, &[(0, 1)], &[]));
        let s = init_state(g, &[0]).unwrap();
        assert_eq!(rw2_feature(&s, 1).unwrap(), 0.0);
    }

    #[test]
    fn mostly_target_is_strict_majority() {
        // border 0 - queried 1; 1's queried neighbors: 2 (target), 3 (non-target) -> tie, not mostly
        let g = Arc::new(graph(5, &[(0, 1), (1, 2), (1, 3), (0, 4), (4, 2)], &[2]));
        let s = init_state(g, &[1, 2, 3, 4]).unwrap();
        let f = extract(&s, 0).unwrap();
        // 4's only queried neighbor is 2 (target) -> mostly
        assert_eq!(f.num_nbrs_mostly_target, 1);
        assert_eq!(f.frac_nbrs_mostly_target, 0.5);
    }

    #[test]
    fn non_border_node_rejected() {
        let g = Arc::new(graph(3, &[(0, 1)], &[]));
        let s = init_state(g, &[0]).unwrap();
        assert!(matches!(extract(&s, 0), Err(HarvestError::Contract(_))));
        assert!(matches!(extract(&s, 2), Err(HarvestError::Contract(_))));
        assert!(matches!(rw2_feature(&s, 2), Err(HarvestError::Contract(_))));
    }

    #[test]
    fn attr_blend_is_neighbor_mean() {
        use crate::graph::{HiddenGraph, IdMap, SparseVec};
        let attrs = vec![
            SparseVec::from_dense(&[1.0, 0.0]),
            SparseVec::from_dense(&[0.0, 4.0]),
            SparseVec::default(),
        ];
        let (g, _) = HiddenGraph::from_parts(
            IdMap::sequential(3),
            [(0, 2), (1, 2)],
            vec![false; 3],
            attrs,
            2,
        )
        .unwrap();
        let s = init_state(Arc::new(g), &[0, 1]).unwrap();
        assert_eq!(extract(&s, 2).unwrap().attr_blend, vec![0.5, 2.0]);
    }

    #[test]
    fn standardize_single_row_is_centered_only() {
        let st = Standardizer::fit(&[vec![3.0, -1.0]]);
        assert_eq!(st.transform(&[3.0, -1.0]), vec![0.0, 0.0]);
        assert_eq!(st.transform(&[4.0, 1.0]), vec![1.0, 2.0]);
    }

    #[test]
    fn standardize_two_rows_to_unit() {
        let st = Standardizer::fit(&[vec![0.0], vec![2.0]]);
        assert_eq!(st.transform(&[0.0]), vec![-1.0]);
        assert_eq!(st.transform(&[2.0]), vec![1.0]);
    }

    #[test]
    fn build_matrix_checks_dimension() {
        let g = Arc::new(graph(3, &[(0, 1), (1, 2)], &[]));
        let s = init_state(g, &[0]).unwrap();
        assert!(build_matrix(&s, &[]).is_err());
        assert!(build_matrix(&s, &[vec![1.0]]).is_err());
        let m = build_matrix(&s, &[vec![0.0; 11], vec![1.0; 11]]).unwrap();
        assert_eq!(m.border.len(), 1);
        assert_eq!(m.border[0].0, 1);
    }
}

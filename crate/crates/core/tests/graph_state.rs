mod common;

use std::path::PathBuf;
use std::sync::Arc;

use harvest_core::features::extract;
use harvest_core::graph::{init_state, load_graph, IdMap, NodeStatus, SparseVec};
use harvest_core::{HarvestError, HiddenGraph, ObservedState};
use proptest::prelude::*;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/six").join(name)
}

fn arb_graph() -> impl Strategy<Value = (HiddenGraph, Vec<usize>, Vec<usize>)> {
    (3usize..25).prop_flat_map(|n| {
        let edges = prop::collection::vec((0..n, 0..n), 0..n * 3);
        let labels = prop::collection::vec(any::<bool>(), n);
        let seeds = prop::collection::vec(0..n, 1..3);
        let picks = prop::collection::vec(any::<usize>(), 0..n);
        (Just(n), edges, labels, seeds, picks)
    })
    .prop_map(|(n, edges, labels, mut seeds, picks)| {
        let edges: Vec<_> = edges.into_iter().filter(|(u, v)| u != v).collect();
        seeds.sort();
        seeds.dedup();
        let attrs = vec![SparseVec::default(); n];
        let g = HiddenGraph::from_parts(IdMap::sequential(n), edges, labels, attrs, 0).unwrap().0;
        (g, seeds, picks)
    })
}

/// Applies `picks` as border indices until the border empties.
fn drive(g: Arc<HiddenGraph>, seeds: &[usize], picks: &[usize]) -> (ObservedState, Vec<usize>) {
    let mut s = init_state(g, seeds).unwrap();
    let mut queries = Vec::new();
    for &p in picks {
        if s.border().is_empty() {
            break;
        }
        let v = s.border()[p % s.border().len()];
        s.query(v).unwrap();
        queries.push(v);
        s.validate().unwrap();
    }
    (s, queries)
}

proptest! {
    #[test]
    fn state_invariants_hold_after_every_query((g, seeds, picks) in arb_graph()) {
        let g = Arc::new(g);
        let (s, _) = drive(g.clone(), &seeds, &picks);
        let n = g.node_count();
        prop_assert!(s.queried().len() + s.border().len() <= n);
        let found = s.queried().iter().filter(|&&v| g.label(v)).count();
        prop_assert_eq!(found, s.targets_queried());
        prop_assert!(found <= g.target_count());
        for v in 0..n {
            let touches = g.neighbors(v).iter().any(|&u| s.is_queried(u));
            let expected = if s.is_queried(v) {
                NodeStatus::Queried
            } else if touches {
                NodeStatus::Border
            } else {
                NodeStatus::Unseen
            };
            prop_assert_eq!(s.status(v), expected);
        }
        // no border-border edges in the observed graph
        for (u, v) in s.observed_edges() {
            prop_assert!(s.is_queried(u) || s.is_queried(v));
        }
    }

    #[test]
    fn replaying_the_query_list_rebuilds_the_state((g, seeds, picks) in arb_graph()) {
        let g = Arc::new(g);
        let (s, queries) = drive(g.clone(), &seeds, &picks);
        let r = ObservedState::replay(g.clone(), &seeds, &queries).unwrap();
        prop_assert_eq!(s.queried(), r.queried());
        prop_assert_eq!(s.border(), r.border());
        prop_assert_eq!(s.observed_edges(), r.observed_edges());
        for v in 0..g.node_count() {
            prop_assert_eq!(s.status(v), r.status(v));
            prop_assert_eq!(s.target_neighbor_count(v), r.target_neighbor_count(v));
        }
    }

    #[test]
    fn querying_outside_the_border_is_rejected((g, seeds, picks) in arb_graph()) {
        let g = Arc::new(g);
        let (mut s, _) = drive(g.clone(), &seeds, &picks);
        for v in 0..g.node_count() {
            if !s.is_border(v) {
                prop_assert!(s.query(v).is_err());
            }
        }
    }
}

#[test]
fn six_node_fixture_loads_and_crawls() {
    let (g, report) = load_graph(&fixture("edges.tsv"), &fixture("labels.tsv"), Some(&fixture("attrs.tsv"))).unwrap();
    assert_eq!(g.node_count(), 6);
    assert_eq!(g.edge_count(), 6);
    assert_eq!(g.target_count(), 4);
    assert_eq!(g.attr_dim(), 2);
    assert_eq!(report.isolated, 0);
    let id = |s: &str| g.ids().get(s).unwrap();
    let (a, b, c, d) = (id("a"), id("b"), id("c"), id("d"));
    let g = Arc::new(g);

    let mut s = init_state(g.clone(), &[a]).unwrap();
    let mut border = s.border().to_vec();
    border.sort();
    assert_eq!(border, vec![b, c]);
    let fb = extract(&s, b).unwrap();
    assert_eq!((fb.observed_degree, fb.num_target_neighbors, fb.num_nbrs_mostly_target), (1, 1, 0));
    assert_eq!(fb.rw2_payoff, 0.0);

    s.query(c).unwrap();
    let fb = extract(&s, b).unwrap();
    assert_eq!(fb.observed_degree, 2);
    assert_eq!(fb.observed_triangles, 1);
    assert_eq!(fb.num_target_neighbors, 1);
    assert_eq!(fb.frac_target_neighbors, 0.5);
    assert_eq!((fb.num_tri_two_target, fb.num_tri_two_nontarget), (0, 0));
    assert_eq!(fb.num_nbrs_mostly_target, 1);
    assert_eq!(fb.frac_nbrs_mostly_target, 0.5);
    assert_eq!(fb.rw2_payoff, 0.5);
    assert_eq!(fb.attr_blend, vec![0.75, 0.5]);
    let fd = extract(&s, d).unwrap();
    assert_eq!((fd.observed_degree, fd.num_target_neighbors, fd.num_nbrs_mostly_target), (1, 0, 1));
    assert_eq!(fd.rw2_payoff, 1.0);
    assert_eq!(fd.attr_blend, vec![0.5, 1.0]);

    assert!(matches!(extract(&s, a), Err(HarvestError::Contract(_))));
}

#[test]
fn fixture_features_match_dense_oracle() {
    let (g, _) = load_graph(&fixture("edges.tsv"), &fixture("labels.tsv"), Some(&fixture("attrs.tsv"))).unwrap();
    let g = Arc::new(g);
    for seed in 0..6 {
        let (s, _) = drive(g.clone(), &[seed], &[0, 1, 0]);
        for &u in s.border() {
            assert_eq!(extract(&s, u).unwrap().to_vec(), common::dense_features(&s, u));
        }
    }
}

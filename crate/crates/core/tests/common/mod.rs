//! Independent reference implementations used by the integration and
//! acceptance tests. Everything here works on dense matrices rebuilt from
//! the hidden graph and node statuses, never on the library's incremental
//! bookkeeping.
#![allow(dead_code)]

use std::sync::Arc;

use harvest_core::graph::{init_state, IdMap, SparseVec};
use harvest_core::{HiddenGraph, NodeId, ObservedState};
use nalgebra::{DMatrix, DVector};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Erdős–Rényi graph with random labels and dense random attributes.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64, attr_dim: usize) -> HiddenGraph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    let labels: Vec<bool> = (0..n).map(|_| rng.random::<f64>() < 0.4).collect();
    let attrs: Vec<SparseVec> = (0..n)
        .map(|_| {
            let dense: Vec<f64> = (0..attr_dim)
                .map(|_| if rng.random::<f64>() < 0.5 { 0.0 } else { rng.random_range(-2.0..2.0) })
                .collect();
            SparseVec::from_dense(&dense)
        })
        .collect();
    HiddenGraph::from_parts(IdMap::sequential(n), edges, labels, attrs, attr_dim)
        .unwrap()
        .0
}

/// Random observed state: a few seeds, then uniformly random border queries.
pub fn random_state(rng: &mut ChaCha8Rng, max_nodes: usize, attr_dim: usize) -> ObservedState {
    loop {
        let n = rng.random_range(3..=max_nodes);
        let p = rng.random_range(0.05..0.4);
        let g = Arc::new(random_graph(rng, n, p, attr_dim));
        let seed_count = rng.random_range(1..=3.min(n));
        let mut nodes: Vec<NodeId> = (0..n).collect();
        let mut seeds = Vec::new();
        for _ in 0..seed_count {
            let i = rng.random_range(0..nodes.len());
            seeds.push(nodes.swap_remove(i));
        }
        let mut s = init_state(g, &seeds).unwrap();
        let queries = rng.random_range(0..n);
        for _ in 0..queries {
            let Some(&v) = s.border().choose(rng) else { break };
            s.query(v).unwrap();
        }
        if !s.border().is_empty() {
            return s;
        }
    }
}

/// Dense adjacency of the observed graph: hidden edges with at least one
/// queried endpoint.
pub fn observed_adjacency(s: &ObservedState) -> Vec<Vec<bool>> {
    let g = s.hidden();
    let n = g.node_count();
    let mut a = vec![vec![false; n]; n];
    for u in 0..n {
        for v in 0..n {
            a[u][v] = u != v && g.has_edge(u, v) && (s.is_queried(u) || s.is_queried(v));
        }
    }
    a
}

fn frac(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Feature row of border node `u`, by brute force over the dense observed
/// adjacency, in the library's column order.
pub fn dense_features(s: &ObservedState, u: NodeId) -> Vec<f64> {
    let g = s.hidden();
    let a = observed_adjacency(s);
    let n = g.node_count();
    let known = |v: usize| s.is_queried(v);
    let y = |v: usize| g.label(v);
    let nbrs: Vec<usize> = (0..n).filter(|&v| a[u][v]).collect();
    let deg = nbrs.len();
    let targets = nbrs.iter().filter(|&&v| y(v)).count();
    let (mut tri, mut tt, mut nn) = (0, 0, 0);
    for (i, &v) in nbrs.iter().enumerate() {
        for &w in &nbrs[i + 1..] {
            if a[v][w] {
                tri += 1;
                if y(v) && y(w) {
                    tt += 1;
                }
                if !y(v) && !y(w) {
                    nn += 1;
                }
            }
        }
    }
    let mut mostly = 0;
    for &v in &nbrs {
        let q = (0..n).filter(|&w| a[v][w] && known(w)).count();
        let tq = (0..n).filter(|&w| a[v][w] && known(w) && y(w)).count();
        if 2 * tq > q {
            mostly += 1;
        }
    }
    let mut row = vec![
        deg as f64,
        tri as f64,
        targets as f64,
        frac(targets, deg),
        tt as f64,
        frac(tt, tri),
        nn as f64,
        frac(nn, tri),
        mostly as f64,
        frac(mostly, deg),
        rw2_enumerated(s, u),
    ];
    let dim = g.attr_dim();
    let mut attr = vec![0.0; dim];
    for &v in &nbrs {
        for (k, x) in g.attributes(v).to_dense(dim).into_iter().enumerate() {
            attr[k] += x;
        }
    }
    if deg > 0 {
        for x in &mut attr {
            *x /= deg as f64;
        }
    }
    row.extend(attr);
    row
}

/// Enumerates every walk `u -> v -> w` in the observed graph with `w`
/// queried and averages `y_w`.
pub fn rw2_enumerated(s: &ObservedState, u: NodeId) -> f64 {
    let a = observed_adjacency(s);
    let n = a.len();
    let (mut walks, mut hits) = (0usize, 0usize);
    for v in 0..n {
        if !a[u][v] {
            continue;
        }
        for w in 0..n {
            if a[v][w] && s.is_queried(w) {
                walks += 1;
                hits += s.hidden().label(w) as usize;
            }
        }
    }
    frac(hits, walks)
}

/// Fixed point of observed-graph label propagation, by a direct linear
/// solve. Returns `(node, value)` for every node of the observed graph.
pub fn propagation_linear_solve(s: &ObservedState, w0: f64) -> Vec<(NodeId, f64)> {
    let a = observed_adjacency(s);
    let nodes: Vec<NodeId> = s.queried().iter().chain(s.border()).copied().collect();
    let index = |v: NodeId| nodes.iter().position(|&x| x == v).unwrap();
    let m = nodes.len();
    let mut mat = DMatrix::<f64>::zeros(m, m);
    let mut rhs = DVector::<f64>::zeros(m);
    for (i, &v) in nodes.iter().enumerate() {
        let deg = (0..a.len()).filter(|&u| a[v][u]).count() as f64;
        let anchor = if s.is_queried(v) { w0 } else { 0.0 };
        mat[(i, i)] = deg + anchor;
        for u in 0..a.len() {
            if a[v][u] {
                mat[(i, index(u))] -= 1.0;
            }
        }
        if s.is_queried(v) && s.hidden().label(v) {
            rhs[i] = w0;
        }
    }
    let sol = mat.lu().solve(&rhs).expect("propagation system is nonsingular");
    nodes.iter().enumerate().map(|(i, &v)| (v, sol[i])).collect()
}

/// Minimizer of `Σ β^(t-i) (y_i - x_iᵀw)² + β^t λ ‖w‖²` over the first `t` rows.
pub fn ewls_closed_form(xs: &[Vec<f64>], ys: &[f64], beta: f64, lambda: f64) -> Vec<f64> {
    let t = xs.len();
    let d = xs[0].len();
    let mut a = DMatrix::<f64>::identity(d, d) * (beta.powi(t as i32) * lambda);
    let mut b = DVector::<f64>::zeros(d);
    for (i, (x, &y)) in xs.iter().zip(ys).enumerate() {
        let wgt = beta.powi((t - 1 - i) as i32);
        let xv = DVector::from_column_slice(x);
        a += &xv * xv.transpose() * wgt;
        b += xv * (y * wgt);
    }
    a.cholesky().expect("positive definite").solve(&b).iter().copied().collect()
}

/// Central-difference gradient of `f` at `w`.
pub fn numeric_gradient(f: impl Fn(&[f64]) -> f64, w: &[f64], h: f64) -> Vec<f64> {
    (0..w.len())
        .map(|j| {
            let mut p = w.to_vec();
            let mut m = w.to_vec();
            p[j] += h;
            m[j] -= h;
            (f(&p) - f(&m)) / (2.0 * h)
        })
        .collect()
}

/// `‖a − b‖ / max(‖a‖, ‖b‖)`, or the absolute norm when both are tiny.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let scale = norm(a).max(norm(b));
    if scale < 1e-8 {
        norm(&diff)
    } else {
        norm(&diff) / scale
    }
}

/// Best Gini split over every feature and midpoint threshold: `(feature, gain)`.
pub fn best_gini_split(rows: &[Vec<f64>], labels: &[bool]) -> (usize, f64) {
    let gini = |pos: usize, n: usize| {
        if n == 0 {
            0.0
        } else {
            let p = pos as f64 / n as f64;
            2.0 * p * (1.0 - p)
        }
    };
    let n = rows.len();
    let total_pos = labels.iter().filter(|&&y| y).count();
    let parent = gini(total_pos, n);
    let mut best = (usize::MAX, f64::NEG_INFINITY);
    for f in 0..rows[0].len() {
        let mut vals: Vec<f64> = rows.iter().map(|r| r[f]).collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        for pair in vals.windows(2) {
            let thr = 0.5 * (pair[0] + pair[1]);
            let (mut nl, mut pl) = (0, 0);
            for (r, &y) in rows.iter().zip(labels) {
                if r[f] <= thr {
                    nl += 1;
                    pl += y as usize;
                }
            }
            let nr = n - nl;
            let pr = total_pos - pl;
            let child = (nl as f64 * gini(pl, nl) + nr as f64 * gini(pr, nr)) / n as f64;
            let gain = parent - child;
            if gain > best.1 + 1e-12 {
                best = (f, gain);
            }
        }
    }
    best
}

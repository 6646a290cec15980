//! Random forest of CART trees grown with the Gini criterion.

use rand::Rng;
use rayon::prelude::*;

use super::BatchLearner;
use crate::rng::{derive_seed, seeded, RunRng};

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Candidate features per split; 0 means `floor(sqrt(p))`.
    pub mtry: usize,
    pub min_split: usize,
    pub max_depth: usize,
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            mtry: 0,
            min_split: 2,
            max_depth: 32,
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    /// Fraction of positive training examples in the leaf.
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    /// Leaf positive fraction reached by `x`.
    pub fn leaf_value(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                TreeNode::Leaf(p) => return p,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    /// 1 for a majority-target leaf, 0 for majority non-target, 1/2 on a tie.
    pub fn vote(&self, x: &[f64]) -> f64 {
        let p = self.leaf_value(x);
        if p > 0.5 {
            1.0
        } else if p < 0.5 {
            0.0
        } else {
            0.5
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    trees: Vec<Tree>,
}

impl Forest {
    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }
}

fn gini(pos: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = pos as f64 / n as f64;
    2.0 * p * (1.0 - p)
}

struct Grower<'a> {
    rows: &'a [Vec<f64>],
    labels: &'a [bool],
    params: &'a ForestParams,
    mtry: usize,
    nodes: Vec<TreeNode>,
}

impl Grower<'_> {
    fn grow(&mut self, samples: &mut [usize], depth: usize, rng: &mut RunRng) -> usize {
        let id = self.nodes.len();
        let n = samples.len();
        let pos = samples.iter().filter(|&&i| self.labels[i]).count();
        self.nodes.push(TreeNode::Leaf(pos as f64 / n.max(1) as f64));
        if pos == 0 || pos == n || n < self.params.min_split || depth >= self.params.max_depth {
            return id;
        }

        let p = self.rows[0].len();
        let mut features: Vec<usize> = (0..p).collect();
        for k in 0..self.mtry {
            let j = rng.random_range(k..p);
            features.swap(k, j);
        }

        // (weighted child impurity, feature, threshold)
        let mut best: Option<(f64, usize, f64)> = None;
        let mut sorted = samples.to_vec();
        for &f in &features[..self.mtry] {
            sorted.sort_by(|&a, &b| self.rows[a][f].total_cmp(&self.rows[b][f]));
            let mut left_pos = 0;
            for split in 1..n {
                left_pos += self.labels[sorted[split - 1]] as usize;
                let lo = self.rows[sorted[split - 1]][f];
                let hi = self.rows[sorted[split]][f];
                if lo == hi {
                    continue;
                }
                let impurity = (split as f64 * gini(left_pos, split)
                    + (n - split) as f64 * gini(pos - left_pos, n - split))
                    / n as f64;
                if best.is_none_or(|(b, _, _)| impurity < b) {
                    let mut threshold = lo + (hi - lo) / 2.0;
                    if threshold >= hi {
                        threshold = lo;
                    }
                    best = Some((impurity, f, threshold));
                }
            }
        }
        let Some((_, feature, threshold)) = best else {
            return id;
        };

        let mut cut = 0;
        for i in 0..n {
            if self.rows[samples[i]][feature] <= threshold {
                samples.swap(i, cut);
                cut += 1;
            }
        }
        let (left_s, right_s) = samples.split_at_mut(cut);
        let left = self.grow(left_s, depth + 1, rng);
        let right = self.grow(right_s, depth + 1, rng);
        self.nodes[id] = TreeNode::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }
}

fn grow_tree(rows: &[Vec<f64>], labels: &[bool], params: &ForestParams, mtry: usize, seed: u64) -> Tree {
    let mut rng = seeded(seed);
    let n = rows.len();
    let mut samples: Vec<usize> = if params.bootstrap {
        (0..n).map(|_| rng.random_range(0..n)).collect()
    } else {
        (0..n).collect()
    };
    let mut g = Grower {
        rows,
        labels,
        params,
        mtry,
        nodes: Vec::new(),
    };
    g.grow(&mut samples, 0, &mut rng);
    Tree { nodes: g.nodes }
}

/// Fits a forest. Each tree's randomness comes from `derive_seed(seed, tree)`,
/// so trees can be grown in parallel with bit-identical results.
pub fn rf_fit(rows: &[Vec<f64>], labels: &[bool], params: &ForestParams, seed: u64) -> Forest {
    let n = rows.len();
    let pos = labels.iter().filter(|&&y| y).count();
    if n == 0 || n < params.min_split.max(1) {
        let rate = if n == 0 { 0.0 } else { pos as f64 / n as f64 };
        return Forest {
            trees: vec![Tree {
                nodes: vec![TreeNode::Leaf(rate)],
            }],
        };
    }
    let p = rows[0].len();
    let mtry = if params.mtry == 0 {
        ((p as f64).sqrt().floor() as usize).max(1)
    } else {
        params.mtry.min(p)
    };
    let trees = (0..params.n_trees.max(1))
        .into_par_iter()
        .map(|t| grow_tree(rows, labels, params, mtry, derive_seed(seed, t as u64)))
        .collect();
    Forest { trees }
}

/// Fraction of trees voting "target". A single-leaf forest (too little
/// data) returns the class rate.
pub fn rf_score(forest: &Forest, x: &[f64]) -> f64 {
    if let [only] = forest.trees.as_slice() {
        if let TreeNode::Leaf(rate) = only.root() {
            return *rate;
        }
    }
    forest.trees.iter().map(|t| t.vote(x)).sum::<f64>() / forest.trees.len() as f64
}

/// Batch adapter.
#[derive(Debug, Clone)]
pub struct RandomForest {
    pub params: ForestParams,
}

impl BatchLearner for RandomForest {
    type Model = Forest;

    fn name(&self) -> &'static str {
        "RandomForest"
    }

    fn fit(&self, rows: &[Vec<f64>], labels: &[bool], seed: u64) -> (Forest, Option<String>) {
        let flag = (rows.len() < self.params.min_split).then(|| "too few observations, class-rate leaf".to_string());
        (rf_fit(rows, labels, &self.params, seed), flag)
    }

    fn predict(&self, model: &Forest, row: &[f64]) -> f64 {
        rf_score(model, row)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_data_scores_its_class() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, (i * i) as f64]).collect();
        let f = rf_fit(&rows, &[true; 10], &ForestParams::default(), 1);
        for x in [[-5.0, 3.0], [100.0, 0.0]] {
            assert_eq!(rf_score(&f, &x), 1.0);
        }
        let f = rf_fit(&rows, &[false; 10], &ForestParams::default(), 1);
        assert_eq!(rf_score(&f, &[4.0, 4.0]), 0.0);
    }

    #[test]
    fn too_few_rows_give_class_rate() {
        let params = ForestParams {
            min_split: 5,
            ..Default::default()
        };
        let rows = vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]];
        let f = rf_fit(&rows, &[true, false, false, false], &params, 0);
        assert_eq!(rf_score(&f, &[1.0]), 0.25);
    }

    #[test]
    fn same_seed_same_forest() {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![(i as f64).sin(), (i as f64 * 0.3).cos()]).collect();
        let labels: Vec<bool> = (0..40).map(|i| i % 3 == 0).collect();
        let a = rf_fit(&rows, &labels, &ForestParams::default(), 9);
        let b = rf_fit(&rows, &labels, &ForestParams::default(), 9);
        assert_eq!(a, b);
    }

    #[test]
    fn depth_limit_respected() {
        let rows: Vec<Vec<f64>> = (0..64).map(|i| vec![i as f64]).collect();
        let labels: Vec<bool> = (0..64).map(|i| i % 2 == 0).collect();
        let params = ForestParams {
            n_trees: 1,
            max_depth: 1,
            bootstrap: false,
            ..Default::default()
        };
        let f = rf_fit(&rows, &labels, &params, 0);
        assert!(f.trees()[0].nodes().len() <= 3);
    }
}

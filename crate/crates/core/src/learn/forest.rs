//! Random forest of CART trees.
//!
//! Each tree fits a bootstrap resample with Gini-impurity splits over
//! sqrt(d) randomly sampled candidate features per node, grown until pure or
//! until no valid split remains. Per-tree RNGs derive from (seed, tree
//! index), so serial and any parallel schedule produce identical forests.
//! The forest probability is the exact fraction of trees voting KID, and
//! out-of-bag accuracy is measured during training as a free diagnostic.

use super::{LabeledMatrix, LearnError};
use crate::seed::substream;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub min_leaf: usize,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 200,
            min_leaf: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Leaf {
        counts: [u64; 2],
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Flat arena representation; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn leaf_counts(&self, x: &[f64]) -> [u64; 2] {
        let mut i = 0usize;
        loop {
            match &self.nodes[i] {
                TreeNode::Leaf { counts } => return *counts,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    /// Majority class at the reached leaf; ties go to ADULT.
    pub fn vote(&self, x: &[f64]) -> usize {
        let c = self.leaf_counts(x);
        usize::from(c[1] > c[0])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForestModel {
    pub trees: Vec<Tree>,
    pub n_features: usize,
    pub min_leaf: usize,
    /// Candidate-feature rule at each node.
    pub max_features: String,
    pub seed: u64,
    /// Accuracy on out-of-bag votes, when any sample was left out.
    pub oob_accuracy: Option<f64>,
}

impl RandomForestModel {
    /// Fraction of trees voting KID, exactly.
    pub fn p_kid(&self, x: &[f64]) -> f64 {
        let votes: usize = self.trees.iter().map(|t| t.vote(x)).sum();
        votes as f64 / self.trees.len() as f64
    }
}

fn gini(counts: [u64; 2]) -> f64 {
    let n = (counts[0] + counts[1]) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let p = counts[1] as f64 / n;
    2.0 * p * (1.0 - p)
}

struct SplitChoice {
    feature: usize,
    threshold: f64,
    left_rows: Vec<usize>,
    right_rows: Vec<usize>,
}

fn best_split(
    data: &LabeledMatrix,
    rows: &[usize],
    candidates: &[usize],
    min_leaf: usize,
) -> Option<SplitChoice> {
    let n = rows.len() as f64;
    let mut best: Option<(f64, usize, f64)> = None; // (weighted gini, feature, threshold)

    for &f in candidates {
        let mut vals: Vec<(f64, usize)> = rows
            .iter()
            .map(|&r| (data.features[r][f], data.labels[r]))
            .collect();
        vals.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

        let total: [u64; 2] = vals.iter().fold([0, 0], |mut acc, &(_, l)| {
            acc[l] += 1;
            acc
        });
        let mut left = [0u64; 2];
        for i in 0..vals.len() - 1 {
            left[vals[i].1] += 1;
            if vals[i].0 == vals[i + 1].0 {
                continue;
            }
            let left_n = i + 1;
            let right_n = vals.len() - left_n;
            if left_n < min_leaf || right_n < min_leaf {
                continue;
            }
            let right = [total[0] - left[0], total[1] - left[1]];
            let weighted =
                (left_n as f64 * gini(left) + right_n as f64 * gini(right)) / n;
            let threshold = 0.5 * (vals[i].0 + vals[i + 1].0);
            if best.map_or(true, |(bw, _, _)| weighted < bw) {
                best = Some((weighted, f, threshold));
            }
        }
    }

    best.map(|(_, feature, threshold)| {
        let (mut left_rows, mut right_rows) = (Vec::new(), Vec::new());
        for &r in rows {
            if data.features[r][feature] <= threshold {
                left_rows.push(r);
            } else {
                right_rows.push(r);
            }
        }
        SplitChoice {
            feature,
            threshold,
            left_rows,
            right_rows,
        }
    })
}

fn grow_tree(
    data: &LabeledMatrix,
    bootstrap: Vec<usize>,
    min_leaf: usize,
    rng: &mut impl Rng,
) -> Tree {
    let d = data.dim();
    let k = ((d as f64).sqrt().floor() as usize).clamp(1, d);
    let mut nodes: Vec<TreeNode> = vec![TreeNode::Leaf { counts: [0, 0] }];
    let mut stack: Vec<(usize, Vec<usize>)> = vec![(0, bootstrap)];

    while let Some((slot, rows)) = stack.pop() {
        let counts: [u64; 2] = rows.iter().fold([0, 0], |mut acc, &r| {
            acc[data.labels[r]] += 1;
            acc
        });
        let pure = counts[0] == 0 || counts[1] == 0;
        let splittable = !pure && rows.len() >= 2 * min_leaf.max(1);
        let choice = if splittable {
            let candidates = rand::seq::index::sample(rng, d, k).into_vec();
            best_split(data, &rows, &candidates, min_leaf.max(1))
        } else {
            None
        };
        match choice {
            Some(split) => {
                let left = nodes.len();
                nodes.push(TreeNode::Leaf { counts: [0, 0] });
                let right = nodes.len();
                nodes.push(TreeNode::Leaf { counts: [0, 0] });
                nodes[slot] = TreeNode::Split {
                    feature: split.feature,
                    threshold: split.threshold,
                    left,
                    right,
                };
                stack.push((left, split.left_rows));
                stack.push((right, split.right_rows));
            }
            None => {
                nodes[slot] = TreeNode::Leaf { counts };
            }
        }
    }
    Tree { nodes }
}

/// Train a forest. Requires both classes in the training data.
pub fn train_random_forest(
    train: &LabeledMatrix,
    cfg: &ForestConfig,
    seed: u64,
) -> Result<RandomForestModel, LearnError> {
    if train.n() < 2 || !train.both_classes_present() {
        return Err(LearnError::SingleClassData);
    }
    let n = train.n();
    let mut trees = Vec::with_capacity(cfg.n_trees);
    let mut oob_votes = vec![[0u64; 2]; n];

    for t in 0..cfg.n_trees {
        let mut rng = substream(seed, "tree", t as u64);
        let mut in_bag = vec![false; n];
        let bootstrap: Vec<usize> = (0..n)
            .map(|_| {
                let i = rng.gen_range(0..n);
                in_bag[i] = true;
                i
            })
            .collect();
        let tree = grow_tree(train, bootstrap, cfg.min_leaf, &mut rng);
        for (i, bagged) in in_bag.iter().enumerate() {
            if !bagged {
                oob_votes[i][tree.vote(&train.features[i])] += 1;
            }
        }
        trees.push(tree);
    }

    let mut counted = 0usize;
    let mut correct = 0usize;
    for (votes, &label) in oob_votes.iter().zip(&train.labels) {
        if votes[0] + votes[1] == 0 {
            continue;
        }
        counted += 1;
        let pred = usize::from(votes[1] > votes[0]);
        if pred == label {
            correct += 1;
        }
    }
    let oob_accuracy = (counted > 0).then(|| correct as f64 / counted as f64);

    Ok(RandomForestModel {
        trees,
        n_features: train.dim(),
        min_leaf: cfg.min_leaf,
        max_features: "sqrt".to_string(),
        seed,
        oob_accuracy,
    })
}

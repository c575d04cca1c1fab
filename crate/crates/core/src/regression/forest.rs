//! Random-forest regression: bootstrap-resampled CART trees grown to purity
//! with variance-reduction splits over a random feature subset per node.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::check_xy;
use crate::config::ForestParams;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TreeNode {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Flat node array; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<TreeNode>,
}

impl RegressionTree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                TreeNode::Leaf { value } => return value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, TreeNode::Leaf { .. }))
            .count()
    }
}

struct Split {
    feature: usize,
    threshold: f64,
    sse: f64,
    left: Vec<usize>,
    right: Vec<usize>,
}

fn mean_of(y: &[f64], idx: &[usize]) -> f64 {
    idx.iter().map(|&i| y[i]).sum::<f64>() / idx.len() as f64
}

/// Lowest-SSE split of `idx` on `feature`, if the feature is not constant.
fn best_split_on(x: &[Vec<f64>], y: &[f64], idx: &[usize], feature: usize) -> Option<Split> {
    let mut order: Vec<usize> = idx.to_vec();
    order.sort_by(|&a, &b| x[a][feature].total_cmp(&x[b][feature]).then(a.cmp(&b)));
    let n = order.len();
    let total: f64 = order.iter().map(|&i| y[i]).sum();
    let total_sq: f64 = order.iter().map(|&i| y[i] * y[i]).sum();
    let (mut s, mut sq) = (0.0, 0.0);
    let mut best: Option<(usize, f64)> = None;
    for k in 1..n {
        let yi = y[order[k - 1]];
        s += yi;
        sq += yi * yi;
        let (a, b) = (x[order[k - 1]][feature], x[order[k]][feature]);
        if a == b {
            continue;
        }
        let (nl, nr) = (k as f64, (n - k) as f64);
        let sse = (sq - s * s / nl) + ((total_sq - sq) - (total - s).powi(2) / nr);
        if best.is_none_or(|(_, bs)| sse < bs) {
            best = Some((k, sse));
        }
    }
    let (k, sse) = best?;
    let (a, b) = (x[order[k - 1]][feature], x[order[k]][feature]);
    let mid = 0.5 * (a + b);
    let threshold = if mid < b { mid } else { a };
    let mut left = order[..k].to_vec();
    let mut right = order[k..].to_vec();
    left.sort_unstable();
    right.sort_unstable();
    Some(Split {
        feature,
        threshold,
        sse,
        left,
        right,
    })
}

/// Grows one tree on the rows `idx` (duplicates allowed) until every leaf
/// holds a single distinct target or cannot be split further.
pub fn fit_tree<R: Rng>(
    x: &[Vec<f64>],
    y: &[f64],
    idx: Vec<usize>,
    max_features: usize,
    rng: &mut R,
) -> RegressionTree {
    let d = x.first().map_or(0, Vec::len);
    let mut nodes = vec![TreeNode::Leaf { value: 0.0 }];
    let mut stack = vec![(0usize, idx)];
    let mut features: Vec<usize> = (0..d).collect();
    while let Some((slot, rows)) = stack.pop() {
        let value = mean_of(y, &rows);
        let pure = rows.iter().all(|&i| y[i] == y[rows[0]]);
        if rows.len() <= 1 || pure {
            nodes[slot] = TreeNode::Leaf { value };
            continue;
        }
        features.shuffle(rng);
        let mut best: Option<Split> = None;
        // keep drawing past `max_features` only while no candidate split exists
        for (tried, &f) in features.iter().enumerate() {
            if tried >= max_features && best.is_some() {
                break;
            }
            if let Some(s) = best_split_on(x, y, &rows, f) {
                if best.as_ref().is_none_or(|b| s.sse < b.sse) {
                    best = Some(s);
                }
            }
        }
        match best {
            None => nodes[slot] = TreeNode::Leaf { value },
            Some(s) => {
                let left = nodes.len();
                nodes.push(TreeNode::Leaf { value: 0.0 });
                nodes.push(TreeNode::Leaf { value: 0.0 });
                nodes[slot] = TreeNode::Split {
                    feature: s.feature,
                    threshold: s.threshold,
                    left,
                    right: left + 1,
                };
                stack.push((left + 1, s.right));
                stack.push((left, s.left));
            }
        }
    }
    RegressionTree { nodes }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<RegressionTree>,
    pub seed: u64,
    pub n_features: usize,
}

/// Per-tree generator: stream `tree` of the forest seed.
fn tree_rng(seed: u64, tree: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tree as u64);
    rng
}

impl ForestModel {
    pub fn fit(x: &[Vec<f64>], y: &[f64], params: &ForestParams) -> Result<Self> {
        let d = check_xy(x, y)?;
        let n = x.len();
        let max_features = params
            .max_features
            .unwrap_or_else(|| d.div_ceil(3))
            .clamp(1, d.max(1));
        let trees = (0..params.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = tree_rng(params.seed, t);
                let rows: Vec<usize> = if params.bootstrap {
                    (0..n).map(|_| rng.random_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                fit_tree(x, y, rows, max_features, &mut rng)
            })
            .collect();
        Ok(Self {
            trees,
            seed: params.seed,
            n_features: d,
        })
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict(x)).sum::<f64>() / self.trees.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_tree_exact_split() {
        let x = vec![vec![0.0], vec![0.0], vec![1.0], vec![1.0]];
        let y = [1.0, 1.0, 5.0, 5.0];
        let params = ForestParams {
            n_trees: 1,
            bootstrap: false,
            ..ForestParams::default()
        };
        let f = ForestModel::fit(&x, &y, &params).unwrap();
        assert_eq!(f.predict(&[0.0]), 1.0);
        assert_eq!(f.predict(&[1.0]), 5.0);
        assert_eq!(f.trees[0].leaf_count(), 2);
    }

    #[test]
    fn constant_targets() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, (i * i) as f64]).collect();
        let f = ForestModel::fit(&x, &[7.0; 10], &ForestParams::default()).unwrap();
        assert_eq!(f.trees.len(), 40);
        assert!(x.iter().all(|r| f.predict(r) == 7.0));
        assert_eq!(f.predict(&[100.0, -3.0]), 7.0);
    }
}

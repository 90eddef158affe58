//! Least-squares CART regression trees.
//!
//! A node is split on the `(feature, threshold)` pair that minimises the
//! summed squared error of its two children. Candidate thresholds are
//! midpoints between consecutive distinct feature values; rows with
//! `x[feature] <= threshold` go left. Equal-cost candidates resolve to the
//! lowest feature index, then the lowest threshold.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Candidates whose cost differs by less than this fraction of the node's
/// SSE count as equal-cost, so rounding in the running sums cannot
/// override the tie order.
const SPLIT_TIE_RTOL: f64 = 1e-12;

/// Growth limits shared by every tree-based family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    /// `None` grows until leaves are pure or too small to split.
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    /// Features examined per split; `None` examines all of them.
    pub max_features: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: None,
            min_samples_leaf: 1,
            max_features: None,
        }
    }
}

impl TreeParams {
    pub fn validate(&self) -> Result<()> {
        if self.min_samples_leaf == 0 {
            return Err(Error::InvalidConfig("min_samples_leaf must be >= 1".into()));
        }
        if self.max_features == Some(0) {
            return Err(Error::InvalidConfig("max_features must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DecisionTreeConfig {
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
}

impl Default for DecisionTreeConfig {
    fn default() -> Self {
        DecisionTreeConfig {
            max_depth: Some(8),
            min_samples_leaf: 5,
        }
    }
}

impl DecisionTreeConfig {
    pub fn params(&self) -> TreeParams {
        TreeParams {
            max_depth: self.max_depth,
            min_samples_leaf: self.min_samples_leaf,
            max_features: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        value: f64,
        n_samples: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        n_samples: usize,
        /// Parent SSE minus the children's summed SSE.
        sse_reduction: f64,
    },
}

impl Node {
    pub fn n_samples(&self) -> usize {
        match *self {
            Node::Leaf { n_samples, .. } | Node::Split { n_samples, .. } => n_samples,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    /// Preorder; index 0 is the root.
    nodes: Vec<Node>,
    n_features: usize,
    n_train: usize,
}

struct Candidate {
    feature: usize,
    threshold: f64,
    cost: f64,
    /// Number of sorted rows that fall left.
    n_left: usize,
}

struct Grower<'a, R> {
    x: &'a Matrix,
    y: &'a [f64],
    params: &'a TreeParams,
    rng: Option<&'a mut R>,
    nodes: Vec<Node>,
}

impl RegressionTree {
    /// Fits on every row of `x`.
    pub fn fit(params: &TreeParams, x: &Matrix, y: &[f64]) -> Result<Self> {
        let rows: Vec<usize> = (0..x.n_rows()).collect();
        Self::fit_rows::<rand_chacha::ChaCha8Rng>(params, x, y, rows, None)
    }

    /// Fits on `rows` (duplicates allowed, as in a bootstrap sample).
    ///
    /// `rng` is only consulted when `params.max_features` is smaller than
    /// the number of features.
    pub fn fit_rows<R: Rng>(
        params: &TreeParams,
        x: &Matrix,
        y: &[f64],
        rows: Vec<usize>,
        rng: Option<&mut R>,
    ) -> Result<Self> {
        params.validate()?;
        if x.n_rows() != y.len() {
            return Err(Error::LengthMismatch {
                left: x.n_rows(),
                right: y.len(),
            });
        }
        if rows.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        let n_train = rows.len();
        let mut grower = Grower {
            x,
            y,
            params,
            rng,
            nodes: Vec::new(),
        };
        grower.grow(rows, 0);
        Ok(RegressionTree {
            nodes: grower.nodes,
            n_features: x.n_cols(),
            n_train,
        })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_train(&self) -> usize {
        self.n_train
    }

    /// Mean of the training targets, recovered from the leaves.
    pub fn training_target_mean(&self) -> f64 {
        let total: f64 = self
            .nodes
            .iter()
            .filter_map(|n| match *n {
                Node::Leaf { value, n_samples } => Some(value * n_samples as f64),
                Node::Split { .. } => None,
            })
            .sum();
        total / self.n_train as f64
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    /// Index of the leaf `row` is routed to.
    pub fn leaf_index(&self, row: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { .. } => return i,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => i = if row[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        match self.nodes[self.leaf_index(row)] {
            Node::Leaf { value, .. } => value,
            Node::Split { .. } => unreachable!("leaf_index returns leaves"),
        }
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        super::check_width(self.n_features, x)?;
        Ok(x.rows().map(|r| self.predict_row(r)).collect())
    }

    /// Per-feature sum of weighted variance reductions,
    /// `n_node / n_train × (parent variance − weighted child variance)`.
    pub fn impurity_contributions(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n_features];
        for node in &self.nodes {
            if let Node::Split {
                feature,
                sse_reduction,
                ..
            } = *node
            {
                out[feature] += sse_reduction.max(0.0) / self.n_train as f64;
            }
        }
        out
    }
}

impl<R: Rng> Grower<'_, R> {
    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let id = self.nodes.len();
        let n = rows.len();
        let value = rows.iter().map(|&i| self.y[i]).sum::<f64>() / n as f64;
        self.nodes.push(Node::Leaf {
            value,
            n_samples: n,
        });

        let depth_ok = self.params.max_depth.is_none_or(|d| depth < d);
        let size_ok = n >= 2 * self.params.min_samples_leaf;
        let first = self.y[rows[0]];
        let constant = rows.iter().all(|&i| self.y[i] == first);
        if !depth_ok || !size_ok || constant {
            return id;
        }

        let Some((best, sorted, parent_sse)) = self.best_split(&rows, value) else {
            return id;
        };
        let (left_rows, right_rows) = sorted.split_at(best.n_left);
        let (left_rows, right_rows) = (left_rows.to_vec(), right_rows.to_vec());
        let left = self.grow(left_rows, depth + 1);
        let right = self.grow(right_rows, depth + 1);
        self.nodes[id] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
            n_samples: n,
            sse_reduction: parent_sse - best.cost,
        };
        id
    }

    /// Best split over the candidate features, plus the node rows sorted by
    /// the chosen feature and the node's own SSE.
    fn best_split(&mut self, rows: &[usize], mean: f64) -> Option<(Candidate, Vec<usize>, f64)> {
        let n_features = self.x.n_cols();
        let k = self.params.max_features.unwrap_or(n_features).min(n_features);

        let mut batches: Vec<Vec<usize>> = Vec::new();
        match self.rng.as_deref_mut() {
            Some(rng) if k < n_features => {
                let mut order: Vec<usize> = (0..n_features).collect();
                order.shuffle(rng);
                let mut head = order[..k].to_vec();
                let mut tail = order[k..].to_vec();
                head.sort_unstable();
                tail.sort_unstable();
                batches.push(head);
                // only searched when the sampled features admit no split
                batches.push(tail);
            }
            _ => batches.push((0..n_features).collect()),
        }

        // centre on the node mean to keep the running sums small
        let residual: Vec<f64> = rows.iter().map(|&i| self.y[i] - mean).collect();
        let parent_sse: f64 = residual.iter().map(|r| r * r).sum();

        for batch in batches {
            let mut best: Option<(Candidate, Vec<usize>)> = None;
            let tie = parent_sse * SPLIT_TIE_RTOL;
            for feature in batch {
                let mut order: Vec<usize> = (0..rows.len()).collect();
                order.sort_by(|&a, &b| {
                    self.x
                        .get(rows[a], feature)
                        .total_cmp(&self.x.get(rows[b], feature))
                });
                if let Some(c) = self.scan_feature(rows, &residual, &order, feature) {
                    if best.as_ref().is_none_or(|(b, _)| c.cost < b.cost - tie) {
                        let sorted = order.iter().map(|&o| rows[o]).collect();
                        best = Some((c, sorted));
                    }
                }
            }
            if let Some((c, sorted)) = best {
                return Some((c, sorted, parent_sse));
            }
        }
        None
    }

    fn scan_feature(
        &self,
        rows: &[usize],
        residual: &[f64],
        order: &[usize],
        feature: usize,
    ) -> Option<Candidate> {
        let n = order.len();
        let min_leaf = self.params.min_samples_leaf;
        let total_sum: f64 = residual.iter().sum();
        let total_sq: f64 = residual.iter().map(|r| r * r).sum();
        let tie = total_sq * SPLIT_TIE_RTOL;

        let mut best: Option<Candidate> = None;
        let (mut left_sum, mut left_sq) = (0.0, 0.0);
        for pos in 0..n - 1 {
            let r = residual[order[pos]];
            left_sum += r;
            left_sq += r * r;
            let n_left = pos + 1;
            let n_right = n - n_left;
            if n_left < min_leaf {
                continue;
            }
            if n_right < min_leaf {
                break;
            }
            let here = self.x.get(rows[order[pos]], feature);
            let next = self.x.get(rows[order[pos + 1]], feature);
            if here == next {
                continue;
            }
            let right_sum = total_sum - left_sum;
            let right_sq = total_sq - left_sq;
            let cost = (left_sq - left_sum * left_sum / n_left as f64)
                + (right_sq - right_sum * right_sum / n_right as f64);
            if best.as_ref().is_none_or(|b| cost < b.cost - tie) {
                let mut threshold = here + (next - here) / 2.0;
                if threshold >= next {
                    threshold = here;
                }
                best = Some(Candidate {
                    feature,
                    threshold,
                    cost,
                    n_left,
                });
            }
        }
        best
    }
}

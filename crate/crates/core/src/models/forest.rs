//! Bagged CART ensemble with per-split feature subsampling.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tree::{RegressionTree, TreeParams};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RandomForestConfig {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub bootstrap: bool,
    /// `None` examines every feature at each split.
    pub max_features: Option<usize>,
    /// Falls back to the run's root seed when unset.
    pub seed: Option<u64>,
}

impl Default for RandomForestConfig {
    fn default() -> Self {
        RandomForestConfig {
            n_trees: 100,
            max_depth: None,
            min_samples_leaf: 1,
            bootstrap: true,
            // ⌈16 / 3⌉
            max_features: Some(6),
            seed: None,
        }
    }
}

impl RandomForestConfig {
    pub fn tree_params(&self) -> TreeParams {
        TreeParams {
            max_depth: self.max_depth,
            min_samples_leaf: self.min_samples_leaf,
            max_features: self.max_features,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::InvalidConfig("n_trees must be >= 1".into()));
        }
        self.tree_params().validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    trees: Vec<RegressionTree>,
    pub training_target_mean: f64,
}

impl RandomForest {
    pub fn fit(config: &RandomForestConfig, x: &Matrix, y: &[f64]) -> Result<Self> {
        config.validate()?;
        let n = y.len();
        if n == 0 {
            return Err(Error::EmptyTrainingSet);
        }
        let params = config.tree_params();
        let root = config.seed.unwrap_or(crate::dataset::DEFAULT_SEED);
        let trees = (0..config.n_trees)
            .map(|t| {
                let mut rng = seed::stream(root, "forest-tree", t as u64);
                let rows: Vec<usize> = if config.bootstrap {
                    (0..n).map(|_| rng.random_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                RegressionTree::fit_rows(&params, x, y, rows, Some(&mut rng))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(RandomForest {
            trees,
            training_target_mean: super::mean(y),
        })
    }

    pub fn trees(&self) -> &[RegressionTree] {
        &self.trees
    }

    pub fn n_features(&self) -> usize {
        self.trees[0].n_features()
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict_row(row)).sum();
        sum / self.trees.len() as f64
    }
}

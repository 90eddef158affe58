//! Squared-loss gradient boosting over CART stages.
//!
//! `F₀ = mean(y)`; stage `m` fits a tree to the residuals `y − Fₘ₋₁(X)` and
//! adds it scaled by the learning rate.

use serde::{Deserialize, Serialize};

use super::tree::{RegressionTree, TreeParams};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GradientBoostingConfig {
    pub n_estimators: usize,
    pub learning_rate: f64,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    /// No row or feature subsampling is done, so the seed does not change the fit;
    /// it is carried so every stochastic family echoes one.
    pub seed: Option<u64>,
}

impl Default for GradientBoostingConfig {
    fn default() -> Self {
        GradientBoostingConfig {
            n_estimators: 100,
            learning_rate: 0.1,
            max_depth: Some(3),
            min_samples_leaf: 5,
            seed: None,
        }
    }
}

impl GradientBoostingConfig {
    pub fn tree_params(&self) -> TreeParams {
        TreeParams {
            max_depth: self.max_depth,
            min_samples_leaf: self.min_samples_leaf,
            max_features: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "learning_rate must lie in (0, 1], got {}",
                self.learning_rate
            )));
        }
        self.tree_params().validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientBoosting {
    pub initial_prediction: f64,
    pub learning_rate: f64,
    stages: Vec<RegressionTree>,
    n_features: usize,
}

impl GradientBoosting {
    pub fn fit(config: &GradientBoostingConfig, x: &Matrix, y: &[f64]) -> Result<Self> {
        config.validate()?;
        if y.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        let params = config.tree_params();
        let initial = super::mean(y);
        let mut current = vec![initial; y.len()];
        let mut residual = vec![0.0; y.len()];
        let mut stages = Vec::with_capacity(config.n_estimators);
        for _ in 0..config.n_estimators {
            for ((r, &t), &f) in residual.iter_mut().zip(y).zip(&current) {
                *r = t - f;
            }
            let tree = RegressionTree::fit(&params, x, &residual)?;
            for (f, row) in current.iter_mut().zip(x.rows()) {
                *f += config.learning_rate * tree.predict_row(row);
            }
            stages.push(tree);
        }
        Ok(GradientBoosting {
            initial_prediction: initial,
            learning_rate: config.learning_rate,
            stages,
            n_features: x.n_cols(),
        })
    }

    pub fn stages(&self) -> &[RegressionTree] {
        &self.stages
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.stages
            .iter()
            .fold(self.initial_prediction, |f, tree| {
                f + self.learning_rate * tree.predict_row(row)
            })
    }

    /// `F₀(row), F₁(row), …, F_M(row)`.
    pub fn staged_predict_row(&self, row: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.stages.len() + 1);
        let mut f = self.initial_prediction;
        out.push(f);
        for tree in &self.stages {
            f += self.learning_rate * tree.predict_row(row);
            out.push(f);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step() -> (Matrix, Vec<f64>) {
        let x = Matrix::from_vec(4, 1, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        (x, vec![0.0, 0.0, 10.0, 10.0])
    }

    #[test]
    fn zero_stages_predict_the_mean() {
        let (x, y) = step();
        let cfg = GradientBoostingConfig {
            n_estimators: 0,
            ..Default::default()
        };
        let gb = GradientBoosting::fit(&cfg, &x, &y).unwrap();
        assert_eq!(gb.predict_row(&[-3.0]), 5.0);
        assert_eq!(gb.predict_row(&[30.0]), 5.0);
    }

    // F₀ = 5, residuals (−5, −5, 5, 5), stump at 1.5 recovers them exactly.
    #[test]
    fn single_full_rate_stump_fits_the_step() {
        let (x, y) = step();
        let cfg = GradientBoostingConfig {
            n_estimators: 1,
            learning_rate: 1.0,
            max_depth: Some(1),
            min_samples_leaf: 1,
            seed: None,
        };
        let gb = GradientBoosting::fit(&cfg, &x, &y).unwrap();
        let pred: Vec<f64> = x.rows().map(|r| gb.predict_row(r)).collect();
        assert_eq!(pred, y);
    }

    #[test]
    fn learning_rate_bounds() {
        let (x, y) = step();
        for lr in [0.0, 1.5, f64::NAN] {
            let cfg = GradientBoostingConfig {
                learning_rate: lr,
                ..Default::default()
            };
            assert!(GradientBoosting::fit(&cfg, &x, &y).is_err());
        }
    }
}

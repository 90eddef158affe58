//! Per-feature importance weights: impurity (tree families) and permutation (any model).

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::{r_squared, Predictor};
use crate::matrix::Matrix;
use crate::models::tree::RegressionTree;
use crate::models::TrainedModel;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Impurity,
    Permutation,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "impurity" => Ok(Method::Impurity),
            "permutation" => Ok(Method::Permutation),
            other => Err(Error::InvalidConfig(format!(
                "unknown importance method `{other}` (impurity|permutation)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureWeight {
    pub feature: String,
    pub weight: f64,
    /// 1-based position in the ranking.
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub method: Method,
    /// Weights in feature (column) order.
    pub weights: Vec<FeatureWeight>,
    /// Feature names by descending weight; ties keep column order.
    pub ranking: Vec<String>,
    /// Raw scores before normalisation (impurity sums or R² drops).
    pub raw: Vec<f64>,
    /// Set when every raw score was zero and the weights fell back to uniform.
    pub uniform_fallback: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repeats: Option<usize>,
}

impl ImportanceReport {
    fn build(method: Method, names: &[String], raw: Vec<f64>, repeats: Option<usize>) -> Self {
        let floored: Vec<f64> = raw.iter().map(|v| v.max(0.0)).collect();
        let total: f64 = floored.iter().sum();
        let uniform_fallback = !(total > 0.0);
        let weights: Vec<f64> = if uniform_fallback {
            vec![1.0 / names.len() as f64; names.len()]
        } else {
            floored.iter().map(|v| v / total).collect()
        };

        let mut order: Vec<usize> = (0..names.len()).collect();
        order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));
        let mut rank = vec![0; names.len()];
        for (pos, &j) in order.iter().enumerate() {
            rank[j] = pos + 1;
        }
        ImportanceReport {
            method,
            weights: names
                .iter()
                .zip(&weights)
                .zip(&rank)
                .map(|((f, &w), &r)| FeatureWeight {
                    feature: f.clone(),
                    weight: w,
                    rank: r,
                })
                .collect(),
            ranking: order.iter().map(|&j| names[j].clone()).collect(),
            raw,
            uniform_fallback,
            repeats,
        }
    }

    pub fn weight(&self, feature: &str) -> Option<f64> {
        self.weights
            .iter()
            .find(|w| w.feature == feature)
            .map(|w| w.weight)
    }

    pub fn rank(&self, feature: &str) -> Option<usize> {
        self.weights
            .iter()
            .find(|w| w.feature == feature)
            .map(|w| w.rank)
    }

    /// `feature,weight,rank` rows in ranking order.
    pub fn to_csv(&self) -> String {
        let mut rows: Vec<&FeatureWeight> = self.weights.iter().collect();
        rows.sort_by_key(|w| w.rank);
        let mut out = String::from("feature,weight,rank\n");
        for w in rows {
            out.push_str(&format!("{},{},{}\n", w.feature, w.weight, w.rank));
        }
        out
    }
}

fn check_names(names: &[String], n_features: usize) -> Result<()> {
    if names.len() != n_features {
        return Err(Error::DimensionMismatch {
            expected: n_features,
            actual: names.len(),
        });
    }
    Ok(())
}

/// Summed weighted variance reduction per split feature, normalised to one.
pub fn impurity_importance(model: &TrainedModel, feature_names: &[String]) -> Result<ImportanceReport> {
    let trees: Vec<&RegressionTree> = match model {
        TrainedModel::DecisionTree(t) => vec![t],
        TrainedModel::RandomForest(f) => f.trees().iter().collect(),
        TrainedModel::GradientBoosting(g) => g.stages().iter().collect(),
        other => {
            return Err(Error::UnsupportedFamily(
                other.family().display_name().to_string(),
            ))
        }
    };
    let n = model.n_features();
    check_names(feature_names, n)?;
    let mut raw = vec![0.0; n];
    for tree in trees {
        for (acc, c) in raw.iter_mut().zip(tree.impurity_contributions()) {
            *acc += c;
        }
    }
    Ok(ImportanceReport::build(Method::Impurity, feature_names, raw, None))
}

/// R² drop when each column is shuffled, averaged over `repeats` seeded shuffles.
pub fn permutation_importance(
    model: &dyn Predictor,
    x: &Matrix,
    y: &[f64],
    feature_names: &[String],
    repeats: usize,
    seed: u64,
) -> Result<ImportanceReport> {
    if repeats == 0 {
        return Err(Error::InvalidConfig("repeats must be >= 1".into()));
    }
    check_names(feature_names, x.n_cols())?;
    let baseline = r_squared(y, &model.predict(x)?)?;
    let mut raw = Vec::with_capacity(x.n_cols());
    for j in 0..x.n_cols() {
        let mut drop = 0.0;
        for r in 0..repeats {
            let mut column = x.column(j);
            let stream = (j * repeats + r) as u64;
            column.shuffle(&mut seed::stream(seed, "permutation", stream));
            let mut shuffled = x.clone();
            for (i, v) in column.into_iter().enumerate() {
                shuffled.set(i, j, v);
            }
            drop += baseline - r_squared(y, &model.predict(&shuffled)?)?;
        }
        raw.push(drop / repeats as f64);
    }
    Ok(ImportanceReport::build(
        Method::Permutation,
        feature_names,
        raw,
        Some(repeats),
    ))
}

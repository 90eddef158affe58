//! The seven regressor families behind one fit/predict contract.
//!
//! Every family is written from scratch on top of [`Matrix`]. Fitting is
//! single-threaded and deterministic given the config (including its seed);
//! a [`TrainedModel`] is immutable and can be shared across threads.

pub mod boosting;
pub mod forest;
pub mod kernel;
pub mod knn;
pub mod linalg;
pub mod logit;
pub mod svr;
pub mod tree;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub use boosting::{GradientBoosting, GradientBoostingConfig};
pub use forest::{RandomForest, RandomForestConfig};
pub use kernel::{Kernel, KernelKind, KernelRidge, KernelRidgeConfig};
pub use knn::{Knn, KnnConfig};
pub use logit::{LogitAdapted, LogitAdaptedConfig};
pub use svr::{Svr, SvrConfig};
pub use tree::{DecisionTreeConfig, RegressionTree, TreeParams};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "KNN")]
    Knn,
    DecisionTree,
    RandomForest,
    GradientBoosting,
    KernelRidge,
    #[serde(rename = "SVR")]
    Svr,
    LogitAdapted,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::Svr,
        Family::Knn,
        Family::KernelRidge,
        Family::DecisionTree,
        Family::RandomForest,
        Family::LogitAdapted,
        Family::GradientBoosting,
    ];

    /// Display name used in reports.
    pub fn display_name(self) -> &'static str {
        match self {
            Family::Svr => "SVM",
            Family::Knn => "KNeighbors",
            Family::KernelRidge => "KernelRidge",
            Family::DecisionTree => "DecisionTree",
            Family::RandomForest => "RandomForest",
            Family::LogitAdapted => "LogitAdapted",
            Family::GradientBoosting => "GradientBoosting",
        }
    }

    /// Families that see z-scored features; trees are scale-invariant and get raw ones.
    pub fn scale_sensitive(self) -> bool {
        matches!(
            self,
            Family::Knn | Family::KernelRidge | Family::Svr | Family::LogitAdapted
        )
    }

    pub fn is_tree_based(self) -> bool {
        matches!(
            self,
            Family::DecisionTree | Family::RandomForest | Family::GradientBoosting
        )
    }

    /// Parses the short names accepted on the command line.
    pub fn parse(name: &str) -> Result<Family> {
        let key = name.trim().to_ascii_lowercase().replace(['-', '_'], "");
        Ok(match key.as_str() {
            "knn" | "kneighbors" => Family::Knn,
            "tree" | "dt" | "decisiontree" => Family::DecisionTree,
            "forest" | "rf" | "randomforest" => Family::RandomForest,
            "gb" | "gbr" | "gbm" | "gradientboosting" => Family::GradientBoosting,
            "krr" | "kernelridge" => Family::KernelRidge,
            "svr" | "svm" => Family::Svr,
            "logit" | "logistic" | "logitadapted" => Family::LogitAdapted,
            _ => return Err(Error::InvalidConfig(format!("unknown model `{name}`"))),
        })
    }
}

/// A model family together with its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum ModelConfig {
    #[serde(rename = "KNN")]
    Knn(KnnConfig),
    DecisionTree(DecisionTreeConfig),
    RandomForest(RandomForestConfig),
    GradientBoosting(GradientBoostingConfig),
    KernelRidge(KernelRidgeConfig),
    #[serde(rename = "SVR")]
    Svr(SvrConfig),
    LogitAdapted(LogitAdaptedConfig),
}

impl ModelConfig {
    pub fn default_for(family: Family) -> Self {
        match family {
            Family::Knn => ModelConfig::Knn(KnnConfig::default()),
            Family::DecisionTree => ModelConfig::DecisionTree(DecisionTreeConfig::default()),
            Family::RandomForest => ModelConfig::RandomForest(RandomForestConfig::default()),
            Family::GradientBoosting => {
                ModelConfig::GradientBoosting(GradientBoostingConfig::default())
            }
            Family::KernelRidge => ModelConfig::KernelRidge(KernelRidgeConfig::default()),
            Family::Svr => ModelConfig::Svr(SvrConfig::default()),
            Family::LogitAdapted => ModelConfig::LogitAdapted(LogitAdaptedConfig::default()),
        }
    }

    /// The full seven-model roster with default hyperparameters.
    pub fn default_roster() -> Vec<ModelConfig> {
        Family::ALL.iter().map(|&f| Self::default_for(f)).collect()
    }

    pub fn family(&self) -> Family {
        match self {
            ModelConfig::Knn(_) => Family::Knn,
            ModelConfig::DecisionTree(_) => Family::DecisionTree,
            ModelConfig::RandomForest(_) => Family::RandomForest,
            ModelConfig::GradientBoosting(_) => Family::GradientBoosting,
            ModelConfig::KernelRidge(_) => Family::KernelRidge,
            ModelConfig::Svr(_) => Family::Svr,
            ModelConfig::LogitAdapted(_) => Family::LogitAdapted,
        }
    }

    /// Fills unset seeds of stochastic families with `root`.
    pub fn with_root_seed(mut self, root: u64) -> Self {
        match &mut self {
            ModelConfig::RandomForest(c) => {
                c.seed.get_or_insert(root);
            }
            ModelConfig::GradientBoosting(c) => {
                c.seed.get_or_insert(root);
            }
            _ => {}
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelConfig::Knn(c) => c.validate(),
            ModelConfig::DecisionTree(c) => c.params().validate(),
            ModelConfig::RandomForest(c) => c.validate(),
            ModelConfig::GradientBoosting(c) => c.validate(),
            ModelConfig::KernelRidge(c) => c.validate(),
            ModelConfig::Svr(c) => c.validate(),
            ModelConfig::LogitAdapted(c) => c.validate(),
        }
    }

    /// Trains on `x`/`y` as given; no feature scaling happens here.
    pub fn fit(&self, x: &Matrix, y: &[f64]) -> Result<TrainedModel> {
        if x.n_rows() != y.len() {
            return Err(Error::LengthMismatch {
                left: x.n_rows(),
                right: y.len(),
            });
        }
        Ok(match self {
            ModelConfig::Knn(c) => TrainedModel::Knn(Knn::fit(c, x, y)?),
            ModelConfig::DecisionTree(c) => {
                TrainedModel::DecisionTree(RegressionTree::fit(&c.params(), x, y)?)
            }
            ModelConfig::RandomForest(c) => TrainedModel::RandomForest(RandomForest::fit(c, x, y)?),
            ModelConfig::GradientBoosting(c) => {
                TrainedModel::GradientBoosting(GradientBoosting::fit(c, x, y)?)
            }
            ModelConfig::KernelRidge(c) => TrainedModel::KernelRidge(KernelRidge::fit(c, x, y)?),
            ModelConfig::Svr(c) => TrainedModel::Svr(Svr::fit(c, x, y)?),
            ModelConfig::LogitAdapted(c) => TrainedModel::LogitAdapted(LogitAdapted::fit(c, x, y)?),
        })
    }
}

/// Non-fatal conditions a fit can finish with.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum FitWarning {
    /// The SVR optimizer hit `max_iter` sweeps; the model holds the best iterate.
    NotConverged,
    /// The training target had no spread; the model predicts that constant.
    ConstantTarget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum TrainedModel {
    #[serde(rename = "KNN")]
    Knn(Knn),
    DecisionTree(RegressionTree),
    RandomForest(RandomForest),
    GradientBoosting(GradientBoosting),
    KernelRidge(KernelRidge),
    #[serde(rename = "SVR")]
    Svr(Svr),
    LogitAdapted(LogitAdapted),
}

impl TrainedModel {
    pub fn family(&self) -> Family {
        match self {
            TrainedModel::Knn(_) => Family::Knn,
            TrainedModel::DecisionTree(_) => Family::DecisionTree,
            TrainedModel::RandomForest(_) => Family::RandomForest,
            TrainedModel::GradientBoosting(_) => Family::GradientBoosting,
            TrainedModel::KernelRidge(_) => Family::KernelRidge,
            TrainedModel::Svr(_) => Family::Svr,
            TrainedModel::LogitAdapted(_) => Family::LogitAdapted,
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            TrainedModel::Knn(m) => m.n_features(),
            TrainedModel::DecisionTree(m) => m.n_features(),
            TrainedModel::RandomForest(m) => m.n_features(),
            TrainedModel::GradientBoosting(m) => m.n_features(),
            TrainedModel::KernelRidge(m) => m.n_features(),
            TrainedModel::Svr(m) => m.n_features(),
            TrainedModel::LogitAdapted(m) => m.n_features(),
        }
    }

    pub fn training_target_mean(&self) -> f64 {
        match self {
            TrainedModel::Knn(m) => m.training_target_mean,
            TrainedModel::DecisionTree(m) => m.training_target_mean(),
            TrainedModel::RandomForest(m) => m.training_target_mean,
            TrainedModel::GradientBoosting(m) => m.initial_prediction,
            TrainedModel::KernelRidge(m) => m.training_target_mean,
            TrainedModel::Svr(m) => m.training_target_mean,
            TrainedModel::LogitAdapted(m) => m.training_target_mean,
        }
    }

    pub fn warnings(&self) -> Vec<FitWarning> {
        match self {
            TrainedModel::Svr(m) if !m.converged => vec![FitWarning::NotConverged],
            TrainedModel::LogitAdapted(m) if m.is_constant() => vec![FitWarning::ConstantTarget],
            _ => Vec::new(),
        }
    }

    fn predict_row(&self, row: &[f64]) -> f64 {
        match self {
            TrainedModel::Knn(m) => m.predict_row(row),
            TrainedModel::DecisionTree(m) => m.predict_row(row),
            TrainedModel::RandomForest(m) => m.predict_row(row),
            TrainedModel::GradientBoosting(m) => m.predict_row(row),
            TrainedModel::KernelRidge(m) => m.predict_row(row),
            TrainedModel::Svr(m) => m.predict_row(row),
            TrainedModel::LogitAdapted(m) => m.predict_row(row),
        }
    }

    /// One prediction per query row.
    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        check_width(self.n_features(), x)?;
        Ok(x.rows().map(|row| self.predict_row(row)).collect())
    }

    /// Serializes the model as a versioned JSON document.
    pub fn to_json(&self) -> Result<String> {
        let doc = ModelDocument {
            format_version: MODEL_FORMAT_VERSION,
            model: self.clone(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<TrainedModel> {
        #[derive(Deserialize)]
        struct Version {
            format_version: u32,
        }
        let version: Version = serde_json::from_str(text)?;
        if version.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::FormatVersion {
                found: version.format_version,
                expected: MODEL_FORMAT_VERSION,
            });
        }
        let doc: ModelDocument = serde_json::from_str(text)?;
        Ok(doc.model)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelDocument {
    format_version: u32,
    model: TrainedModel,
}

pub(crate) fn check_width(expected: usize, x: &Matrix) -> Result<()> {
    // an empty query with zero width is always accepted
    if x.n_cols() != expected && !(x.n_rows() == 0 && x.n_cols() == 0) {
        return Err(Error::DimensionMismatch {
            expected,
            actual: x.n_cols(),
        });
    }
    Ok(())
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

//! Tabular regression toolkit: dataset loading and summaries, seven
//! regressor families, holdout and K-fold evaluation, feature importance.

pub mod cli;
pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod importance;
pub mod matrix;
pub mod models;
pub mod seed;

pub use dataset::{load_csv, split, Dataset, SplitPlan};
pub use error::{Error, Result};
pub use evaluation::{benchmark, cross_validate, holdout_evaluate, EvaluationReport};
pub use matrix::Matrix;
pub use models::{Family, ModelConfig, TrainedModel};

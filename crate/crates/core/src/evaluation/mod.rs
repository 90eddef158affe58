//! Holdout scoring, K-fold cross-validation and the multi-model benchmark.
//!
//! Scale-sensitive estimators get a [`Scaler`] fit on the training rows
//! of each split only; the transform is then applied to the held-out rows.
//! Every fit goes through [`fit_and_score`], which asserts that no
//! held-out index reaches the scaler or the model.

pub mod folds;
pub mod metrics;
pub mod report;

use std::collections::HashSet;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Scaler, SplitPlan};
use crate::error::{Error, Result};
use crate::matrix::{select, Matrix};
use crate::models::{ModelConfig, TrainedModel};

pub use folds::{kfold_plan, FoldPlan, DEFAULT_K_FOLDS};
pub use metrics::{mae, mean_and_std, r_squared, rmse};
pub use report::{EvaluationReport, ModelEntry, Outcome, ReportMetadata, REPORT_FORMAT_VERSION};

/// Anything that can be trained on a feature matrix and then predict.
pub trait Estimator: Send + Sync {
    fn name(&self) -> String;

    /// Whether features are z-scored (train-fitted) before `fit`.
    fn scale_features(&self) -> bool;

    fn fit_predictor(&self, x: &Matrix, y: &[f64]) -> Result<Box<dyn Predictor>>;

    /// Hyperparameters echoed into report metadata.
    fn config_json(&self) -> serde_json::Value {
        serde_json::Value::Null
    }
}

pub trait Predictor: Send + Sync {
    fn predict(&self, x: &Matrix) -> Result<Vec<f64>>;

    fn warnings(&self) -> Vec<String> {
        Vec::new()
    }
}

impl Estimator for ModelConfig {
    fn name(&self) -> String {
        self.family().display_name().to_string()
    }

    fn scale_features(&self) -> bool {
        self.family().scale_sensitive()
    }

    fn fit_predictor(&self, x: &Matrix, y: &[f64]) -> Result<Box<dyn Predictor>> {
        Ok(Box::new(self.fit(x, y)?))
    }

    fn config_json(&self) -> serde_json::Value {
        serde_json::to_value(self).unwrap_or(serde_json::Value::Null)
    }
}

impl Predictor for TrainedModel {
    fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        TrainedModel::predict(self, x)
    }

    fn warnings(&self) -> Vec<String> {
        TrainedModel::warnings(self)
            .into_iter()
            .map(|w| format!("{w:?}"))
            .collect()
    }
}

/// Scores from one train/held-out pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoldoutResult {
    pub val_r2: f64,
    pub val_mae: f64,
    pub val_rmse: f64,
    pub fit_time_s: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub per_fold_r2: Vec<f64>,
    pub mean_r2: f64,
    /// Sample standard deviation over folds.
    pub std_r2: f64,
    pub per_fold_mae: Vec<f64>,
    pub per_fold_rmse: Vec<f64>,
    pub mean_mae: f64,
    pub std_mae: f64,
    pub mean_rmse: f64,
    pub std_rmse: f64,
    /// Models fitted, one per fold.
    pub n_fits: usize,
    /// Wall seconds summed over folds.
    pub fit_time_s: f64,
}

/// A fitted estimator plus the scaler its inputs go through.
pub struct FittedPipeline {
    pub scaler: Option<Scaler>,
    pub predictor: Box<dyn Predictor>,
}

impl FittedPipeline {
    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        match &self.scaler {
            Some(s) => self.predictor.predict(&s.transform(x)?),
            None => self.predictor.predict(x),
        }
    }
}

impl Predictor for FittedPipeline {
    fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        FittedPipeline::predict(self, x)
    }

    fn warnings(&self) -> Vec<String> {
        self.predictor.warnings()
    }
}

/// Fits `estimator` on `train` rows of `dataset`, scaling if it asks for it.
pub fn fit_pipeline(
    estimator: &dyn Estimator,
    dataset: &Dataset,
    train: &[usize],
) -> Result<FittedPipeline> {
    let features = dataset.features();
    let y_train = select(dataset.target(), train);
    let scaler = if estimator.scale_features() {
        let s = Scaler::fit(features, train)?;
        let allowed: HashSet<usize> = train.iter().copied().collect();
        assert!(
            s.fitted_on.iter().all(|i| allowed.contains(i)),
            "scaler fitted outside the training rows"
        );
        Some(s)
    } else {
        None
    };
    let x_train = match &scaler {
        Some(s) => s.transform(&features.select_rows(train))?,
        None => features.select_rows(train),
    };
    let predictor = estimator.fit_predictor(&x_train, &y_train)?;
    Ok(FittedPipeline { scaler, predictor })
}

struct Scored {
    r2: f64,
    mae: f64,
    rmse: f64,
    seconds: f64,
    warnings: Vec<String>,
}

/// Trains on `train`, scores on `test`, timing fit + predict.
fn fit_and_score(
    estimator: &dyn Estimator,
    dataset: &Dataset,
    train: &[usize],
    test: &[usize],
) -> Result<Scored> {
    let held_out: HashSet<usize> = test.iter().copied().collect();
    assert!(
        train.iter().all(|i| !held_out.contains(i)),
        "held-out row present in the training set"
    );
    let start = Instant::now();
    let pipeline = fit_pipeline(estimator, dataset, train)?;
    if let Some(s) = &pipeline.scaler {
        assert!(
            s.fitted_on.iter().all(|i| !held_out.contains(i)),
            "held-out row used to fit the scaler"
        );
    }
    let pred = pipeline.predict(&dataset.features().select_rows(test))?;
    let seconds = start.elapsed().as_secs_f64();
    let y = select(dataset.target(), test);
    Ok(Scored {
        r2: r_squared(&y, &pred)?,
        mae: mae(&y, &pred)?,
        rmse: rmse(&y, &pred)?,
        seconds,
        warnings: pipeline.predictor.warnings(),
    })
}

fn check_plan_covers(n_plan: usize, dataset: &Dataset) -> Result<()> {
    if n_plan != dataset.n_rows() {
        return Err(Error::LengthMismatch {
            left: n_plan,
            right: dataset.n_rows(),
        });
    }
    Ok(())
}

pub fn holdout_evaluate(
    estimator: &dyn Estimator,
    dataset: &Dataset,
    split: &SplitPlan,
) -> Result<HoldoutResult> {
    check_plan_covers(
        split.train_indices.len() + split.validation_indices.len(),
        dataset,
    )?;
    let mut train = split.train_indices.clone();
    train.sort_unstable();
    let s = fit_and_score(estimator, dataset, &train, &split.validation_indices)?;
    Ok(HoldoutResult {
        val_r2: s.r2,
        val_mae: s.mae,
        val_rmse: s.rmse,
        fit_time_s: s.seconds,
        warnings: s.warnings,
    })
}

pub fn cross_validate(
    estimator: &dyn Estimator,
    dataset: &Dataset,
    plan: &FoldPlan,
) -> Result<CvResult> {
    check_plan_covers(plan.n_rows(), dataset)?;
    let scored: Vec<Scored> = (0..plan.k)
        .into_par_iter()
        .map(|f| {
            fit_and_score(estimator, dataset, &plan.train_indices(f), &plan.folds[f]).map_err(
                |e| Error::Fold {
                    fold: f,
                    source: Box::new(e),
                },
            )
        })
        .collect::<Result<_>>()?;

    let per_fold_r2: Vec<f64> = scored.iter().map(|s| s.r2).collect();
    let per_fold_mae: Vec<f64> = scored.iter().map(|s| s.mae).collect();
    let per_fold_rmse: Vec<f64> = scored.iter().map(|s| s.rmse).collect();
    let (mean_r2, std_r2) = mean_and_std(&per_fold_r2);
    let (mean_mae, std_mae) = mean_and_std(&per_fold_mae);
    let (mean_rmse, std_rmse) = mean_and_std(&per_fold_rmse);
    Ok(CvResult {
        mean_r2,
        std_r2,
        mean_mae,
        std_mae,
        mean_rmse,
        std_rmse,
        n_fits: scored.len(),
        fit_time_s: scored.iter().map(|s| s.seconds).sum(),
        per_fold_r2,
        per_fold_mae,
        per_fold_rmse,
    })
}

/// Holdout and K-fold evaluation of every estimator.
///
/// A failing estimator becomes an error entry; the call itself only fails
/// when all of them do. Work is spread over a pool of `threads` workers
/// (`0` = rayon's default); results do not depend on the thread count.
pub fn benchmark(
    estimators: &[&dyn Estimator],
    dataset: &Dataset,
    split: &SplitPlan,
    plan: &FoldPlan,
    threads: usize,
) -> Result<EvaluationReport> {
    if estimators.is_empty() {
        return Err(Error::InvalidConfig("no models to benchmark".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;

    let models: Vec<ModelEntry> = pool.install(|| {
        estimators
            .par_iter()
            .map(|est| {
                let start = Instant::now();
                let outcome = holdout_evaluate(*est, dataset, split).and_then(|holdout| {
                    let cv = cross_validate(*est, dataset, plan)?;
                    Ok((holdout, cv))
                });
                let total = start.elapsed().as_secs_f64();
                let outcome = match outcome {
                    Ok((holdout, cv)) => Outcome::Ok {
                        val_r2: holdout.val_r2,
                        val_mae: holdout.val_mae,
                        val_rmse: holdout.val_rmse,
                        val_fit_time_s: round_ms(holdout.fit_time_s),
                        cv: CvResult {
                            fit_time_s: round_ms(cv.fit_time_s),
                            ..cv
                        },
                        total_time_s: round_ms(total),
                        warnings: holdout.warnings,
                    },
                    Err(e) => Outcome::Error {
                        message: e.to_string(),
                    },
                };
                ModelEntry {
                    name: est.name(),
                    config: est.config_json(),
                    outcome,
                }
            })
            .collect()
    });

    if models.iter().all(|m| matches!(m.outcome, Outcome::Error { .. })) {
        return Err(Error::AllModelsFailed);
    }

    let metadata = ReportMetadata {
        seed: split.seed,
        split_ratio: split.ratio(),
        n_train: split.train_indices.len(),
        n_validation: split.validation_indices.len(),
        k_folds: plan.k,
        fold_seed: plan.seed,
        dataset: dataset.fingerprint(),
        scaling: "z-score fit on training rows for KNN, KernelRidge, SVR, LogitAdapted; raw features for tree families".into(),
        run_config: None,
    };
    let diagnostics = report::diagnostics(&models);
    Ok(EvaluationReport {
        format_version: REPORT_FORMAT_VERSION,
        metadata,
        models,
        diagnostics,
    })
}

fn round_ms(seconds: f64) -> f64 {
    (seconds * 1000.0).round() / 1000.0
}

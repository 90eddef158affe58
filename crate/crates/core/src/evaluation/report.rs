//! Benchmark report document and its flat CSV projections.
//!
//! The CSVs are long format (`model,metric,value`). `r2.csv` holds the
//! validation and K-fold R², `errors.csv` the MAE/RMSE figures and
//! `stability_time.csv` the per-fold spread and wall times.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::CvResult;
use crate::dataset::Fingerprint;

pub const REPORT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub format_version: u32,
    pub metadata: ReportMetadata,
    pub models: Vec<ModelEntry>,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub seed: u64,
    pub split_ratio: f64,
    pub n_train: usize,
    pub n_validation: usize,
    pub k_folds: usize,
    pub fold_seed: u64,
    pub dataset: Fingerprint,
    pub scaling: String,
    /// Fully resolved run configuration, filled in by the CLI.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run_config: Option<Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelEntry {
    pub name: String,
    pub config: Value,
    #[serde(flatten)]
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Ok {
        val_r2: f64,
        val_mae: f64,
        val_rmse: f64,
        val_fit_time_s: f64,
        cv: CvResult,
        total_time_s: f64,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        warnings: Vec<String>,
    },
    Error {
        message: String,
    },
}

/// A non-gating check recorded alongside the results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl ModelEntry {
    pub fn cv(&self) -> Option<&CvResult> {
        match &self.outcome {
            Outcome::Ok { cv, .. } => Some(cv),
            Outcome::Error { .. } => None,
        }
    }

    pub fn val_r2(&self) -> Option<f64> {
        match self.outcome {
            Outcome::Ok { val_r2, .. } => Some(val_r2),
            Outcome::Error { .. } => None,
        }
    }
}

pub(crate) fn diagnostics(models: &[ModelEntry]) -> Vec<Diagnostic> {
    let cv_mean = |name: &str| {
        models
            .iter()
            .find(|m| m.name == name)
            .and_then(|m| m.cv())
            .map(|cv| cv.mean_r2)
    };
    let mut out = Vec::new();
    if let (Some(gb), Some(dt)) = (cv_mean("GradientBoosting"), cv_mean("DecisionTree")) {
        out.push(Diagnostic {
            name: "gradient_boosting_cv_r2_exceeds_decision_tree".into(),
            passed: gb > dt,
            detail: format!("GradientBoosting {gb:.4} vs DecisionTree {dt:.4}"),
        });
    }
    out
}

impl EvaluationReport {
    pub fn entry(&self, name: &str) -> Option<&ModelEntry> {
        self.models.iter().find(|m| m.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report values are finite")
    }

    /// Entries with results, best validation R² first; ties keep roster order.
    pub fn ranked(&self) -> Vec<&ModelEntry> {
        let mut ok: Vec<&ModelEntry> = self.models.iter().filter(|m| m.val_r2().is_some()).collect();
        ok.sort_by(|a, b| b.val_r2().unwrap().total_cmp(&a.val_r2().unwrap()));
        ok
    }

    fn long_csv(&self, rows: impl Fn(&ModelEntry, &mut Vec<(String, f64)>)) -> String {
        let mut out = String::from("model,metric,value\n");
        for m in &self.models {
            match &m.outcome {
                Outcome::Ok { .. } => {
                    let mut values = Vec::new();
                    rows(m, &mut values);
                    for (metric, value) in values {
                        let _ = writeln!(out, "{},{metric},{value}", m.name);
                    }
                }
                Outcome::Error { message } => {
                    let _ = writeln!(out, "{},error,{}", m.name, csv_quote(message));
                }
            }
        }
        out
    }

    pub fn r2_csv(&self) -> String {
        self.long_csv(|m, v| {
            let cv = m.cv().unwrap();
            v.push(("val_r2".into(), m.val_r2().unwrap()));
            v.push(("cv_mean_r2".into(), cv.mean_r2));
            for (f, r2) in cv.per_fold_r2.iter().enumerate() {
                v.push((format!("fold{f}_r2"), *r2));
            }
        })
    }

    pub fn errors_csv(&self) -> String {
        self.long_csv(|m, v| {
            if let Outcome::Ok {
                val_mae, val_rmse, cv, ..
            } = &m.outcome
            {
                v.push(("val_mae".into(), *val_mae));
                v.push(("val_rmse".into(), *val_rmse));
                v.push(("cv_mean_mae".into(), cv.mean_mae));
                v.push(("cv_mean_rmse".into(), cv.mean_rmse));
            }
        })
    }

    pub fn stability_time_csv(&self) -> String {
        self.long_csv(|m, v| {
            if let Outcome::Ok {
                cv,
                val_fit_time_s,
                total_time_s,
                ..
            } = &m.outcome
            {
                v.push(("cv_std_r2".into(), cv.std_r2));
                v.push(("cv_std_mae".into(), cv.std_mae));
                v.push(("cv_std_rmse".into(), cv.std_rmse));
                v.push(("val_fit_time_s".into(), *val_fit_time_s));
                v.push(("cv_fit_time_s".into(), cv.fit_time_s));
                v.push(("total_time_s".into(), *total_time_s));
            }
        })
    }
}

pub(crate) fn csv_quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Removes every `*_time_s` key, recursively.
pub fn strip_timing(value: &mut Value) {
    match value {
        Value::Object(map) => {
            map.retain(|k, _| !k.ends_with("_time_s"));
            map.values_mut().for_each(strip_timing);
        }
        Value::Array(items) => items.iter_mut().for_each(strip_timing),
        _ => {}
    }
}

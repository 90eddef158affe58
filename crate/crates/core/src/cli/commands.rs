//! Subcommand implementations. Every output file is written only after all
//! computation has finished, so a failed run leaves no partial results.

use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use super::config::{Emit, RunConfig};
use super::table;
use super::{CommonArgs, GenDataArgs, ImportanceArgs};
use crate::dataset::{schema_columns, split, Dataset, RawTable, PERCENTILE_LEVELS};
use crate::error::{Error, Result};
use crate::evaluation::{benchmark as run_benchmark, kfold_plan, Estimator};
use crate::importance::{impurity_importance, permutation_importance, ImportanceReport, Method};
use crate::models::{Family, ModelConfig, TrainedModel};

pub const IMPORTANCE_FORMAT_VERSION: u32 = 1;
pub const DESCRIBE_FORMAT_VERSION: u32 = 1;

/// Features that carry the signal in the reference data.
pub const EXPECTED_TOP_FEATURES: [&str; 5] = ["CHits", "CRuns", "RBI", "CRBI", "CAtBat"];

struct Outputs {
    dir: PathBuf,
    files: Vec<(String, String)>,
}

impl Outputs {
    fn new(dir: &Path) -> Self {
        Outputs {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        }
    }

    fn add(&mut self, name: &str, contents: String) {
        self.files.push((name.to_string(), contents));
    }

    fn add_json(&mut self, name: &str, value: &Value) {
        let mut text = serde_json::to_string_pretty(value).expect("finite values");
        text.push('\n');
        self.add(name, text);
    }

    fn write(self) -> Result<()> {
        std::fs::create_dir_all(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        for (name, contents) in self.files {
            let path = self.dir.join(name);
            std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}

/// Writes to standard output, ignoring a closed pipe.
fn stdout(text: &str) {
    use std::io::Write;
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn data_path(cfg: &RunConfig) -> Result<&Path> {
    cfg.data_path
        .as_deref()
        .ok_or_else(|| Error::InvalidConfig("no input data; pass --data PATH".into()))
}

fn load(cfg: &RunConfig) -> Result<Dataset> {
    RawTable::read_csv(data_path(cfg)?)?.into_dataset()
}

pub fn describe(args: &CommonArgs) -> Result<()> {
    let cfg = args.resolve(None, None)?;
    let raw = RawTable::read_csv(data_path(&cfg)?)?;
    let columns: Vec<(String, _)> = schema_columns()
        .map(|c| raw.describe(c).map(|s| (c.to_string(), s)))
        .collect::<Result<_>>()?;

    let mut out = Outputs::new(&cfg.output_dir);
    if cfg.emits(Emit::Csv) {
        let mut csv = String::from("column,count,mean,std,min,max");
        for p in PERCENTILE_LEVELS {
            csv.push_str(&format!(",p{p}"));
        }
        csv.push('\n');
        for (name, s) in &columns {
            csv.push_str(&format!("{name},{},{},{},{},{}", s.count, s.mean, s.std, s.min, s.max));
            for p in PERCENTILE_LEVELS {
                csv.push_str(&format!(",{}", s.percentile(p).expect("all levels computed")));
            }
            csv.push('\n');
        }
        out.add("describe.csv", csv);
    }
    if cfg.emits(Emit::Json) {
        let cols: Vec<Value> = columns
            .iter()
            .map(|(name, s)| {
                let mut v = serde_json::to_value(s).expect("finite values");
                v["column"] = json!(name);
                v
            })
            .collect();
        out.add_json(
            "describe.json",
            &json!({
                "format_version": DESCRIBE_FORMAT_VERSION,
                "run_config": cfg.to_json_value(),
                "n_rows": raw.n_rows(),
                "columns": cols,
            }),
        );
    }
    out.write()?;
    stdout(&table::describe_table(&columns, table::color_enabled(args.no_color)));
    Ok(())
}

pub fn benchmark(args: &CommonArgs) -> Result<()> {
    let cfg = args.resolve(None, None)?;
    let dataset = load(&cfg)?;
    let holdout = split(dataset.n_rows(), cfg.split_ratio, cfg.seed)?;
    let folds = kfold_plan(dataset.n_rows(), cfg.k_folds, cfg.seed)?;
    let estimators: Vec<&dyn Estimator> = cfg.models.iter().map(|m| m as &dyn Estimator).collect();
    let mut report = run_benchmark(&estimators, &dataset, &holdout, &folds, cfg.threads)?;
    report.metadata.run_config = Some(cfg.to_json_value());

    let mut out = Outputs::new(&cfg.output_dir);
    if cfg.emits(Emit::Json) {
        let mut text = report.to_json();
        text.push('\n');
        out.add("report.json", text);
    }
    if cfg.emits(Emit::Csv) {
        out.add("r2.csv", report.r2_csv());
        out.add("errors.csv", report.errors_csv());
        out.add("stability_time.csv", report.stability_time_csv());
    }
    out.write()?;
    let color = table::color_enabled(args.no_color);
    let mut text = table::benchmark_table(&report, color);
    for d in &report.diagnostics {
        let status = if d.passed { "ok" } else { "warn" };
        text.push_str(&format!("[{status}] {}: {}\n", d.name, d.detail));
    }
    stdout(&text);
    Ok(())
}

/// The model importance is computed for: the first tree ensemble in the
/// configured roster, else default gradient boosting.
fn importance_config(cfg: &RunConfig) -> ModelConfig {
    cfg.models
        .iter()
        .find(|m| m.family() == Family::GradientBoosting)
        .or_else(|| cfg.models.iter().find(|m| m.family().is_tree_based()))
        .cloned()
        .unwrap_or_else(|| ModelConfig::default_for(Family::GradientBoosting))
        .with_root_seed(cfg.seed)
}

pub fn importance(args: &ImportanceArgs) -> Result<()> {
    let cfg = args.common.resolve(args.method, args.repeats)?;
    let dataset = load(&cfg)?;
    let holdout = split(dataset.n_rows(), cfg.split_ratio, cfg.seed)?;
    let mut train = holdout.train_indices.clone();
    train.sort_unstable();

    let (model, fitted) = match &args.model {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let model = TrainedModel::from_json(&text)?;
            if !model.family().is_tree_based() {
                return Err(Error::UnsupportedFamily(model.family().display_name().into()));
            }
            (model, false)
        }
        None => {
            let config = importance_config(&cfg);
            let x = dataset.features().select_rows(&train);
            let y: Vec<f64> = train.iter().map(|&i| dataset.target()[i]).collect();
            (config.fit(&x, &y)?, true)
        }
    };
    let names = dataset.feature_names().to_vec();

    let want = |m: Method| cfg.method.is_none_or(|chosen| chosen == m);
    let impurity = if want(Method::Impurity) {
        Some(impurity_importance(&model, &names)?)
    } else {
        None
    };
    let permutation = if want(Method::Permutation) {
        let x_val = dataset.features().select_rows(&holdout.validation_indices);
        let y_val: Vec<f64> = holdout
            .validation_indices
            .iter()
            .map(|&i| dataset.target()[i])
            .collect();
        Some(permutation_importance(&model, &x_val, &y_val, &names, cfg.repeats, cfg.seed)?)
    } else {
        None
    };
    let primary: &ImportanceReport = impurity.as_ref().or(permutation.as_ref()).expect("one method runs");

    let top8 = &primary.ranking[..8.min(primary.ranking.len())];
    let missing: Vec<&str> = EXPECTED_TOP_FEATURES
        .iter()
        .copied()
        .filter(|f| !top8.iter().any(|t| t == f))
        .collect();

    let mut out = Outputs::new(&cfg.output_dir);
    if cfg.emits(Emit::Csv) {
        out.add("importance.csv", primary.to_csv());
        if let (Some(_), Some(p)) = (&impurity, &permutation) {
            out.add("importance_permutation.csv", p.to_csv());
        }
    }
    if cfg.emits(Emit::Json) {
        out.add_json(
            "importance.json",
            &json!({
                "format_version": IMPORTANCE_FORMAT_VERSION,
                "run_config": cfg.to_json_value(),
                "model": model.family().display_name(),
                "n_train": train.len(),
                "n_validation": holdout.validation_indices.len(),
                "impurity": impurity,
                "permutation": permutation,
                "diagnostics": [{
                    "name": "expected_features_in_top8",
                    "passed": missing.is_empty(),
                    "detail": format!("top 8: {}; missing: {}", top8.join(", "), missing.join(", ")),
                }],
            }),
        );
    }
    if fitted {
        out.add("model.json", model.to_json()?);
    }
    out.write()?;

    let color = table::color_enabled(args.common.no_color);
    let mut text = String::new();
    for report in [&impurity, &permutation].into_iter().flatten() {
        text.push_str(&format!("{:?} importance ({}), top 10\n", report.method, model.family().display_name()));
        text.push_str(&table::importance_table(report, 10, color));
    }
    let status = if missing.is_empty() { "ok" } else { "warn" };
    text.push_str(&format!(
        "[{status}] expected_features_in_top8: missing {}\n",
        if missing.is_empty() { "none".to_string() } else { missing.join(", ") }
    ));
    stdout(&text);
    Ok(())
}

pub fn gen_data(args: &GenDataArgs) -> Result<()> {
    let text = super::gen_data::generate_csv(args.n, args.seed);
    match &args.out {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
            std::fs::write(path, text).map_err(|e| Error::io(path, e))
        }
        None => {
            stdout(&text);
            Ok(())
        }
    }
}

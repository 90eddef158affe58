//! Run configuration: built-in defaults, overridden by a JSON file,
//! overridden by command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::{DEFAULT_SEED, DEFAULT_SPLIT_RATIO};
use crate::error::{Error, Result};
use crate::evaluation::DEFAULT_K_FOLDS;
use crate::importance::Method;
use crate::models::{Family, ModelConfig};

pub const DEFAULT_REPEATS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emit {
    Json,
    Csv,
}

/// Fully resolved configuration; echoed into every emitted JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub data_path: Option<PathBuf>,
    pub seed: u64,
    pub split_ratio: f64,
    pub k_folds: usize,
    pub models: Vec<ModelConfig>,
    pub output_dir: PathBuf,
    pub emit: Vec<Emit>,
    /// `None` computes both importance methods.
    pub method: Option<Method>,
    pub repeats: usize,
    /// Worker threads (0 = all cores). Not echoed: results do not depend on it.
    #[serde(skip)]
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            data_path: None,
            seed: DEFAULT_SEED,
            split_ratio: DEFAULT_SPLIT_RATIO,
            k_folds: DEFAULT_K_FOLDS,
            models: ModelConfig::default_roster(),
            output_dir: PathBuf::from("out"),
            emit: vec![Emit::Json, Emit::Csv],
            method: None,
            repeats: DEFAULT_REPEATS,
            threads: 0,
        }
    }
}

/// A model given either by short name (`"knn"`) or as a full config object.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ModelSpec {
    Name(String),
    Config(ModelConfig),
}

impl ModelSpec {
    pub fn resolve(self) -> Result<ModelConfig> {
        match self {
            ModelSpec::Name(name) => Ok(ModelConfig::default_for(Family::parse(&name)?)),
            ModelSpec::Config(cfg) => Ok(cfg),
        }
    }
}

/// The config-file layer; every field is optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    pub data_path: Option<PathBuf>,
    pub seed: Option<u64>,
    pub split_ratio: Option<f64>,
    pub k_folds: Option<usize>,
    pub models: Option<Vec<ModelSpec>>,
    pub output_dir: Option<PathBuf>,
    pub emit: Option<Vec<Emit>>,
    pub method: Option<Method>,
    pub repeats: Option<usize>,
    pub threads: Option<usize>,
}

impl RunConfigFile {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
    }
}

/// Command-line overrides; `None` leaves the lower layer in place.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub data_path: Option<PathBuf>,
    pub seed: Option<u64>,
    pub split_ratio: Option<f64>,
    pub k_folds: Option<usize>,
    pub models: Option<String>,
    pub output_dir: Option<PathBuf>,
    pub emit: Option<String>,
    pub method: Option<Method>,
    pub repeats: Option<usize>,
    pub threads: Option<usize>,
}

pub fn parse_model_list(list: &str) -> Result<Vec<ModelConfig>> {
    let models: Vec<ModelConfig> = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| Family::parse(s).map(ModelConfig::default_for))
        .collect::<Result<_>>()?;
    if models.is_empty() {
        return Err(Error::InvalidConfig("--models lists no models".into()));
    }
    Ok(models)
}

pub fn parse_emit(list: &str) -> Result<Vec<Emit>> {
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| match s.trim() {
            "json" => Ok(Emit::Json),
            "csv" => Ok(Emit::Csv),
            other => Err(Error::InvalidConfig(format!("unknown emit format `{other}`"))),
        })
        .collect()
}

impl RunConfig {
    /// Applies `file` then `flags` over the defaults and validates the result.
    pub fn resolve(file: Option<RunConfigFile>, flags: Overrides) -> Result<Self> {
        let mut cfg = RunConfig::default();
        if let Some(file) = file {
            if let Some(v) = file.data_path {
                cfg.data_path = Some(v);
            }
            if let Some(v) = file.seed {
                cfg.seed = v;
            }
            if let Some(v) = file.split_ratio {
                cfg.split_ratio = v;
            }
            if let Some(v) = file.k_folds {
                cfg.k_folds = v;
            }
            if let Some(v) = file.models {
                cfg.models = v.into_iter().map(ModelSpec::resolve).collect::<Result<_>>()?;
            }
            if let Some(v) = file.output_dir {
                cfg.output_dir = v;
            }
            if let Some(v) = file.emit {
                cfg.emit = v;
            }
            if file.method.is_some() {
                cfg.method = file.method;
            }
            if let Some(v) = file.repeats {
                cfg.repeats = v;
            }
            if let Some(v) = file.threads {
                cfg.threads = v;
            }
        }

        if let Some(v) = flags.data_path {
            cfg.data_path = Some(v);
        }
        if let Some(v) = flags.seed {
            cfg.seed = v;
        }
        if let Some(v) = flags.split_ratio {
            cfg.split_ratio = v;
        }
        if let Some(v) = flags.k_folds {
            cfg.k_folds = v;
        }
        if let Some(v) = flags.models {
            cfg.models = parse_model_list(&v)?;
        }
        if let Some(v) = flags.output_dir {
            cfg.output_dir = v;
        }
        if let Some(v) = flags.emit {
            cfg.emit = parse_emit(&v)?;
        }
        if flags.method.is_some() {
            cfg.method = flags.method;
        }
        if let Some(v) = flags.repeats {
            cfg.repeats = v;
        }
        if let Some(v) = flags.threads {
            cfg.threads = v;
        }

        let seed = cfg.seed;
        cfg.models = cfg.models.into_iter().map(|m| m.with_root_seed(seed)).collect();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "split ratio must lie in (0, 1), got {}",
                self.split_ratio
            )));
        }
        if self.k_folds < 2 {
            return Err(Error::InvalidConfig("folds must be >= 2".into()));
        }
        if self.models.is_empty() {
            return Err(Error::InvalidConfig("no models configured".into()));
        }
        if self.repeats == 0 {
            return Err(Error::InvalidConfig("repeats must be >= 1".into()));
        }
        if self.emit.is_empty() {
            return Err(Error::InvalidConfig("emit lists no formats".into()));
        }
        for m in &self.models {
            m.validate()?;
        }
        Ok(())
    }

    pub fn emits(&self, format: Emit) -> bool {
        self.emit.contains(&format)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("run config is serializable")
    }
}

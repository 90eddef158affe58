//! Command-line front end: `describe`, `benchmark`, `importance`, `gen-data`.
//!
//! Exit codes: 0 success, 2 bad input (missing file, schema, parse or config
//! errors), 3 the computation itself failed.

pub mod commands;
pub mod config;
pub mod gen_data;
pub mod table;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::Error;
use crate::importance::Method;
pub use config::{Emit, Overrides, RunConfig, RunConfigFile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_FAILURE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "tabreg", version, about = "Benchmark regressors on batting statistics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Summary statistics for every column of the table.
    Describe(CommonArgs),
    /// Holdout and K-fold evaluation of the model roster.
    Benchmark(CommonArgs),
    /// Feature importance weights from a fitted tree ensemble.
    Importance(ImportanceArgs),
    /// Write a synthetic table with a known signal.
    GenData(GenDataArgs),
}

#[derive(Debug, Args, Clone, Default)]
pub struct CommonArgs {
    /// Input CSV.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Training fraction of the holdout split.
    #[arg(long)]
    pub split: Option<f64>,
    /// Number of cross-validation folds.
    #[arg(long)]
    pub folds: Option<usize>,
    /// Comma-separated model list, e.g. `knn,gb,svr`.
    #[arg(long)]
    pub models: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output formats: `json`, `csv` or `json,csv`.
    #[arg(long)]
    pub emit: Option<String>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Disable colored console output.
    #[arg(long)]
    pub no_color: bool,
}

#[derive(Debug, Args, Clone, Default)]
pub struct ImportanceArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// `impurity` or `permutation`; both are computed when omitted.
    #[arg(long)]
    pub method: Option<Method>,
    /// Shuffles per feature for permutation importance.
    #[arg(long)]
    pub repeats: Option<usize>,
    /// Previously saved model JSON to use instead of fitting one.
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Args, Clone)]
pub struct GenDataArgs {
    /// Number of rows.
    #[arg(short = 'n', long = "rows", default_value_t = 322)]
    pub n: usize,
    #[arg(long, default_value_t = crate::dataset::DEFAULT_SEED)]
    pub seed: u64,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl CommonArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            data_path: self.data.clone(),
            seed: self.seed,
            split_ratio: self.split,
            k_folds: self.folds,
            models: self.models.clone(),
            output_dir: self.out.clone(),
            emit: self.emit.clone(),
            threads: self.threads,
            ..Default::default()
        }
    }

    /// Merges defaults, the config file and these flags.
    pub fn resolve(&self, method: Option<Method>, repeats: Option<usize>) -> Result<RunConfig, Error> {
        let file = match &self.config {
            Some(path) => Some(RunConfigFile::read(path)?),
            None => None,
        };
        let mut flags = self.overrides();
        flags.method = method;
        flags.repeats = repeats;
        RunConfig::resolve(file, flags)
    }
}

pub fn exit_code(err: &Error) -> i32 {
    if err.is_input_error() {
        EXIT_INPUT
    } else {
        EXIT_FAILURE
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let result = match &cli.command {
        Command::Describe(a) => commands::describe(a),
        Command::Benchmark(a) => commands::benchmark(a),
        Command::Importance(a) => commands::importance(a),
        Command::GenData(a) => commands::gen_data(a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

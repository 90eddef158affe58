//! C ABI over the `tabreg` library.
//!
//! Handles are opaque pointers created by `tabreg_dataset_load_csv`,
//! `tabreg_dataset_from_arrays` or `tabreg_model_fit` and released with the
//! matching `*_free`. Every fallible call
//! returns a [`TabregStatus`]; on failure the message is available from
//! [`tabreg_last_error_message`] on the same thread until the next failing
//! call. Panics never cross the boundary: they are reported as
//! `TABREG_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use tabreg::dataset::{self, Dataset, RawTable, PERCENTILE_LEVELS};
use tabreg::evaluation::{fit_pipeline, mae, r_squared, rmse, Estimator, FittedPipeline};
use tabreg::{Error, Matrix, ModelConfig};

/// Number of feature columns every dataset and prediction matrix carries.
pub const TABREG_N_FEATURES: usize = 16;
const _: () = assert!(TABREG_N_FEATURES == dataset::N_FEATURES);
/// Number of percentile levels in [`TabregColumnSummary`] (1, 5, 10, 25, 50, 75, 90, 95, 99).
pub const TABREG_N_PERCENTILES: usize = 9;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TabregStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Schema = 4,
    Parse = 5,
    EmptyData = 6,
    InvalidConfig = 7,
    DimensionMismatch = 8,
    Numeric = 9,
    Unsupported = 10,
    Panic = 11,
}

/// A loaded, cleaned dataset.
pub struct TabregDataset {
    inner: Dataset,
}

/// A fitted model together with the feature scaler it was trained behind.
pub struct TabregModel {
    pipeline: FittedPipeline,
    name: CString,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TabregColumnSummary {
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
    /// Values at the levels 1, 5, 10, 25, 50, 75, 90, 95, 99.
    pub percentiles: [f64; TABREG_N_PERCENTILES],
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> TabregStatus {
    match err {
        Error::Io { .. } => TabregStatus::Io,
        Error::Schema { .. } | Error::UnknownColumn(_) => TabregStatus::Schema,
        Error::Parse { .. } | Error::Csv(_) | Error::Json(_) | Error::FormatVersion { .. } => {
            TabregStatus::Parse
        }
        Error::EmptyData | Error::EmptyVectors | Error::EmptyTrainingSet | Error::EmptyIndexSet => {
            TabregStatus::EmptyData
        }
        Error::InvalidConfig(_) | Error::KTooLarge { .. } | Error::BadK { .. } => {
            TabregStatus::InvalidConfig
        }
        Error::DimensionMismatch { .. }
        | Error::LengthMismatch { .. }
        | Error::IndexOutOfRange { .. } => TabregStatus::DimensionMismatch,
        Error::UnsupportedFamily(_) => TabregStatus::Unsupported,
        _ => TabregStatus::Numeric,
    }
}

struct Failure(TabregStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(TabregStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> TabregStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TabregStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_last_error(format!("internal panic: {message}"));
            TabregStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(TabregStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

/// Message of the last failed call on this thread, or NULL if none.
/// The pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn tabreg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tabreg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads a CSV, dropping rows with missing cells.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tabreg_dataset_load_csv(
    path: *const c_char,
    out: *mut *mut TabregDataset,
) -> TabregStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let path = str_arg(path, "path")?;
        let inner = RawTable::read_csv(path)?.into_dataset()?;
        *out = Box::into_raw(Box::new(TabregDataset { inner }));
        Ok(())
    })
}

/// Builds a dataset from a row-major `n_rows x TABREG_N_FEATURES` matrix
/// and `n_rows` targets.
///
/// # Safety
/// `features` must hold `n_rows * n_cols` values, `target` `n_rows` values.
#[no_mangle]
pub unsafe extern "C" fn tabreg_dataset_from_arrays(
    features: *const f64,
    n_rows: usize,
    n_cols: usize,
    target: *const f64,
    out: *mut *mut TabregDataset,
) -> TabregStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let len = n_rows.checked_mul(n_cols).ok_or_else(|| {
            Failure(TabregStatus::DimensionMismatch, "matrix size overflows".into())
        })?;
        let x = slice_arg(features, len, "features")?;
        let y = slice_arg(target, n_rows, "target")?;
        let matrix = Matrix::from_vec(n_rows, n_cols, x.to_vec())?;
        let inner = Dataset::new(matrix, y.to_vec())?;
        *out = Box::into_raw(Box::new(TabregDataset { inner }));
        Ok(())
    })
}

/// # Safety
/// `dataset` must be a live handle or NULL; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn tabreg_dataset_free(dataset: *mut TabregDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// # Safety
/// `dataset` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tabreg_dataset_n_rows(
    dataset: *const TabregDataset,
    out: *mut usize,
) -> TabregStatus {
    guard(|| {
        *out_arg(out, "out")? = ref_arg(dataset, "dataset")?.inner.n_rows();
        Ok(())
    })
}

/// Summary statistics of one column (any feature or `score`).
///
/// # Safety
/// `dataset` must be a live handle, `column` a NUL-terminated string and
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tabreg_dataset_describe(
    dataset: *const TabregDataset,
    column: *const c_char,
    out: *mut TabregColumnSummary,
) -> TabregStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let ds = ref_arg(dataset, "dataset")?;
        let s = dataset::describe(&ds.inner, str_arg(column, "column")?)?;
        let mut percentiles = [0.0; TABREG_N_PERCENTILES];
        for (slot, level) in percentiles.iter_mut().zip(PERCENTILE_LEVELS) {
            *slot = s.percentile(level).expect("every level is computed");
        }
        *out = TabregColumnSummary {
            count: s.count,
            mean: s.mean,
            std: s.std,
            min: s.min,
            max: s.max,
            percentiles,
        };
        Ok(())
    })
}

/// Fits a model on every row of `dataset`.
///
/// `config_json` is a model configuration object such as
/// `{"family":"KNN","k":5}`, or a bare family name such as `"gb"`.
/// Scale-sensitive families are trained behind a z-score scaler.
///
/// # Safety
/// `dataset` must be a live handle, `config_json` a NUL-terminated string
/// and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tabreg_model_fit(
    dataset: *const TabregDataset,
    config_json: *const c_char,
    seed: u64,
    out: *mut *mut TabregModel,
) -> TabregStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let ds = ref_arg(dataset, "dataset")?;
        let text = str_arg(config_json, "config_json")?.trim();
        let config: ModelConfig = if text.starts_with('{') {
            serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?
        } else {
            ModelConfig::default_for(tabreg::Family::parse(text)?)
        };
        let config = config.with_root_seed(seed);
        config.validate()?;
        let rows: Vec<usize> = (0..ds.inner.n_rows()).collect();
        let pipeline = fit_pipeline(&config, &ds.inner, &rows)?;
        let name = CString::new(config.name()).expect("family names have no NUL");
        *out = Box::into_raw(Box::new(TabregModel { pipeline, name }));
        Ok(())
    })
}

/// Predicts `n_rows` rows of a row-major `n_rows x n_cols` matrix into `out`.
///
/// # Safety
/// `features` must hold `n_rows * n_cols` values and `out` room for `n_rows`.
#[no_mangle]
pub unsafe extern "C" fn tabreg_model_predict(
    model: *const TabregModel,
    features: *const f64,
    n_rows: usize,
    n_cols: usize,
    out: *mut f64,
) -> TabregStatus {
    guard(|| {
        let model = ref_arg(model, "model")?;
        let len = n_rows.checked_mul(n_cols).ok_or_else(|| {
            Failure(TabregStatus::DimensionMismatch, "matrix size overflows".into())
        })?;
        let x = Matrix::from_vec(n_rows, n_cols, slice_arg(features, len, "features")?.to_vec())?;
        let pred = model.pipeline.predict(&x)?;
        if n_rows > 0 {
            if out.is_null() {
                return Err(null("out"));
            }
            std::slice::from_raw_parts_mut(out, n_rows).copy_from_slice(&pred);
        }
        Ok(())
    })
}

/// Display name of the model family; valid while the handle lives.
///
/// # Safety
/// `model` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn tabreg_model_name(model: *const TabregModel) -> *const c_char {
    model.as_ref().map_or(ptr::null(), |m| m.name.as_ptr())
}

/// # Safety
/// `model` must be a live handle or NULL; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn tabreg_model_free(model: *mut TabregModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

#[derive(Clone, Copy)]
#[repr(C)]
pub enum TabregMetric {
    RSquared = 0,
    Mae = 1,
    Rmse = 2,
}

/// Computes `metric` over two length-`n` vectors.
///
/// # Safety
/// `y_true` and `y_pred` must hold `n` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tabreg_metric(
    metric: TabregMetric,
    y_true: *const f64,
    y_pred: *const f64,
    n: usize,
    out: *mut f64,
) -> TabregStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let y = slice_arg(y_true, n, "y_true")?;
        let p = slice_arg(y_pred, n, "y_pred")?;
        *out = match metric {
            TabregMetric::RSquared => r_squared(y, p)?,
            TabregMetric::Mae => mae(y, p)?,
            TabregMetric::Rmse => rmse(y, p)?,
        };
        Ok(())
    })
}

//! C interface. Datasets, graphs and search results are opaque handles released
//! with the matching `la_*_free`. Functions return an [`LaStatus`]; after a
//! failure `la_last_error` describes it.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use local_adjust::ci::{auto_backend, CiBackend, Oracle, DEFAULT_ALPHA};
use local_adjust::data::Dataset;
use local_adjust::discovery::DEFAULT_MAX_COND;
use local_adjust::estimate::Estimator;
use local_adjust::graph::{parse_graph_spec, Mag};
use local_adjust::search::{run_ce2ls_by_name, SearchConfig, SearchOutcome, Verdict, DEFAULT_MAX_LEVEL};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    UnknownVariable = 5,
    InvalidConfig = 6,
    Search = 7,
    Estimate = 8,
    OutOfRange = 9,
    NoEstimate = 10,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaVerdict {
    Identifiable = 0,
    NoEffect = 10,
    NonIdentifiable = 11,
    Undetermined = 12,
}

impl From<Verdict> for LaVerdict {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::Identifiable => LaVerdict::Identifiable,
            Verdict::NoEffect => LaVerdict::NoEffect,
            Verdict::NonIdentifiable => LaVerdict::NonIdentifiable,
            Verdict::Undetermined => LaVerdict::Undetermined,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaSearchConfig {
    pub alpha: f64,
    pub max_cond: usize,
    pub max_level: usize,
    pub exhaustive: bool,
    pub widen: bool,
}

impl LaSearchConfig {
    fn to_search(self) -> Result<SearchConfig, Failure> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) || self.max_cond == 0 || self.max_level == 0 {
            return Err(Failure(LaStatus::InvalidConfig, "alpha must lie in (0, 1) and caps must be at least 1".into()));
        }
        Ok(SearchConfig {
            max_cond: self.max_cond,
            max_level: self.max_level,
            exhaustive: self.exhaustive,
            widen: self.widen,
            ..SearchConfig::default()
        })
    }
}

/// A loaded CSV dataset.
pub struct LaDataset(Dataset);

/// A maximal ancestral graph.
pub struct LaGraph(Mag);

/// Outcome of one search, with adjustment-set member names kept alive for the
/// handle's lifetime.
pub struct LaResult {
    outcome: SearchOutcome,
    sets: Vec<Vec<CString>>,
}

struct Failure(LaStatus, String);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> LaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            LaStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            LaStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(LaStatus::NullArgument, "null string argument".into()));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(LaStatus::InvalidUtf8, "string argument is not UTF-8".into()))
}

unsafe fn ref_arg<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure(LaStatus::NullArgument, "null handle".into()))
}

fn out_arg<T>(p: *mut T) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure(LaStatus::NullArgument, "null output pointer".into()))
    } else {
        Ok(())
    }
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next call on the same thread.
#[no_mangle]
pub extern "C" fn la_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Defaults: alpha 0.05, adjacency conditioning cap 3, set-size cap 5.
#[no_mangle]
pub extern "C" fn la_search_config_default() -> LaSearchConfig {
    LaSearchConfig {
        alpha: DEFAULT_ALPHA,
        max_cond: DEFAULT_MAX_COND,
        max_level: DEFAULT_MAX_LEVEL,
        exhaustive: false,
        widen: false,
    }
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn la_dataset_from_csv(path: *const c_char, out: *mut *mut LaDataset) -> LaStatus {
    guard(|| {
        out_arg(out)?;
        let path = str_arg(path)?;
        let data = Dataset::from_csv_path(path).map_err(|e| {
            let status = if std::path::Path::new(path).exists() { LaStatus::Parse } else { LaStatus::Io };
            Failure(status, format!("{path}: {e}"))
        })?;
        *out = Box::into_raw(Box::new(LaDataset(data)));
        Ok(())
    })
}

/// # Safety
/// `data` must be null or a handle from `la_dataset_from_csv`, freed once.
#[no_mangle]
pub unsafe extern "C" fn la_dataset_free(data: *mut LaDataset) {
    if !data.is_null() {
        drop(Box::from_raw(data));
    }
}

/// # Safety
/// `data` must be a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn la_dataset_shape(data: *const LaDataset, rows: *mut usize, cols: *mut usize) -> LaStatus {
    guard(|| {
        let d = ref_arg(data)?;
        out_arg(rows)?;
        out_arg(cols)?;
        *rows = d.0.n_rows();
        *cols = d.0.n_cols();
        Ok(())
    })
}

/// Parses a MAG in the plain-text graph format.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn la_graph_parse(text: *const c_char, out: *mut *mut LaGraph) -> LaStatus {
    guard(|| {
        out_arg(out)?;
        let text = str_arg(text)?;
        let mag = parse_graph_spec(text)
            .and_then(|s| s.to_mag())
            .map_err(|e| Failure(LaStatus::Parse, e.to_string()))?;
        *out = Box::into_raw(Box::new(LaGraph(mag)));
        Ok(())
    })
}

/// # Safety
/// `graph` must be null or a handle from `la_graph_parse`, freed once.
#[no_mangle]
pub unsafe extern "C" fn la_graph_free(graph: *mut LaGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

fn covariates(backend: &dyn CiBackend, w: &str, y: &str) -> Result<Vec<String>, Failure> {
    for v in [w, y] {
        if backend.index_of(v).is_none() {
            return Err(Failure(LaStatus::UnknownVariable, format!("unknown variable `{v}`")));
        }
    }
    Ok(backend.variables().iter().filter(|v| *v != w && *v != y).cloned().collect())
}

fn finish(outcome: SearchOutcome, out: *mut *mut LaResult) {
    let sets = outcome
        .psi_sets()
        .iter()
        .map(|s| s.iter().map(|n| CString::new(*n).unwrap_or_default()).collect())
        .collect();
    // SAFETY: checked non-null by the caller.
    unsafe { *out = Box::into_raw(Box::new(LaResult { outcome, sets })) };
}

/// Searches with statistical tests on `data`, using every other column as a
/// covariate, and estimates the effect with each adjustment set found.
///
/// # Safety
/// Handles and strings must be valid; `config` may be null for the defaults.
#[no_mangle]
pub unsafe extern "C" fn la_run_on_data(
    data: *const LaDataset,
    treatment: *const c_char,
    outcome: *const c_char,
    config: *const LaSearchConfig,
    out: *mut *mut LaResult,
) -> LaStatus {
    guard(|| {
        out_arg(out)?;
        let d = &ref_arg(data)?.0;
        let (w, y) = (str_arg(treatment)?, str_arg(outcome)?);
        let cfg = config.as_ref().copied().unwrap_or_else(|| la_search_config_default());
        let search = cfg.to_search()?;
        let backend = auto_backend(d, cfg.alpha).map_err(|e| Failure(LaStatus::InvalidConfig, e.to_string()))?;
        let x = covariates(backend.as_ref(), w, y)?;
        let est = Estimator::new(d, w, y, None).map_err(|e| Failure(LaStatus::Estimate, e.to_string()))?;
        let o = run_ce2ls_by_name(backend.as_ref(), w, y, &x, &search, Some(&est))
            .map_err(|e| Failure(LaStatus::Search, e.to_string()))?;
        finish(o, out);
        Ok(())
    })
}

/// Searches with m-separation in `graph` as the independence oracle. No effect
/// is estimated.
///
/// # Safety
/// Handles and strings must be valid; `config` may be null for the defaults.
#[no_mangle]
pub unsafe extern "C" fn la_run_on_graph(
    graph: *const LaGraph,
    treatment: *const c_char,
    outcome: *const c_char,
    config: *const LaSearchConfig,
    out: *mut *mut LaResult,
) -> LaStatus {
    guard(|| {
        out_arg(out)?;
        let g = &ref_arg(graph)?.0;
        let (w, y) = (str_arg(treatment)?, str_arg(outcome)?);
        let cfg = config.as_ref().copied().unwrap_or_else(|| la_search_config_default());
        let search = cfg.to_search()?;
        let oracle = Oracle::new(g.clone());
        let x = covariates(&oracle, w, y)?;
        let o = run_ce2ls_by_name(&oracle, w, y, &x, &search, None)
            .map_err(|e| Failure(LaStatus::Search, e.to_string()))?;
        finish(o, out);
        Ok(())
    })
}

/// # Safety
/// `result` must be null or a handle from `la_run_on_*`, freed once.
#[no_mangle]
pub unsafe extern "C" fn la_result_free(result: *mut LaResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// # Safety
/// `result` must be a live result handle.
#[no_mangle]
pub unsafe extern "C" fn la_result_verdict(result: *const LaResult, verdict: *mut LaVerdict) -> LaStatus {
    guard(|| {
        let r = ref_arg(result)?;
        out_arg(verdict)?;
        *verdict = r.outcome.verdict.into();
        Ok(())
    })
}

/// Average effect over the adjustment sets; `LA_STATUS_NO_ESTIMATE` when there
/// is none.
///
/// # Safety
/// `result` must be a live result handle.
#[no_mangle]
pub unsafe extern "C" fn la_result_ace(result: *const LaResult, ace: *mut f64) -> LaStatus {
    guard(|| {
        let r = ref_arg(result)?;
        out_arg(ace)?;
        *ace = r
            .outcome
            .ace()
            .ok_or_else(|| Failure(LaStatus::NoEstimate, "no effect was estimated".into()))?;
        Ok(())
    })
}

/// Total number of CI tests performed.
///
/// # Safety
/// `result` must be a live result handle.
#[no_mangle]
pub unsafe extern "C" fn la_result_ci_tests(result: *const LaResult, count: *mut u64) -> LaStatus {
    guard(|| {
        let r = ref_arg(result)?;
        out_arg(count)?;
        *count = r.outcome.stats.ci_tests;
        Ok(())
    })
}

/// # Safety
/// `result` must be a live result handle.
#[no_mangle]
pub unsafe extern "C" fn la_result_set_count(result: *const LaResult, count: *mut usize) -> LaStatus {
    guard(|| {
        let r = ref_arg(result)?;
        out_arg(count)?;
        *count = r.sets.len();
        Ok(())
    })
}

/// # Safety
/// `result` must be a live result handle.
#[no_mangle]
pub unsafe extern "C" fn la_result_set_size(result: *const LaResult, set: usize, size: *mut usize) -> LaStatus {
    guard(|| {
        let r = ref_arg(result)?;
        out_arg(size)?;
        *size = r
            .sets
            .get(set)
            .ok_or_else(|| Failure(LaStatus::OutOfRange, format!("no adjustment set {set}")))?
            .len();
        Ok(())
    })
}

/// Name of member `member` of adjustment set `set`, valid while `result` lives.
///
/// # Safety
/// `result` must be a live result handle.
#[no_mangle]
pub unsafe extern "C" fn la_result_set_member(
    result: *const LaResult,
    set: usize,
    member: usize,
    name: *mut *const c_char,
) -> LaStatus {
    guard(|| {
        let r = ref_arg(result)?;
        out_arg(name)?;
        let n = r
            .sets
            .get(set)
            .and_then(|s| s.get(member))
            .ok_or_else(|| Failure(LaStatus::OutOfRange, format!("no member {member} in adjustment set {set}")))?;
        *name = n.as_ptr();
        Ok(())
    })
}

/// Effect estimated with adjustment set `set`.
///
/// # Safety
/// `result` must be a live result handle.
#[no_mangle]
pub unsafe extern "C" fn la_result_set_effect(result: *const LaResult, set: usize, effect: *mut f64) -> LaStatus {
    guard(|| {
        let r = ref_arg(result)?;
        out_arg(effect)?;
        let e = r
            .outcome
            .psi
            .get(set)
            .ok_or_else(|| Failure(LaStatus::OutOfRange, format!("no adjustment set {set}")))?;
        *effect = e
            .effect
            .ok_or_else(|| Failure(LaStatus::NoEstimate, "no effect was estimated".into()))?;
        Ok(())
    })
}

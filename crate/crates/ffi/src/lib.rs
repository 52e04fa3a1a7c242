//! C interface. Every fallible call returns a [`FalsurStatus`]; on failure
//! the message is available from [`falsur_last_error`] on the same thread.
//! Objects cross the boundary as opaque handles that the caller releases
//! with the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use falsur::model::benchmarks::{self, Benchmark};
use falsur::refinement::{self, AristeoConfig, AristeoReport};
use falsur::search::{self, FalsificationConfig, FalsificationResult, SearchStrategy};
use falsur::signals::{SignalSet, TimeDomain};
use falsur::stl::{self, StlFormula};
use falsur::sysid::ModelStructure;
use falsur::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FalsurStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    /// Unknown id, bad budget or structure.
    Config = 3,
    /// Malformed requirement text.
    Syntax = 4,
    /// Shape mismatch between signals, formulas and models.
    Structural = 5,
    /// The model failed while running.
    Runtime = 6,
    Io = 7,
    Panic = 8,
}

pub struct FalsurBenchmark(Benchmark);

pub struct FalsurFormula(StlFormula);

pub struct FalsurTrace(SignalSet);

pub struct FalsurBaselineResult(FalsificationResult);

pub struct FalsurAristeoReport(AristeoReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

enum Failure {
    Null(&'static str),
    Utf8(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn status_of(e: &Error) -> FalsurStatus {
    match e {
        _ if e.is_runtime() => FalsurStatus::Runtime,
        Error::Iteration { source, .. } => status_of(source),
        Error::Config(_) => FalsurStatus::Config,
        Error::Syntax { .. } | Error::UnknownChannel { .. } | Error::Interval { .. } => {
            FalsurStatus::Syntax
        }
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => FalsurStatus::Io,
        _ => FalsurStatus::Structural,
    }
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> FalsurStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FalsurStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("`{what}` is null"));
            FalsurStatus::NullArgument
        }
        Ok(Err(Failure::Utf8(what))) => {
            set_error(format!("`{what}` is not valid UTF-8"));
            FalsurStatus::InvalidUtf8
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            FalsurStatus::Panic
        }
    }
}

unsafe fn utf8<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure::Utf8(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// The requirement text, or the benchmark's own when `stl` is null.
unsafe fn requirement(b: &Benchmark, stl: *const c_char) -> Result<StlFormula, Failure> {
    let text = if stl.is_null() {
        b.requirement
    } else {
        utf8(stl, "stl")?
    };
    Ok(stl::parse_stl(text, b.model.outputs())?)
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn falsur_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn falsur_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `id` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn falsur_benchmark_open(
    id: *const c_char,
    out: *mut *mut FalsurBenchmark,
) -> FalsurStatus {
    guard(|| {
        let b = benchmarks::get(utf8(id, "id")?)?;
        store(out, FalsurBenchmark(b))
    })
}

/// Number of control-point values that make up one test input.
///
/// # Safety
/// `b` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn falsur_benchmark_dimension(
    b: *const FalsurBenchmark,
    out: *mut usize,
) -> FalsurStatus {
    guard(|| {
        let b = handle(b, "benchmark")?;
        *out.as_mut().ok_or(Failure::Null("out"))? = b.0.profile.dimension();
        Ok(())
    })
}

/// # Safety
/// `b` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn falsur_benchmark_free(b: *mut FalsurBenchmark) {
    free(b);
}

/// Parses `text` against the `n` channel names in `channels`.
///
/// # Safety
/// `text` and each of the `n` entries of `channels` must be NUL-terminated
/// strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn falsur_formula_parse(
    text: *const c_char,
    channels: *const *const c_char,
    n: usize,
    out: *mut *mut FalsurFormula,
) -> FalsurStatus {
    guard(|| {
        let src = utf8(text, "text")?;
        if channels.is_null() && n > 0 {
            return Err(Failure::Null("channels"));
        }
        let names = (0..n)
            .map(|i| utf8(*channels.add(i), "channel"))
            .collect::<Result<Vec<_>, _>>()?;
        store(out, FalsurFormula(stl::parse_stl(src, &names)?))
    })
}

/// # Safety
/// `f` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn falsur_formula_free(f: *mut FalsurFormula) {
    free(f);
}

/// A trace on `[0, end]` sampled every `step`. `values` holds `len` samples
/// per channel, channel after channel; `len` must equal the number of grid
/// points.
///
/// # Safety
/// `names` must hold `channels` NUL-terminated strings and `values` must
/// hold `channels * len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn falsur_trace_new(
    end: f64,
    step: f64,
    names: *const *const c_char,
    channels: usize,
    values: *const f64,
    len: usize,
    out: *mut *mut FalsurTrace,
) -> FalsurStatus {
    guard(|| {
        if channels > 0 && (names.is_null() || values.is_null()) {
            return Err(Failure::Null(if names.is_null() {
                "names"
            } else {
                "values"
            }));
        }
        let domain = TimeDomain::new(end, step)?;
        let columns = (0..channels)
            .map(|c| {
                let name = utf8(*names.add(c), "name")?;
                let column = std::slice::from_raw_parts(values.add(c * len), len).to_vec();
                Ok((name, column))
            })
            .collect::<Result<Vec<_>, Failure>>()?;
        store(out, FalsurTrace(SignalSet::from_columns(domain, columns)?))
    })
}

/// # Safety
/// `t` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn falsur_trace_free(t: *mut FalsurTrace) {
    free(t);
}

/// Robustness of `f` on `t` at time `t0`.
///
/// # Safety
/// `f` and `t` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn falsur_robustness(
    f: *const FalsurFormula,
    t: *const FalsurTrace,
    t0: f64,
    out: *mut f64,
) -> FalsurStatus {
    guard(|| {
        let rho = stl::robustness(&handle(f, "formula")?.0, &handle(t, "trace")?.0, t0)?;
        *out.as_mut().ok_or(Failure::Null("out"))? = rho;
        Ok(())
    })
}

/// Baseline falsification. A null `stl` uses the benchmark's requirement;
/// `strategy` is `random`, `hill-climb` or `annealing`.
///
/// # Safety
/// `b` must be a live handle, `stl` null or a NUL-terminated string,
/// `strategy` a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn falsur_falsify(
    b: *const FalsurBenchmark,
    stl: *const c_char,
    strategy: *const c_char,
    max: usize,
    seed: u64,
    out: *mut *mut FalsurBaselineResult,
) -> FalsurStatus {
    guard(|| {
        let b = &handle(b, "benchmark")?.0;
        let formula = requirement(b, stl)?;
        let strategy = SearchStrategy::from_name(utf8(strategy, "strategy")?)?;
        let config = FalsificationConfig::new(max, strategy, seed);
        let r = search::falsify(b.model.as_ref(), &b.profile, &formula, &config)?;
        store(out, FalsurBaselineResult(r))
    })
}

/// # Safety
/// `r` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn falsur_baseline_falsified(r: *const FalsurBaselineResult) -> bool {
    r.as_ref().is_some_and(|r| r.0.falsified)
}

/// # Safety
/// `r` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn falsur_baseline_executions(r: *const FalsurBaselineResult) -> usize {
    r.as_ref().map_or(0, |r| r.0.executions_used)
}

/// NaN for a null handle.
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn falsur_baseline_best_objective(r: *const FalsurBaselineResult) -> f64 {
    r.as_ref().map_or(f64::NAN, |r| r.0.best_objective)
}

/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn falsur_baseline_free(r: *mut FalsurBaselineResult) {
    free(r);
}

/// Surrogate-assisted falsification. `structure` is `arx`, `armax`, `bj`
/// or `ss` with `n_orders` orders; `strategy` drives the search on the
/// surrogate; `max` is the per-iteration surrogate budget and `max_ref`
/// the iteration cap.
///
/// # Safety
/// `b` must be a live handle, `stl` null or a NUL-terminated string,
/// `strategy` and `structure` NUL-terminated strings, `orders` must hold `n_orders`
/// values and `out` must be writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn falsur_aristeo(
    b: *const FalsurBenchmark,
    stl: *const c_char,
    strategy: *const c_char,
    structure: *const c_char,
    orders: *const usize,
    n_orders: usize,
    max: usize,
    max_ref: usize,
    seed: u64,
    out: *mut *mut FalsurAristeoReport,
) -> FalsurStatus {
    guard(|| {
        let b = &handle(b, "benchmark")?.0;
        let formula = requirement(b, stl)?;
        if orders.is_null() && n_orders > 0 {
            return Err(Failure::Null("orders"));
        }
        let orders = if n_orders == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(orders, n_orders)
        };
        let structure = ModelStructure::from_orders(utf8(structure, "structure")?, orders)?;
        let strategy = SearchStrategy::from_name(utf8(strategy, "strategy")?)?;
        let config = AristeoConfig::new(
            structure,
            max_ref,
            FalsificationConfig::new(max, strategy, seed),
        );
        let r = refinement::run(b.model.as_ref(), &b.profile, &formula, &config)?;
        store(out, FalsurAristeoReport(r))
    })
}

/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn falsur_aristeo_falsified(r: *const FalsurAristeoReport) -> bool {
    r.as_ref().is_some_and(|r| r.0.falsified())
}

/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn falsur_aristeo_mut_executions(r: *const FalsurAristeoReport) -> usize {
    r.as_ref().map_or(0, |r| r.0.mut_executions)
}

/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn falsur_aristeo_refinements(r: *const FalsurAristeoReport) -> usize {
    r.as_ref().map_or(0, |r| r.0.refinements_performed)
}

/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn falsur_aristeo_best_objective(r: *const FalsurAristeoReport) -> f64 {
    r.as_ref().map_or(f64::NAN, |r| r.0.best_objective)
}

/// The full report as JSON; release with [`falsur_string_free`].
///
/// # Safety
/// `r` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn falsur_aristeo_to_json(
    r: *const FalsurAristeoReport,
    out: *mut *mut c_char,
) -> FalsurStatus {
    guard(|| {
        let json = handle(r, "report")?.0.to_json()?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        *out = CString::new(json).unwrap_or_default().into_raw();
        Ok(())
    })
}

/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn falsur_aristeo_free(r: *mut FalsurAristeoReport) {
    free(r);
}

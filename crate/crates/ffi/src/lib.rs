//! C ABI for hexsolve.
//!
//! Handles are opaque and owned by the caller: every `*_new`/`hex_solve`
//! result must be released with the matching `*_free`. Strings passed in
//! must be NUL-terminated UTF-8. On failure a function returns a status
//! other than `HEX_STATUS_OK` and [`hex_last_error`] describes it.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hexsolve::extsources::Registry;
use hexsolve::learning::MinimizeOptions;
use hexsolve::pipeline::{run_text, Error, Options};
use hexsolve::safety::SafetyMode;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HexStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    LinkError = 4,
    UnsafeProgram = 5,
    GroundingError = 6,
    SolveError = 7,
    IoError = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HexSafetyMode {
    Liberal = 0,
    Strong = 1,
    Disabled = 2,
}

/// Solver configuration with the builtin external sources.
pub struct HexSolver {
    registry: Registry,
    options: Options,
}

/// Answer sets of one `hex_solve` call, each rendered as `{a, b(c)}`.
pub struct HexResult {
    answer_sets: Vec<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: HexStatus, msg: impl Into<String>) -> HexStatus {
    set_error(msg);
    status
}

fn status_of(e: &Error) -> HexStatus {
    match e {
        Error::Parse(_) | Error::ParseFile { .. } => HexStatus::ParseError,
        Error::Link(_) | Error::Plugin(_) => HexStatus::LinkError,
        Error::Unsafe(_) => HexStatus::UnsafeProgram,
        Error::Ground(_) => HexStatus::GroundingError,
        Error::Solve(_) => HexStatus::SolveError,
        Error::Csv(_) | Error::Input(_) => HexStatus::IoError,
    }
}

fn guarded(f: impl FnOnce() -> HexStatus) -> HexStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(HexStatus::Panic, "internal panic"))
}

/// Creates a solver with liberal safety and minimized io-learning.
#[no_mangle]
pub extern "C" fn hex_solver_new() -> *mut HexSolver {
    Box::into_raw(Box::new(HexSolver {
        registry: Registry::with_builtins(),
        options: Options::default(),
    }))
}

/// # Safety
/// `solver` must be null or a pointer from [`hex_solver_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hex_solver_free(solver: *mut HexSolver) {
    if !solver.is_null() {
        drop(Box::from_raw(solver));
    }
}

/// # Safety
/// `solver` must be null or a live solver handle.
#[no_mangle]
pub unsafe extern "C" fn hex_solver_set_safety(solver: *mut HexSolver, mode: HexSafetyMode) -> HexStatus {
    let Some(s) = solver.as_mut() else {
        return fail(HexStatus::NullPointer, "solver is null");
    };
    s.options.safety = match mode {
        HexSafetyMode::Liberal => SafetyMode::Liberal,
        HexSafetyMode::Strong => SafetyMode::Strong,
        HexSafetyMode::Disabled => SafetyMode::Disabled,
    };
    HexStatus::Ok
}

/// Turns io-nogood learning and nogood minimization on or off.
///
/// # Safety
/// `solver` must be null or a live solver handle.
#[no_mangle]
pub unsafe extern "C" fn hex_solver_set_learning(
    solver: *mut HexSolver,
    io_learning: bool,
    minimize: bool,
) -> HexStatus {
    let Some(s) = solver.as_mut() else {
        return fail(HexStatus::NullPointer, "solver is null");
    };
    s.options.solve.io_learning = io_learning;
    s.options.solve.minimize = if minimize {
        MinimizeOptions::ALL
    } else {
        MinimizeOptions::NONE
    };
    HexStatus::Ok
}

/// Solves `program`, storing at most `max_answer_sets` answer sets (0: all)
/// in a new result written to `*out`. On error `*out` is set to null.
///
/// # Safety
/// `solver` must be a live solver handle, `program` a NUL-terminated string
/// and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn hex_solve(
    solver: *const HexSolver,
    program: *const c_char,
    max_answer_sets: usize,
    out: *mut *mut HexResult,
) -> HexStatus {
    if out.is_null() {
        return fail(HexStatus::NullPointer, "out is null");
    }
    *out = ptr::null_mut();
    let Some(s) = solver.as_ref() else {
        return fail(HexStatus::NullPointer, "solver is null");
    };
    if program.is_null() {
        return fail(HexStatus::NullPointer, "program is null");
    }
    let Ok(text) = CStr::from_ptr(program).to_str() else {
        return fail(HexStatus::InvalidUtf8, "program is not valid UTF-8");
    };
    guarded(|| {
        let mut options = s.options;
        options.solve.max_answer_sets = (max_answer_sets > 0).then_some(max_answer_sets);
        match run_text(text, &s.registry, &options) {
            Ok(outcome) => {
                let answer_sets = outcome
                    .answer_sets
                    .iter()
                    .map(|a| CString::new(a.to_string()).expect("no NUL in answer sets"))
                    .collect();
                *out = Box::into_raw(Box::new(HexResult { answer_sets }));
                HexStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// Number of answer sets in `result`; 0 for null.
///
/// # Safety
/// `result` must be null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn hex_result_count(result: *const HexResult) -> usize {
    result.as_ref().map_or(0, |r| r.answer_sets.len())
}

/// The `index`-th answer set, or null when out of range. The string is
/// owned by `result`.
///
/// # Safety
/// `result` must be null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn hex_result_answer_set(result: *const HexResult, index: usize) -> *const c_char {
    result
        .as_ref()
        .and_then(|r| r.answer_sets.get(index))
        .map_or(ptr::null(), |s| s.as_ptr())
}

/// # Safety
/// `result` must be null or a pointer from [`hex_solve`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hex_result_free(result: *mut HexResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Message of the last failure on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hex_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

//! C ABI over `robust_la`. Every function returns an [`RlaStatus`] (or a
//! sentinel for plain accessors) and never unwinds across the boundary.
//! The message of the last failure on the calling thread is available from
//! [`rla_last_error_message`].
//!
//! Handles are created by `rla_*_new`/`rla_solve_*` functions and released
//! with the matching `rla_*_free`. Strings returned as `char *` are owned by
//! the caller and released with [`rla_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use robust_la::benchmarks::{build_bending, build_truss, BendingConfig, TrussConfig};
use robust_la::limit_analysis::{self, AarcSolution, LimitAnalysisProblem};
use robust_la::reformulate::Method;
use robust_la::solver::{SolveStatus, SolverSettings};
use robust_la::Error;

/// Outcome of an FFI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RlaStatus {
    Ok = 0,
    NullPointer = 1,
    /// Malformed JSON, bad dimensions or parameters, non-UTF-8 strings.
    InvalidInput = 2,
    /// Method not available for the set, or too many vertices.
    Unsupported = 3,
    /// The (robust) problem has no feasible stress field.
    Infeasible = 4,
    /// The load factor is unbounded.
    Unbounded = 5,
    /// Iteration limit or numerical breakdown.
    SolverFailure = 6,
    Panic = 7,
}

/// Reformulation of robust strength constraints.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RlaMethod {
    Homothetic = 0,
    VertexExact = 1,
    BertsimasSim = 2,
    Roos = 3,
}

impl From<RlaMethod> for Method {
    fn from(m: RlaMethod) -> Self {
        match m {
            RlaMethod::Homothetic => Method::Homothetic,
            RlaMethod::VertexExact => Method::VertexExact,
            RlaMethod::BertsimasSim => Method::BertsimasSim,
            RlaMethod::Roos => Method::Roos,
        }
    }
}

/// Solver settings; pass `NULL` wherever accepted for the defaults.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RlaSettings {
    pub tol: f64,
    pub max_iter: usize,
}

/// A limit analysis problem.
pub struct RlaProblem(LimitAnalysisProblem);

/// An adjustable robust solution with its affine decision rule.
pub struct RlaAarc(AarcSolution);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> RlaStatus {
    match e {
        Error::Solver { status, .. } => match status {
            SolveStatus::PrimalInfeasible => RlaStatus::Infeasible,
            SolveStatus::DualInfeasible => RlaStatus::Unbounded,
            _ => RlaStatus::SolverFailure,
        },
        Error::UnsupportedMethod { .. } | Error::VertexBudgetExceeded(_) => RlaStatus::Unsupported,
        _ => RlaStatus::InvalidInput,
    }
}

struct Fail(RlaStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

/// Runs `f`, recording failures and containing panics.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> RlaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RlaStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("internal error: {msg}"));
            RlaStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(RlaStatus::NullPointer, format!("{what} is NULL"))
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(RlaStatus::InvalidInput, format!("{what} is not valid UTF-8")))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn settings(p: *const RlaSettings) -> Result<SolverSettings, Fail> {
    match p.as_ref() {
        None => Ok(SolverSettings::default()),
        Some(s) if s.tol > 0.0 && s.tol < 1.0 && s.max_iter > 0 => Ok(SolverSettings::with_tol(s.tol, s.max_iter)),
        Some(s) => Err(Fail(RlaStatus::InvalidInput, format!("bad settings: tol {} max_iter {}", s.tol, s.max_iter))),
    }
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

fn check_dim(got: usize, want: usize, what: &str) -> Result<(), Fail> {
    if got != want {
        return Err(Fail(RlaStatus::InvalidInput, format!("{what} has length {got}, expected {want}")));
    }
    Ok(())
}

/// Message of the last failure on this thread, or `NULL`. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rla_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rla_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn rla_settings_default() -> RlaSettings {
    let s = SolverSettings::default();
    RlaSettings {
        tol: s.tol,
        max_iter: s.max_iter,
    }
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn rla_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a problem from its JSON form.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rla_problem_from_json(json: *const c_char, out_problem: *mut *mut RlaProblem) -> RlaStatus {
    guard(|| {
        let slot = out(out_problem, "out_problem")?;
        *slot = ptr::null_mut();
        let p = LimitAnalysisProblem::from_json(str_arg(json, "json")?)?;
        *slot = Box::into_raw(Box::new(RlaProblem(p)));
        Ok(())
    })
}

/// Bending benchmark with `n` fibers, degradation `eta` and budget `gamma`.
///
/// # Safety
/// `out_problem` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rla_problem_bending(n: usize, eta: f64, gamma: f64, zero_average: bool, out_problem: *mut *mut RlaProblem) -> RlaStatus {
    guard(|| {
        let slot = out(out_problem, "out_problem")?;
        *slot = ptr::null_mut();
        let mut cfg = BendingConfig::new(n, eta, gamma);
        if zero_average {
            cfg = cfg.zero_average();
        }
        *slot = Box::into_raw(Box::new(RlaProblem(build_bending(&cfg)?)));
        Ok(())
    })
}

/// Default truss benchmark with load amplitude `alpha`.
///
/// # Safety
/// `settings` may be `NULL`; `out_problem` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rla_problem_truss(alpha: f64, settings_ptr: *const RlaSettings, out_problem: *mut *mut RlaProblem) -> RlaStatus {
    guard(|| {
        let slot = out(out_problem, "out_problem")?;
        *slot = ptr::null_mut();
        let st = settings(settings_ptr)?;
        let p = build_truss(&TrussConfig::default().with_alpha(alpha), &st)?;
        *slot = Box::into_raw(Box::new(RlaProblem(p)));
        Ok(())
    })
}

/// # Safety
/// `problem` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn rla_problem_free(problem: *mut RlaProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// JSON form of a problem, or `NULL` on failure.
///
/// # Safety
/// `problem` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn rla_problem_to_json(problem: *const RlaProblem) -> *mut c_char {
    let mut s = ptr::null_mut();
    guard(|| {
        s = into_c_string(as_ref(problem, "problem")?.0.to_json());
        Ok(())
    });
    s
}

/// Number of stress unknowns, 0 for `NULL`.
///
/// # Safety
/// `problem` must be a valid handle or `NULL`.
#[no_mangle]
pub unsafe extern "C" fn rla_problem_num_stresses(problem: *const RlaProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.0.num_stresses())
}

/// Dimension of the uncertainty set, 0 without one or for `NULL`.
///
/// # Safety
/// `problem` must be a valid handle or `NULL`.
#[no_mangle]
pub unsafe extern "C" fn rla_problem_set_dim(problem: *const RlaProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.0.set_dim())
}

/// Nominal load factor.
///
/// # Safety
/// `problem` must be a valid handle, `settings` valid or `NULL`, `out_lambda` valid.
#[no_mangle]
pub unsafe extern "C" fn rla_solve_nominal(problem: *const RlaProblem, settings_ptr: *const RlaSettings, out_lambda: *mut f64) -> RlaStatus {
    guard(|| {
        let lam = out(out_lambda, "out_lambda")?;
        *lam = f64::NAN;
        let s = limit_analysis::solve_nominal(&as_ref(problem, "problem")?.0, &settings(settings_ptr)?)?;
        *lam = s.lambda;
        Ok(())
    })
}

/// Static robust load factor.
///
/// # Safety
/// As for [`rla_solve_nominal`].
#[no_mangle]
pub unsafe extern "C" fn rla_solve_static_rc(problem: *const RlaProblem, method: RlaMethod, settings_ptr: *const RlaSettings, out_lambda: *mut f64) -> RlaStatus {
    guard(|| {
        let lam = out(out_lambda, "out_lambda")?;
        *lam = f64::NAN;
        let s = limit_analysis::solve_static_rc(&as_ref(problem, "problem")?.0, method.into(), &settings(settings_ptr)?)?;
        *lam = s.lambda;
        Ok(())
    })
}

/// Load factor at the realization `zeta` (length `rla_problem_set_dim`).
/// An infeasible realization succeeds with `-INFINITY`.
///
/// # Safety
/// `zeta` must point to `len` doubles; other pointers as for [`rla_solve_nominal`].
#[no_mangle]
pub unsafe extern "C" fn rla_evaluate_at(problem: *const RlaProblem, zeta: *const f64, len: usize, settings_ptr: *const RlaSettings, out_lambda: *mut f64) -> RlaStatus {
    guard(|| {
        let lam = out(out_lambda, "out_lambda")?;
        *lam = f64::NAN;
        let p = &as_ref(problem, "problem")?.0;
        let z = slice(zeta, len, "zeta")?;
        check_dim(len, p.set_dim(), "zeta")?;
        *lam = limit_analysis::evaluate_at(p, z, &settings(settings_ptr)?)?.lambda;
        Ok(())
    })
}

/// Minimum load factor over the vertices of the set, with the lowest
/// minimizing vertex index.
///
/// # Safety
/// `out_argmin` may be `NULL`; other pointers as for [`rla_solve_nominal`].
#[no_mangle]
pub unsafe extern "C" fn rla_vertex_oracle(problem: *const RlaProblem, settings_ptr: *const RlaSettings, out_min: *mut f64, out_argmin: *mut usize) -> RlaStatus {
    guard(|| {
        let min = out(out_min, "out_min")?;
        *min = f64::NAN;
        let v = limit_analysis::worst_case_vertex_oracle(&as_ref(problem, "problem")?.0, &settings(settings_ptr)?)?;
        *min = v.lambda_min;
        if let Some(a) = out_argmin.as_mut() {
            *a = v.argmin;
        }
        Ok(())
    })
}

/// Minimum load factor over `count` seeded samples of the set.
///
/// # Safety
/// As for [`rla_solve_nominal`].
#[no_mangle]
pub unsafe extern "C" fn rla_sampling_oracle(problem: *const RlaProblem, seed: u64, count: usize, settings_ptr: *const RlaSettings, out_min: *mut f64) -> RlaStatus {
    guard(|| {
        let min = out(out_min, "out_min")?;
        *min = f64::NAN;
        let s = limit_analysis::worst_case_sampling_oracle(&as_ref(problem, "problem")?.0, seed, count, &settings(settings_ptr)?)?;
        *min = s.stats.min;
        Ok(())
    })
}

/// Affinely adjustable robust solution.
///
/// # Safety
/// `out_solution` must be a valid pointer; other pointers as for [`rla_solve_nominal`].
#[no_mangle]
pub unsafe extern "C" fn rla_solve_aarc(problem: *const RlaProblem, method: RlaMethod, settings_ptr: *const RlaSettings, out_solution: *mut *mut RlaAarc) -> RlaStatus {
    guard(|| {
        let slot = out(out_solution, "out_solution")?;
        *slot = ptr::null_mut();
        let s = limit_analysis::solve_aarc(&as_ref(problem, "problem")?.0, method.into(), &settings(settings_ptr)?)?;
        *slot = Box::into_raw(Box::new(RlaAarc(s)));
        Ok(())
    })
}

/// # Safety
/// `solution` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn rla_aarc_free(solution: *mut RlaAarc) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// Guaranteed load factor `λ̄`, NaN for `NULL`.
///
/// # Safety
/// `solution` must be a valid handle or `NULL`.
#[no_mangle]
pub unsafe extern "C" fn rla_aarc_lambda(solution: *const RlaAarc) -> f64 {
    solution.as_ref().map_or(f64::NAN, |s| s.0.lambda)
}

/// Number of stress unknowns of the rule, 0 for `NULL`.
///
/// # Safety
/// `solution` must be a valid handle or `NULL`.
#[no_mangle]
pub unsafe extern "C" fn rla_aarc_num_stresses(solution: *const RlaAarc) -> usize {
    solution.as_ref().map_or(0, |s| s.0.rule.sigma0.len())
}

/// Number of uncertain parameters of the rule, 0 for `NULL`.
///
/// # Safety
/// `solution` must be a valid handle or `NULL`.
#[no_mangle]
pub unsafe extern "C" fn rla_aarc_set_dim(solution: *const RlaAarc) -> usize {
    solution.as_ref().map_or(0, |s| s.0.rule.lambda_cols.len())
}

/// Evaluates the decision rule at `zeta`: the stresses go to `out_sigma`
/// (length `rla_aarc_num_stresses`) and the load factor to `out_lambda`.
/// Either output may be `NULL`.
///
/// # Safety
/// `zeta` must point to `zeta_len` doubles and `out_sigma` to `sigma_len`.
#[no_mangle]
pub unsafe extern "C" fn rla_aarc_rule_at(
    solution: *const RlaAarc,
    zeta: *const f64,
    zeta_len: usize,
    out_sigma: *mut f64,
    sigma_len: usize,
    out_lambda: *mut f64,
) -> RlaStatus {
    guard(|| {
        let rule = &as_ref(solution, "solution")?.0.rule;
        let z = slice(zeta, zeta_len, "zeta")?;
        check_dim(zeta_len, rule.lambda_cols.len(), "zeta")?;
        if !out_sigma.is_null() {
            check_dim(sigma_len, rule.sigma0.len(), "out_sigma")?;
            std::slice::from_raw_parts_mut(out_sigma, sigma_len).copy_from_slice(&rule.sigma_at(z));
        }
        if let Some(l) = out_lambda.as_mut() {
            *l = rule.lambda_at(z);
        }
        Ok(())
    })
}

/// JSON form of the solution and its rule, or `NULL` on failure.
///
/// # Safety
/// `solution` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn rla_aarc_to_json(solution: *const RlaAarc) -> *mut c_char {
    let mut s = ptr::null_mut();
    guard(|| {
        let text = serde_json::to_string(&as_ref(solution, "solution")?.0)
            .map_err(|e| Fail(RlaStatus::InvalidInput, e.to_string()))?;
        s = into_c_string(text);
        Ok(())
    });
    s
}

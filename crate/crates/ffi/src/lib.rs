//! C ABI over `hhbound`.
//!
//! Every function returns an [`HhStatus`]; results go through out-pointers.
//! On failure the message is kept per thread and read with
//! [`hh_last_error_message`]. Functions are opaque [`HhFunction`] handles
//! created by [`hh_function_parse`] and released by [`hh_function_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use hhbound::bounds::{constant_a, constant_m};
use hhbound::convexity::{check_alpha_m_convex, GridSpec};
use hhbound::harness::{run_suite, verify_case, CaseOutcome, SuiteConfig, VerifyOptions};
use hhbound::quadrature::{integrate, sup_norm};
use hhbound::{
    BoundCase, ConvexityParams, DifferentiablePair, DomainSpec, Error, Interval, RealFunction, TheoremId,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HhStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OutsideDomain = 3,
    NoConvergence = 4,
    Precondition = 5,
    Io = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HhTheorem {
    T13 = 0,
    T14 = 1,
    C11 = 2,
    C12 = 3,
    T21 = 4,
    T22 = 5,
    C21 = 6,
    C22 = 7,
}

impl From<HhTheorem> for TheoremId {
    fn from(t: HhTheorem) -> Self {
        match t {
            HhTheorem::T13 => TheoremId::T13,
            HhTheorem::T14 => TheoremId::T14,
            HhTheorem::C11 => TheoremId::C11,
            HhTheorem::C12 => TheoremId::C12,
            HhTheorem::T21 => TheoremId::T21,
            HhTheorem::T22 => TheoremId::T22,
            HhTheorem::C21 => TheoremId::C21,
            HhTheorem::C22 => TheoremId::C22,
        }
    }
}

/// Opaque registry function.
pub struct HhFunction(RealFunction);

/// Interval, evaluation point and class parameters of one case.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HhCase {
    pub a: f64,
    pub b: f64,
    pub x: f64,
    pub q: f64,
    pub alpha: f64,
    pub m: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HhReport {
    /// False when the convexity hypothesis was rejected; the other fields
    /// are then zero except the witness.
    pub hypothesis_holds: bool,
    pub lhs: f64,
    pub lhs_error_estimate: f64,
    pub rhs: f64,
    pub slack: f64,
    pub tightness: f64,
    pub holds: bool,
    pub witness: HhWitness,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HhWitness {
    pub present: bool,
    pub x: f64,
    pub y: f64,
    pub t: f64,
    pub gap: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HhSuiteSummary {
    pub reports: usize,
    pub violations: usize,
    pub hypothesis_rejections: usize,
    pub errors: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let message = CString::new(message.replace('\0', " ")).expect("NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(message));
}

fn status_of(e: &Error) -> HhStatus {
    match e {
        Error::OutsideDomain { .. } | Error::NonFinite { .. } | Error::DomainExit { .. } => HhStatus::OutsideDomain,
        Error::NoConvergence { .. } => HhStatus::NoConvergence,
        Error::Precondition(_) | Error::DerivativeMismatch { .. } => HhStatus::Precondition,
        Error::Io(_) => HhStatus::Io,
        _ => HhStatus::InvalidArgument,
    }
}

/// Runs `body`, turning errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), (HhStatus, String)>) -> HhStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => HhStatus::Ok,
        Ok(Err((status, message))) => {
            set_last_error(message);
            status
        }
        Err(panic) => {
            let message = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("internal panic: {message}"));
            HhStatus::Panic
        }
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, (HhStatus, String)>;
}

impl<T> OrStatus<T> for hhbound::Result<T> {
    fn or_status(self) -> Result<T, (HhStatus, String)> {
        self.map_err(|e| (status_of(&e), e.to_string()))
    }
}

fn null(name: &str) -> (HhStatus, String) {
    (HhStatus::NullPointer, format!("{name} is NULL"))
}

unsafe fn read_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, (HhStatus, String)> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (HhStatus::InvalidArgument, format!("{name} is not valid UTF-8")))
}

unsafe fn handle<'a>(p: *const HhFunction, name: &str) -> Result<&'a RealFunction, (HhStatus, String)> {
    p.as_ref().map(|h| &h.0).ok_or_else(|| null(name))
}

unsafe fn write<T>(out: *mut T, value: T, name: &str) -> Result<(), (HhStatus, String)> {
    if out.is_null() {
        return Err(null(name));
    }
    out.write(value);
    Ok(())
}

/// Message of the last failure on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hh_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses a `name:p1:p2` family spec into a new handle.
///
/// # Safety
/// `spec` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hh_function_parse(spec: *const c_char, out: *mut *mut HhFunction) -> HhStatus {
    guard(|| {
        let spec = read_str(spec, "spec")?;
        let f = RealFunction::parse(spec).or_status()?;
        write(out, Box::into_raw(Box::new(HhFunction(f))), "out")
    })
}

/// Releases a handle. NULL is ignored.
///
/// # Safety
/// `f` must come from [`hh_function_parse`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn hh_function_free(f: *mut HhFunction) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// # Safety
/// `f` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hh_function_eval(f: *const HhFunction, t: f64, out: *mut f64) -> HhStatus {
    guard(|| {
        let v = handle(f, "f")?.eval(t).or_status()?;
        write(out, v, "out")
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hh_constant_m(a: f64, b: f64, x: f64, alpha: f64, out: *mut f64) -> HhStatus {
    guard(|| {
        let v = constant_m(Interval::new(a, b).or_status()?, x, alpha).or_status()?;
        write(out, v, "out")
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hh_constant_a(a: f64, b: f64, x: f64, alpha: f64, out: *mut f64) -> HhStatus {
    guard(|| {
        let v = constant_a(Interval::new(a, b).or_status()?, x, alpha).or_status()?;
        write(out, v, "out")
    })
}

/// `∫ₐᵇ f` by adaptive Simpson. `error_estimate` may be NULL.
///
/// # Safety
/// `f` must be a live handle; `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hh_integrate(
    f: *const HhFunction,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    value: *mut f64,
    error_estimate: *mut f64,
) -> HhStatus {
    guard(|| {
        let r = integrate(handle(f, "f")?, Interval::new(a, b).or_status()?, abs_tol, rel_tol).or_status()?;
        write(value, r.value, "value")?;
        if !error_estimate.is_null() {
            error_estimate.write(r.error_estimate);
        }
        Ok(())
    })
}

/// # Safety
/// `g` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hh_sup_norm(g: *const HhFunction, a: f64, b: f64, out: *mut f64) -> HhStatus {
    guard(|| {
        let v = sup_norm(handle(g, "g")?, Interval::new(a, b).or_status()?).or_status()?;
        write(out, v, "out")
    })
}

/// Checks the hypothesis of `theorem` for `|f'|^q` and, when it holds,
/// compares the quadrature left-hand side with the bound. The domain of
/// `f` is taken as `[0, b/m]`.
///
/// # Safety
/// `f` and `g` must be live handles; `case` must point to an [`HhCase`];
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hh_verify(
    f: *const HhFunction,
    g: *const HhFunction,
    case: *const HhCase,
    theorem: HhTheorem,
    out: *mut HhReport,
) -> HhStatus {
    guard(|| {
        let (f, g) = (handle(f, "f")?, handle(g, "g")?);
        let c = case.as_ref().ok_or_else(|| null("case"))?;
        let iv = Interval::new(c.a, c.b).or_status()?;
        let params = ConvexityParams::new(c.alpha, c.m).or_status()?;
        let domain = DomainSpec::new(c.b / c.m).or_status()?;
        let pair = DifferentiablePair::from_function(f.clone(), domain).or_status()?;
        let bc = BoundCase::with_measured_sup(pair, g.clone(), iv, c.x, c.q, params).or_status()?;
        let report = match verify_case(&bc, theorem.into(), &VerifyOptions::default()).or_status()? {
            CaseOutcome::Verified(r) => HhReport {
                hypothesis_holds: true,
                lhs: r.lhs,
                lhs_error_estimate: r.lhs_error_estimate,
                rhs: r.rhs,
                slack: r.slack,
                tightness: r.tightness,
                holds: r.holds,
                witness: HhWitness::default(),
            },
            CaseOutcome::HypothesisRejected(v) => HhReport { witness: witness(v.witness), ..HhReport::default() },
        };
        write(out, report, "out")
    })
}

fn witness(w: Option<hhbound::convexity::Witness>) -> HhWitness {
    w.map_or_else(HhWitness::default, |w| HhWitness { present: true, x: w.x, y: w.y, t: w.t, gap: w.gap })
}

/// Grid check of `(α, m)`-convexity of `f` on `[0, b_star]`. `holds` is
/// written and, on failure, the worst counterexample goes to `witness`
/// (which may be NULL).
///
/// # Safety
/// `f` must be a live handle; `holds` must be writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn hh_check_convexity(
    f: *const HhFunction,
    b_star: f64,
    alpha: f64,
    m: f64,
    nx: usize,
    ny: usize,
    nt: usize,
    holds: *mut bool,
    witness_out: *mut HhWitness,
) -> HhStatus {
    guard(|| {
        let f = handle(f, "f")?;
        let params = ConvexityParams::for_definition(alpha, m).or_status()?;
        let grid = GridSpec::new(nx, ny, nt).or_status()?;
        let v = check_alpha_m_convex(f, DomainSpec::new(b_star).or_status()?, params, grid).or_status()?;
        write(holds, v.holds, "holds")?;
        if !witness_out.is_null() {
            witness_out.write(witness(v.witness));
        }
        Ok(())
    })
}

/// Runs a suite given as JSON and writes `report.csv` and `report.json`.
/// `out_dir` overrides the configured directory when not NULL.
///
/// # Safety
/// `config_json` must be a NUL-terminated string, `out_dir` NULL or one;
/// `summary` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hh_run_suite_json(
    config_json: *const c_char,
    out_dir: *const c_char,
    summary: *mut HhSuiteSummary,
) -> HhStatus {
    guard(|| {
        let mut config = SuiteConfig::from_json(read_str(config_json, "config_json")?).or_status()?;
        if !out_dir.is_null() {
            config.output_dir = PathBuf::from(read_str(out_dir, "out_dir")?);
        }
        let r = run_suite(&config).or_status()?;
        let s = HhSuiteSummary {
            reports: r.reports.len(),
            violations: r.violations,
            hypothesis_rejections: r.hypothesis_rejections,
            errors: r.errors.len(),
        };
        write(summary, s, "summary")
    })
}

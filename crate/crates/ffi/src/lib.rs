//! C ABI for mechkit.
//!
//! Environments live behind an opaque [`MkEnv`] handle created from the JSON
//! environment document. Every fallible function returns an [`MkStatus`];
//! on failure a message is available from [`mk_last_error`] on the same
//! thread. Results are returned as JSON strings owned by the caller and
//! released with [`mk_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mechkit::audit::{self, AuditOptions};
use mechkit::cli::{parse_payment_spec, resolve_rule};
use mechkit::{json, spm, Environment, MechError, OptionRule, TypeProfile};

/// Status codes; the non-zero library codes match the CLI's exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MkStatus {
    Ok = 0,
    /// Malformed JSON, bad spec strings, out-of-range profiles.
    Input = 1,
    /// The option rule produced a negative cycle (it is not SE or affine).
    NegativeCycle = 2,
    /// An enumeration exceeded its cap.
    Capacity = 3,
    /// An internal soundness assertion failed.
    Invariant = 4,
    /// A required pointer argument was null.
    NullPointer = 5,
    /// A string argument was not valid UTF-8.
    Utf8 = 6,
    /// A Rust panic was caught at the boundary.
    Panic = 7,
}

/// Opaque environment handle.
pub struct MkEnv {
    env: Environment,
    rule: Option<OptionRule>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(err: &MechError) -> MkStatus {
    match err {
        MechError::Input(_) | MechError::Unsupported(_) => MkStatus::Input,
        MechError::NegativeCycle { .. } => MkStatus::NegativeCycle,
        MechError::Capacity { .. } => MkStatus::Capacity,
        MechError::Invariant(_) => MkStatus::Invariant,
    }
}

struct Failure(MkStatus, String);

impl From<MechError> for Failure {
    fn from(e: MechError) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

/// Runs `body` behind a panic guard and records any failure message.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> MkStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => MkStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside mechkit".into());
            MkStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(MkStatus::NullPointer, format!("{what} is null")));
    }
    // SAFETY: the caller guarantees a NUL-terminated string that outlives the call.
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| Failure(MkStatus::Utf8, format!("{what} is not valid UTF-8")))
}

unsafe fn opt_str_arg<'a>(p: *const c_char, what: &str) -> Result<Option<&'a str>, Failure> {
    if p.is_null() {
        Ok(None)
    } else {
        // SAFETY: forwarded caller guarantee.
        unsafe { str_arg(p, what) }.map(Some)
    }
}

unsafe fn env_arg<'a>(p: *const MkEnv) -> Result<&'a MkEnv, Failure> {
    // SAFETY: the caller guarantees `p` is null or a live handle from `mk_env_from_json`.
    unsafe { p.as_ref() }.ok_or_else(|| Failure(MkStatus::NullPointer, "environment handle is null".into()))
}

fn out_string(out: *mut *mut c_char, text: String) -> Result<(), Failure> {
    let c = CString::new(text).map_err(|_| Failure(MkStatus::Invariant, "result contains NUL".into()))?;
    // SAFETY: checked non-null by the callers before any work is done.
    unsafe { *out = c.into_raw() };
    Ok(())
}

fn null_out<T>(out: *mut *mut T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        Err(Failure(MkStatus::NullPointer, format!("{what} is null")))
    } else {
        // SAFETY: non-null, writable per the caller contract.
        unsafe { *out = ptr::null_mut() };
        Ok(())
    }
}

/// Parses a JSON environment document into a new handle.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable. On
/// success `*out` owns a handle to release with [`mk_env_free`].
#[no_mangle]
pub unsafe extern "C" fn mk_env_from_json(json: *const c_char, out: *mut *mut MkEnv) -> MkStatus {
    guard(|| {
        null_out(out, "out")?;
        // SAFETY: caller contract.
        let text = unsafe { str_arg(json, "json") }?;
        let (env, rule) = json::parse_environment(text)?;
        // SAFETY: `out` was checked non-null above.
        unsafe { *out = Box::into_raw(Box::new(MkEnv { env, rule })) };
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `env` must be null or a handle from [`mk_env_from_json`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mk_env_free(env: *mut MkEnv) {
    if !env.is_null() {
        // SAFETY: caller contract; ownership returns to Rust exactly once.
        drop(unsafe { Box::from_raw(env) });
    }
}

/// Number of agents, or 0 for a null handle.
///
/// # Safety
/// `env` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mk_env_agent_count(env: *const MkEnv) -> usize {
    // SAFETY: caller contract.
    unsafe { env.as_ref() }.map_or(0, |e| e.env.agent_count())
}

/// Number of types of `agent`, or 0 when the handle is null or the agent
/// is out of range.
///
/// # Safety
/// `env` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mk_env_domain_size(env: *const MkEnv, agent: usize) -> usize {
    // SAFETY: caller contract.
    match unsafe { env.as_ref() } {
        Some(e) if agent < e.env.agent_count() => e.env.domain_size(agent),
        _ => 0,
    }
}

fn mechanism(env: &MkEnv, rule: Option<&str>, payment: Option<&str>) -> Result<(OptionRule, spm::PaymentRule), Failure> {
    let rule = resolve_rule(rule, &env.env, env.rule.clone())?;
    let payment = parse_payment_spec(payment.unwrap_or("proposed"), &rule)?;
    Ok((rule, payment))
}

/// Runs the mechanism at one profile and writes the outcome JSON
/// (`option`, `payments`, `utilities`, `budget`) to `*out`.
///
/// `rule` and `payment` use the CLI spec syntax; null selects the
/// document's rule (else `se:lowest`) and `proposed`.
///
/// # Safety
/// `env` must be a live handle; `rule`/`payment` null or NUL-terminated;
/// `profile` must point to `len` readable values (may be null when `len`
/// is 0); `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mk_run(
    env: *const MkEnv,
    rule: *const c_char,
    payment: *const c_char,
    profile: *const usize,
    len: usize,
    out: *mut *mut c_char,
) -> MkStatus {
    guard(|| {
        null_out(out, "out")?;
        // SAFETY: caller contract for every pointer argument.
        let (env, rule, payment) = unsafe {
            (env_arg(env)?, opt_str_arg(rule, "rule")?, opt_str_arg(payment, "payment")?)
        };
        let indices = if len == 0 {
            Vec::new()
        } else if profile.is_null() {
            return Err(Failure(MkStatus::NullPointer, "profile is null".into()));
        } else {
            // SAFETY: `profile` points to `len` readable values.
            unsafe { std::slice::from_raw_parts(profile, len) }.to_vec()
        };
        let (rule, payment) = mechanism(env, rule, payment)?;
        let outcome = spm::run_mechanism(&env.env, &rule, &TypeProfile::new(indices), &payment)?;
        out_string(out, serde_json::to_string(&outcome).expect("outcomes serialize"))
    })
}

/// Exhaustively audits SE, DSIC and IR (plus the oracle comparison when
/// `oracle` is true) and writes the report JSON to `*out`.
///
/// # Safety
/// As for [`mk_run`].
#[no_mangle]
pub unsafe extern "C" fn mk_audit(
    env: *const MkEnv,
    rule: *const c_char,
    payment: *const c_char,
    oracle: bool,
    out: *mut *mut c_char,
) -> MkStatus {
    guard(|| {
        null_out(out, "out")?;
        // SAFETY: caller contract.
        let (env, rule, payment) = unsafe {
            (env_arg(env)?, opt_str_arg(rule, "rule")?, opt_str_arg(payment, "payment")?)
        };
        let (rule, payment) = mechanism(env, rule, payment)?;
        let report = audit::audit_mechanism(
            &env.env,
            &rule,
            &payment,
            AuditOptions {
                dominance: false,
                oracle,
            },
        )?;
        out_string(out, serde_json::to_string(&report).expect("reports serialize"))
    })
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next mechkit call on this thread.
#[no_mangle]
pub extern "C" fn mk_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned through an `out` parameter. Null is ignored.
///
/// # Safety
/// `s` must be null or a string produced by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mk_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: caller contract; the string came from `CString::into_raw`.
        drop(unsafe { CString::from_raw(s) });
    }
}

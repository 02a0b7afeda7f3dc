//! C ABI over `mermin3`.
//!
//! Every fallible function returns a [`Mermin3Status`]; on failure the
//! message is available from [`mermin3_last_error`] on the same thread.
//! Handles are opaque, owned by the caller, and released with the matching
//! `*_free` function. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mermin3::bell::{
    bell_value, build_mermin, build_sigma, BellOperator, MeasurementSettings, Observable,
};
use mermin3::optimizer::{maximize, Functional, OptimizationConfig};
use mermin3::qcore::{DensityMatrix, PureState, C64};
use mermin3::shotsim::{mermin_settings, run_experiment, ShotPlan};
use mermin3::stateclasses::{decode, ghz, noisy_ghz, PartitionClass};
use mermin3::witness::{
    classify, estimate_m3, load_correlations, BoundSet, Classification, CorrelationRecord,
};
use mermin3::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mermin3Status {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    MalformedInput = 3,
    Io = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mermin3Class {
    FullSeparable = 0,
    Bisep12_3 = 1,
    Bisep13_2 = 2,
    Bisep1_23 = 3,
    Unrestricted = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mermin3Functional {
    MerminFixed = 0,
    SigmaGeneral = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mermin3Classification {
    ConsistentWithLhv = 0,
    ViolatesLhvAndBiseparableOrthogonal = 1,
    ViolatesBiseparableAnyObservables = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct Mermin3Estimate {
    pub value: f64,
    pub std_error: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct Mermin3Verdict {
    pub estimate: f64,
    pub std_error: f64,
    /// May be ±infinity when the standard error is zero.
    pub sigma_above_2: f64,
    pub sigma_above_2sqrt2: f64,
    pub classification: Mermin3Classification,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct Mermin3Optimum {
    pub best_value: f64,
    pub best_restart: usize,
    pub iterations: usize,
}

/// A three-qubit state, pure or mixed.
pub struct Mermin3State(StateInner);

enum StateInner {
    Pure(PureState),
    Mixed(DensityMatrix),
}

impl Mermin3State {
    fn density(&self) -> DensityMatrix {
        match &self.0 {
            StateInner::Pure(p) => p.to_density(),
            StateInner::Mixed(m) => m.clone(),
        }
    }
}

/// `<M3>` or a Σ combination with fixed settings.
pub struct Mermin3BellOperator(BellOperator);

/// A loaded correlation record.
pub struct Mermin3Record(CorrelationRecord);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs replaced");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> Mermin3Status {
    match err {
        Error::Rejected(_)
        | Error::DimensionMismatch { .. }
        | Error::InvalidState(_)
        | Error::NonHermitianExpectation(_) => Mermin3Status::InvalidArgument,
        Error::Format { .. }
        | Error::Invariant { .. }
        | Error::NoSettings
        | Error::MissingSetting(_)
        | Error::DuplicateSetting(_) => Mermin3Status::MalformedInput,
        Error::Io(_) => Mermin3Status::Io,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> Mermin3Status {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => Mermin3Status::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            Mermin3Status::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            Mermin3Status::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn emit<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null("out"));
    }
    *out = value;
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mermin3_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failure on this thread, or NULL. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn mermin3_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mermin3_state_ghz(out: *mut *mut Mermin3State) -> Mermin3Status {
    guard(|| emit(out, Mermin3State(StateInner::Pure(ghz()))))
}

/// White-noise GHZ with visibility in [0, 1].
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mermin3_state_noisy_ghz(
    visibility: f64,
    out: *mut *mut Mermin3State,
) -> Mermin3Status {
    guard(|| emit(out, Mermin3State(StateInner::Mixed(noisy_ghz(visibility)?))))
}

/// Pure state from `len` amplitudes split into real and imaginary parts.
/// `im` may be NULL for real amplitudes. The vector must have unit norm.
///
/// # Safety
/// `re` (and `im` when non-NULL) must point to `len` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn mermin3_state_from_amplitudes(
    re: *const f64,
    im: *const f64,
    len: usize,
    out: *mut *mut Mermin3State,
) -> Mermin3Status {
    guard(|| {
        if re.is_null() {
            return Err(Failure::Null("re"));
        }
        let re = std::slice::from_raw_parts(re, len);
        let amps: Vec<C64> = if im.is_null() {
            re.iter().map(|&r| C64::new(r, 0.0)).collect()
        } else {
            let im = std::slice::from_raw_parts(im, len);
            re.iter().zip(im).map(|(&r, &i)| C64::new(r, i)).collect()
        };
        emit(out, Mermin3State(StateInner::Pure(PureState::new(amps)?)))
    })
}

/// # Safety
/// `state` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mermin3_state_free(state: *mut Mermin3State) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mermin3_bell_mermin(out: *mut *mut Mermin3BellOperator) -> Mermin3Status {
    guard(|| emit(out, Mermin3BellOperator(build_mermin())))
}

/// Σ operator from 18 doubles: unit Bloch vectors a, a', b, b', c, c'.
///
/// # Safety
/// `bloch` must point to 18 readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mermin3_bell_sigma(
    bloch: *const f64,
    out: *mut *mut Mermin3BellOperator,
) -> Mermin3Status {
    guard(|| {
        if bloch.is_null() {
            return Err(Failure::Null("bloch"));
        }
        let v = std::slice::from_raw_parts(bloch, 18);
        let o = |k: usize| Observable::new([v[3 * k], v[3 * k + 1], v[3 * k + 2]]);
        let settings = MeasurementSettings {
            a: o(0)?,
            a_prime: o(1)?,
            b: o(2)?,
            b_prime: o(3)?,
            c: o(4)?,
            c_prime: o(5)?,
        };
        emit(out, Mermin3BellOperator(build_sigma(&settings)))
    })
}

/// # Safety
/// `op` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mermin3_bell_free(op: *mut Mermin3BellOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// # Safety
/// `state` and `op` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mermin3_bell_value(
    state: *const Mermin3State,
    op: *const Mermin3BellOperator,
    out: *mut f64,
) -> Mermin3Status {
    guard(|| {
        let state = deref(state, "state")?;
        let op = &deref(op, "op")?.0;
        let v = match &state.0 {
            StateInner::Pure(p) => bell_value(p, op)?,
            StateInner::Mixed(m) => bell_value(m, op)?,
        };
        write_out(out, v)
    })
}

/// Loads a correlation file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mermin3_record_load(
    path: *const c_char,
    out: *mut *mut Mermin3Record,
) -> Mermin3Status {
    guard(|| {
        if path.is_null() {
            return Err(Failure::Null("path"));
        }
        let path = CStr::from_ptr(path).to_string_lossy().into_owned();
        emit(out, Mermin3Record(load_correlations(path)?))
    })
}

/// Parses a correlation record from JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mermin3_record_from_json(
    json: *const c_char,
    out: *mut *mut Mermin3Record,
) -> Mermin3Status {
    guard(|| {
        if json.is_null() {
            return Err(Failure::Null("json"));
        }
        let text = CStr::from_ptr(json).to_string_lossy();
        emit(out, Mermin3Record(CorrelationRecord::from_json_str(&text)?))
    })
}

/// Number of entries, or 0 for NULL.
///
/// # Safety
/// `record` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mermin3_record_len(record: *const Mermin3Record) -> usize {
    record.as_ref().map_or(0, |r| r.0.entries.len())
}

/// # Safety
/// `record` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mermin3_record_free(record: *mut Mermin3Record) {
    if !record.is_null() {
        drop(Box::from_raw(record));
    }
}

/// `<M3>` from the four Mermin settings of a record, errors in quadrature.
///
/// # Safety
/// `record` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mermin3_estimate_m3(
    record: *const Mermin3Record,
    out: *mut Mermin3Estimate,
) -> Mermin3Status {
    guard(|| {
        let e = estimate_m3(&deref(record, "record")?.0)?;
        write_out(
            out,
            Mermin3Estimate {
                value: e.value,
                std_error: e.std_error,
            },
        )
    })
}

/// Classifies an estimate against the default bounds 2 and 2√2 with
/// confidence multiplier `k`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mermin3_classify(
    value: f64,
    std_error: f64,
    k: f64,
    out: *mut Mermin3Verdict,
) -> Mermin3Status {
    guard(|| {
        let v = classify(value, std_error, &BoundSet::default(), k)?;
        let classification = match v.classification {
            Classification::ConsistentWithLhv => Mermin3Classification::ConsistentWithLhv,
            Classification::ViolatesLhvAndBiseparableOrthogonal => {
                Mermin3Classification::ViolatesLhvAndBiseparableOrthogonal
            }
            Classification::ViolatesBiseparableAnyObservables => {
                Mermin3Classification::ViolatesBiseparableAnyObservables
            }
        };
        write_out(
            out,
            Mermin3Verdict {
                estimate: v.estimate,
                std_error: v.std_error,
                sigma_above_2: v.sigma_above_2,
                sigma_above_2sqrt2: v.sigma_above_2sqrt2,
                classification,
            },
        )
    })
}

/// Simulates `shots` measurements of each Mermin setting and returns the
/// estimated correlations as a record.
///
/// # Safety
/// `state` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mermin3_simulate_mermin(
    state: *const Mermin3State,
    shots: u64,
    seed: u64,
    out: *mut *mut Mermin3Record,
) -> Mermin3Status {
    guard(|| {
        let plan = ShotPlan {
            state: deref(state, "state")?.density(),
            description: "c-api".into(),
            settings: mermin_settings(),
            shots,
            seed,
        };
        emit(out, Mermin3Record(run_experiment(&plan)?.record))
    })
}

/// Multi-start maximization of the functional over a class. `best_state`
/// may be NULL; otherwise it receives a new handle to the maximizer.
///
/// # Safety
/// `out` must be writable; `best_state`, when non-NULL, must be writable.
#[no_mangle]
pub unsafe extern "C" fn mermin3_optimize(
    class: Mermin3Class,
    functional: Mermin3Functional,
    free_settings: bool,
    restarts: usize,
    seed: u64,
    out: *mut Mermin3Optimum,
    best_state: *mut *mut Mermin3State,
) -> Mermin3Status {
    guard(|| {
        let class = match class {
            Mermin3Class::FullSeparable => PartitionClass::FullSeparable,
            Mermin3Class::Bisep12_3 => PartitionClass::Bisep12_3,
            Mermin3Class::Bisep13_2 => PartitionClass::Bisep13_2,
            Mermin3Class::Bisep1_23 => PartitionClass::Bisep1_23,
            Mermin3Class::Unrestricted => PartitionClass::Unrestricted,
        };
        let functional = match functional {
            Mermin3Functional::MerminFixed => Functional::MerminFixed,
            Mermin3Functional::SigmaGeneral => Functional::SigmaGeneral,
        };
        let cfg = OptimizationConfig {
            restarts,
            seed,
            optimize_settings: free_settings,
            ..Default::default()
        };
        let r = maximize(class, functional, &cfg)?;
        write_out(
            out,
            Mermin3Optimum {
                best_value: r.best_value,
                best_restart: r.best_restart,
                iterations: r.iterations,
            },
        )?;
        if !best_state.is_null() {
            emit(
                best_state,
                Mermin3State(StateInner::Pure(decode(&r.best_state)?)),
            )?;
        }
        Ok(())
    })
}

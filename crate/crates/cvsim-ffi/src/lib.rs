//! C ABI surface for the cvsim Gaussian-state simulator.
//!
//! Conventions:
//! - Every fallible function returns a `CvsimStatus`; `CVSIM_OK` (0) means
//!   success. On failure a human-readable message is stored per thread and
//!   can be fetched with `cvsim_last_error`.
//! - States are opaque handles created by the constructors below and must be
//!   released with `cvsim_state_free`. Strings returned through `char **`
//!   out-parameters must be released with `cvsim_string_free`.
//! - Quadrature ordering is interleaved (x1, p1, x2, p2, ...) and the vacuum
//!   variance is 1. Angles are in radians.

use std::cell::RefCell;
use std::ffi::{c_char, c_double, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use cvsim::cluster::{build_cluster4, ClusterPreset};
use cvsim::dsl::{compile, parse};
use cvsim::elements::EprParams;
use cvsim::gaussian::{fidelity, GaussianState};
use cvsim::protocols::{qnd_offline_apply, teleport, TeleportConfig};

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CvsimStatus {
    /// The call succeeded.
    CvsimOk = 0,
    /// A required pointer argument was null.
    CvsimErrNullArgument = 1,
    /// A string argument was not valid UTF-8.
    CvsimErrInvalidUtf8 = 2,
    /// A numeric argument was outside its valid range.
    CvsimErrInvalidParameter = 3,
    /// The requested state or operation is not physical.
    CvsimErrUnphysical = 4,
    /// Circuit source failed to parse or compile.
    CvsimErrParse = 5,
    /// A buffer was too small for the requested data.
    CvsimErrBufferTooSmall = 6,
    /// The library panicked internally; the handle states are unchanged.
    CvsimErrInternal = 7,
}

/// Opaque Gaussian state handle.
pub struct CvsimState {
    inner: GaussianState,
}

/// Four-mode cluster layouts accepted by `cvsim_cluster4`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CvsimClusterShape {
    /// Chain 1-2-3-4.
    CvsimClusterLinear = 0,
    /// Star with one three-neighbor hub.
    CvsimClusterTShape = 1,
    /// Four-cycle.
    CvsimClusterDiamond = 2,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized: String = msg.chars().map(|c| if c == '\0' { ' ' } else { c }).collect();
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(sanitized).unwrap_or_default());
}

fn fail(status: CvsimStatus, msg: &str) -> CvsimStatus {
    set_error(msg);
    status
}

fn classify(err: &cvsim::Error) -> CvsimStatus {
    match err {
        cvsim::Error::Unphysical { .. }
        | cvsim::Error::NotSymmetric { .. }
        | cvsim::Error::NotSymplectic { .. } => CvsimStatus::CvsimErrUnphysical,
        _ => CvsimStatus::CvsimErrInvalidParameter,
    }
}

fn guard(f: impl FnOnce() -> CvsimStatus) -> CvsimStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(CvsimStatus::CvsimErrInternal, "internal panic"),
    }
}

/// Writes a freshly boxed state through `out`.
///
/// # Safety
/// `out` must be a valid writable pointer.
unsafe fn emit(out: *mut *mut CvsimState, state: GaussianState) -> CvsimStatus {
    *out = Box::into_raw(Box::new(CvsimState { inner: state }));
    CvsimStatus::CvsimOk
}

/// Returns the message of the most recent error on this thread. The pointer
/// stays valid until the next failing call on the same thread. Never null.
#[no_mangle]
pub extern "C" fn cvsim_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Creates an `n_modes`-mode vacuum state.
///
/// # Safety
/// `out` must be a valid writable pointer.
#[no_mangle]
pub unsafe extern "C" fn cvsim_state_vacuum(
    n_modes: usize,
    out: *mut *mut CvsimState,
) -> CvsimStatus {
    guard(|| {
        if out.is_null() {
            return fail(CvsimStatus::CvsimErrNullArgument, "out pointer is null");
        }
        if n_modes == 0 {
            return fail(CvsimStatus::CvsimErrInvalidParameter, "need at least one mode");
        }
        emit(out, GaussianState::vacuum(n_modes))
    })
}

/// Creates a single-mode coherent state with mean quadratures (`x`, `p`).
///
/// # Safety
/// `out` must be a valid writable pointer.
#[no_mangle]
pub unsafe extern "C" fn cvsim_state_coherent(
    x: c_double,
    p: c_double,
    out: *mut *mut CvsimState,
) -> CvsimStatus {
    guard(|| {
        if out.is_null() {
            return fail(CvsimStatus::CvsimErrNullArgument, "out pointer is null");
        }
        emit(out, GaussianState::coherent(x, p))
    })
}

/// Creates a single-mode squeezed vacuum with variance `v_sq` along the axis
/// rotated by `angle` and `v_anti` along the orthogonal axis.
///
/// # Safety
/// `out` must be a valid writable pointer.
#[no_mangle]
pub unsafe extern "C" fn cvsim_state_squeezed(
    v_sq: c_double,
    v_anti: c_double,
    angle: c_double,
    out: *mut *mut CvsimState,
) -> CvsimStatus {
    guard(|| {
        if out.is_null() {
            return fail(CvsimStatus::CvsimErrNullArgument, "out pointer is null");
        }
        match GaussianState::squeezed_vacuum(v_sq, v_anti, angle) {
            Ok(s) => emit(out, s),
            Err(e) => fail(classify(&e), &e.to_string()),
        }
    })
}

/// Tensor product of two states, `a` first.
///
/// # Safety
/// `a` and `b` must be valid state handles and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn cvsim_state_tensor(
    a: *const CvsimState,
    b: *const CvsimState,
    out: *mut *mut CvsimState,
) -> CvsimStatus {
    guard(|| {
        if a.is_null() || b.is_null() || out.is_null() {
            return fail(CvsimStatus::CvsimErrNullArgument, "state or out pointer is null");
        }
        emit(out, (*a).inner.tensor(&(*b).inner))
    })
}

/// Releases a state handle. Null is ignored.
///
/// # Safety
/// `state` must be null or a handle returned by this library that has not
/// been freed before.
#[no_mangle]
pub unsafe extern "C" fn cvsim_state_free(state: *mut CvsimState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Number of modes of a state; 0 if the handle is null.
///
/// # Safety
/// `state` must be null or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn cvsim_state_n_modes(state: *const CvsimState) -> usize {
    if state.is_null() {
        0
    } else {
        (*state).inner.n_modes()
    }
}

/// Copies the mean quadrature vector (length `2 * n_modes`) into `buf`.
///
/// # Safety
/// `state` must be a valid handle and `buf` writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn cvsim_state_mean(
    state: *const CvsimState,
    buf: *mut c_double,
    len: usize,
) -> CvsimStatus {
    guard(|| {
        if state.is_null() || buf.is_null() {
            return fail(CvsimStatus::CvsimErrNullArgument, "state or buffer is null");
        }
        let mean = (*state).inner.mean();
        if len < mean.len() {
            return fail(
                CvsimStatus::CvsimErrBufferTooSmall,
                &format!("mean needs {} doubles, buffer holds {len}", mean.len()),
            );
        }
        for (i, v) in mean.iter().enumerate() {
            *buf.add(i) = *v;
        }
        CvsimStatus::CvsimOk
    })
}

/// Copies the covariance matrix row-major (length `(2 n)^2`) into `buf`.
///
/// # Safety
/// `state` must be a valid handle and `buf` writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn cvsim_state_cov(
    state: *const CvsimState,
    buf: *mut c_double,
    len: usize,
) -> CvsimStatus {
    guard(|| {
        if state.is_null() || buf.is_null() {
            return fail(CvsimStatus::CvsimErrNullArgument, "state or buffer is null");
        }
        let cov = (*state).inner.cov();
        let dim = cov.nrows();
        if len < dim * dim {
            return fail(
                CvsimStatus::CvsimErrBufferTooSmall,
                &format!("covariance needs {} doubles, buffer holds {len}", dim * dim),
            );
        }
        for r in 0..dim {
            for c in 0..dim {
                *buf.add(r * dim + c) = cov[(r, c)];
            }
        }
        CvsimStatus::CvsimOk
    })
}

/// Uhlmann fidelity between two single-mode states, written to `out`.
///
/// # Safety
/// `a` and `b` must be valid handles and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn cvsim_fidelity(
    a: *const CvsimState,
    b: *const CvsimState,
    out: *mut c_double,
) -> CvsimStatus {
    guard(|| {
        if a.is_null() || b.is_null() || out.is_null() {
            return fail(CvsimStatus::CvsimErrNullArgument, "state or out pointer is null");
        }
        match fidelity(&(*a).inner, &(*b).inner) {
            Ok(f) => {
                *out = f;
                CvsimStatus::CvsimOk
            }
            Err(e) => fail(classify(&e), &e.to_string()),
        }
    })
}

/// Teleports a single-mode state through a symmetric two-mode squeezed
/// resource of squeezed variance `epr_v_sq`, with equal feedforward gain
/// `gain` on both quadratures (1.0 is unity gain).
///
/// # Safety
/// `input` must be a valid handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn cvsim_teleport(
    input: *const CvsimState,
    epr_v_sq: c_double,
    gain: c_double,
    out: *mut *mut CvsimState,
) -> CvsimStatus {
    guard(|| {
        if input.is_null() || out.is_null() {
            return fail(CvsimStatus::CvsimErrNullArgument, "input or out pointer is null");
        }
        let cfg = TeleportConfig {
            epr: EprParams::symmetric(epr_v_sq),
            gain_x: gain,
            gain_p: gain,
        };
        match teleport(&(*input).inner, &cfg) {
            Ok(s) => emit(out, s),
            Err(e) => fail(classify(&e), &e.to_string()),
        }
    })
}

/// Applies the off-line two-mode quadrature-coupling gate with beam-splitter
/// reflectance `reflectance` to a two-mode input, using two pure ancillas of
/// squeezed variance `ancilla_v_sq` (x-squeezed and p-squeezed).
///
/// # Safety
/// `input` must be a valid handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn cvsim_qnd_offline(
    input: *const CvsimState,
    reflectance: c_double,
    ancilla_v_sq: c_double,
    out: *mut *mut CvsimState,
) -> CvsimStatus {
    guard(|| {
        if input.is_null() || out.is_null() {
            return fail(CvsimStatus::CvsimErrNullArgument, "input or out pointer is null");
        }
        let make = |angle: f64| {
            GaussianState::squeezed_vacuum(ancilla_v_sq, 1.0 / ancilla_v_sq, angle)
        };
        let (anc_a, anc_b) = match (make(0.0), make(std::f64::consts::FRAC_PI_2)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => return fail(classify(&e), &e.to_string()),
        };
        match qnd_offline_apply(reflectance, &(*input).inner, &anc_a, &anc_b) {
            Ok(s) => emit(out, s),
            Err(e) => fail(classify(&e), &e.to_string()),
        }
    })
}

/// Builds a four-mode cluster state of the given shape from four pure
/// p-squeezed inputs with squeezed variances `v_sq[0..4]`.
///
/// # Safety
/// `v_sq` must point to four doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cvsim_cluster4(
    shape: CvsimClusterShape,
    v_sq: *const c_double,
    out: *mut *mut CvsimState,
) -> CvsimStatus {
    guard(|| {
        if v_sq.is_null() || out.is_null() {
            return fail(CvsimStatus::CvsimErrNullArgument, "v_sq or out pointer is null");
        }
        let preset = match shape {
            CvsimClusterShape::CvsimClusterLinear => ClusterPreset::Linear4,
            CvsimClusterShape::CvsimClusterTShape => ClusterPreset::TShape4,
            CvsimClusterShape::CvsimClusterDiamond => ClusterPreset::Diamond4,
        };
        let vs = [*v_sq, *v_sq.add(1), *v_sq.add(2), *v_sq.add(3)];
        match build_cluster4(preset, &vs) {
            Ok(s) => emit(out, s),
            Err(e) => fail(classify(&e), &e.to_string()),
        }
    })
}

/// Parses and compiles circuit source text (the `.cvc` language) and returns
/// the ensemble-average output state. On parse or compile failure the error
/// list (one `line:col-col: CODE: message` per line) is available through
/// `cvsim_last_error`.
///
/// # Safety
/// `source` must be a valid NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cvsim_run_source(
    source: *const c_char,
    out: *mut *mut CvsimState,
) -> CvsimStatus {
    guard(|| {
        if source.is_null() || out.is_null() {
            return fail(CvsimStatus::CvsimErrNullArgument, "source or out pointer is null");
        }
        let src = match CStr::from_ptr(source).to_str() {
            Ok(s) => s,
            Err(_) => return fail(CvsimStatus::CvsimErrInvalidUtf8, "source is not valid UTF-8"),
        };
        let joined = |errs: Vec<cvsim::dsl::CvcError>| {
            errs.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("\n")
        };
        let prog = match parse(src) {
            Ok(p) => p,
            Err(errs) => return fail(CvsimStatus::CvsimErrParse, &joined(errs)),
        };
        let plan = match compile(&prog) {
            Ok(p) => p,
            Err(errs) => return fail(CvsimStatus::CvsimErrParse, &joined(errs)),
        };
        match plan.ensemble_output() {
            Ok(s) => emit(out, s),
            Err(e) => fail(classify(&e), &e.to_string()),
        }
    })
}

/// Serializes a state as JSON: `{"n_modes": n, "mean": [...], "cov": [[...]]}`.
/// The returned string must be released with `cvsim_string_free`.
///
/// # Safety
/// `state` must be a valid handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn cvsim_state_to_json(
    state: *const CvsimState,
    out: *mut *mut c_char,
) -> CvsimStatus {
    guard(|| {
        if state.is_null() || out.is_null() {
            return fail(CvsimStatus::CvsimErrNullArgument, "state or out pointer is null");
        }
        let s = &(*state).inner;
        let dim = s.cov().nrows();
        let cov: Vec<Vec<f64>> =
            (0..dim).map(|r| (0..dim).map(|c| s.cov()[(r, c)]).collect()).collect();
        let value = serde_json::json!({
            "n_modes": s.n_modes(),
            "mean": s.mean().iter().copied().collect::<Vec<f64>>(),
            "cov": cov,
        });
        match CString::new(value.to_string()) {
            Ok(c) => {
                *out = c.into_raw();
                CvsimStatus::CvsimOk
            }
            Err(_) => fail(CvsimStatus::CvsimErrInternal, "JSON contained a NUL byte"),
        }
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn cvsim_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

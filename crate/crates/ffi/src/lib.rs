//! C ABI over the spinsim simulation core.
//!
//! Every fallible call returns a [`SpinsimStatus`]; on failure the message is
//! available from [`spinsim_last_error_message`] on the same thread. Models
//! are opaque handles created by `spinsim_model_*` and released with
//! [`spinsim_model_free`]. Fields are reduced units `gμB B/D`, delays are
//! seconds and rates are MHz.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use spinsim::config::SimConfig;
use spinsim::dynamics::{simulate_g2_from, steady_pl, steady_state, G2Options};
use spinsim::photonstats::estimate_rates_three_level;
use spinsim::spin::FieldVector;
use spinsim::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinsimStatus {
    Ok = 0,
    /// Bad arguments, malformed JSON or an invalid configuration.
    InvalidInput = 1,
    /// The numerics failed for otherwise valid input.
    NumericalFailure = 2,
    NullPointer = 3,
    /// A Rust panic was caught at the boundary.
    Internal = 4,
}

/// Opaque simulation model.
pub struct SpinsimModel {
    config: SimConfig,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SpinsimRates {
    pub gamma_s_mhz: f64,
    pub gamma_isc1_mhz: f64,
    pub gamma_isc2_mhz: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: SpinsimStatus, msg: &str) -> SpinsimStatus {
    set_last_error(msg);
    status
}

fn status_of(err: &Error) -> SpinsimStatus {
    if err.is_validation() {
        SpinsimStatus::InvalidInput
    } else {
        SpinsimStatus::NumericalFailure
    }
}

/// Runs `f`, mapping errors and panics to a status code.
fn guard(f: impl FnOnce() -> Result<(), Error>) -> SpinsimStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            SpinsimStatus::Ok
        }
        Ok(Err(e)) => fail(status_of(&e), &e.to_string()),
        Err(_) => fail(SpinsimStatus::Internal, "internal panic"),
    }
}

fn publish(model: SimConfig, out: *mut *mut SpinsimModel) {
    // SAFETY: callers check `out` for null before reaching here.
    unsafe { *out = Box::into_raw(Box::new(SpinsimModel { config: model })) };
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn spinsim_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the most recent failure on this thread, or an empty string.
///
/// The pointer stays valid until the next spinsim call on the same thread.
#[no_mangle]
pub extern "C" fn spinsim_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds a model from a JSON configuration document.
///
/// # Safety
/// `json` must be a valid NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn spinsim_model_from_json(json: *const c_char, out: *mut *mut SpinsimModel) -> SpinsimStatus {
    if json.is_null() || out.is_null() {
        return fail(SpinsimStatus::NullPointer, "null argument");
    }
    let Ok(text) = CStr::from_ptr(json).to_str() else {
        return fail(SpinsimStatus::InvalidInput, "configuration is not valid UTF-8");
    };
    guard(|| {
        let cfg = SimConfig::from_json(text)?;
        cfg.validate()?;
        publish(cfg, out);
        Ok(())
    })
}

/// Builds one of the reference models: 0 for the singlet ground state,
/// 1 for the triplet ground state.
///
/// # Safety
/// `out` must be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn spinsim_model_preset(which: u32, out: *mut *mut SpinsimModel) -> SpinsimStatus {
    if out.is_null() {
        return fail(SpinsimStatus::NullPointer, "null argument");
    }
    let cfg = match which {
        0 => SimConfig::singlet_reference(),
        1 => SimConfig::triplet_reference(),
        _ => return fail(SpinsimStatus::InvalidInput, "preset must be 0 (singlet) or 1 (triplet)"),
    };
    publish(cfg, out);
    set_last_error("");
    SpinsimStatus::Ok
}

/// Releases a model. Null is ignored.
///
/// # Safety
/// `model` must come from a `spinsim_model_*` constructor and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn spinsim_model_free(model: *mut SpinsimModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Steady-state photon emission rate (MHz) at field `(bx, by, bz)`.
///
/// # Safety
/// `model` must be a live handle and `pl_mhz` writable.
#[no_mangle]
pub unsafe extern "C" fn spinsim_steady_pl(
    model: *const SpinsimModel,
    bx: f64,
    by: f64,
    bz: f64,
    pl_mhz: *mut f64,
) -> SpinsimStatus {
    if model.is_null() || pl_mhz.is_null() {
        return fail(SpinsimStatus::NullPointer, "null argument");
    }
    let cfg = &(*model).config;
    guard(|| {
        let r = cfg.rate_matrix(&FieldVector::cartesian(bx, by, bz)?)?;
        *pl_mhz = steady_pl(&r, &steady_state(&r)?);
        Ok(())
    })
}

/// g²(t) after a photon emission at field `(bx, by, bz)`, evaluated at
/// `n` strictly increasing delays (seconds) into `values`.
///
/// # Safety
/// `delays` and `values` must each point to `n` doubles; `model` must be live.
#[no_mangle]
pub unsafe extern "C" fn spinsim_simulate_g2(
    model: *const SpinsimModel,
    bx: f64,
    by: f64,
    bz: f64,
    delays: *const f64,
    n: usize,
    values: *mut f64,
) -> SpinsimStatus {
    if model.is_null() || ((delays.is_null() || values.is_null()) && n > 0) {
        return fail(SpinsimStatus::NullPointer, "null argument");
    }
    if n == 0 {
        set_last_error("");
        return SpinsimStatus::Ok;
    }
    let cfg = &(*model).config;
    let delays = std::slice::from_raw_parts(delays, n);
    let values = std::slice::from_raw_parts_mut(values, n);
    guard(|| {
        let r = cfg.rate_matrix(&FieldVector::cartesian(bx, by, bz)?)?;
        let curve = simulate_g2_from(&r, delays, &G2Options::default())?;
        values.copy_from_slice(&curve.values);
        Ok(())
    })
}

/// Three-level rate estimates from fitted antibunching time `tau1` and
/// bunching time `tau2` (seconds), bunching amplitude `c2` and saturation
/// parameter `x`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn spinsim_estimate_rates(
    tau1: f64,
    tau2: f64,
    c2: f64,
    x: f64,
    out: *mut SpinsimRates,
) -> SpinsimStatus {
    if out.is_null() {
        return fail(SpinsimStatus::NullPointer, "null argument");
    }
    guard(|| {
        let r = estimate_rates_three_level(tau1, tau2, c2, x)?;
        *out = SpinsimRates { gamma_s_mhz: r.gamma_s, gamma_isc1_mhz: r.gamma_isc1, gamma_isc2_mhz: r.gamma_isc2 };
        Ok(())
    })
}

//! C ABI over the `optomagnon` library.
//!
//! Parameters live behind an opaque [`OmParams`] handle and use the same
//! keys and external units as the config file (`q_optical`,
//! `kappa_m_over_2pi_hz`, ...). Every fallible call returns an
//! [`OmStatus`]; on failure a message is available from
//! [`om_last_error_message`] on the calling thread. Panics never cross the
//! boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use optomagnon::cli::config::Config;
use optomagnon::dynamics::{build_matrices, check_stability_with, steady_state_with, uncertainty_min_eig};
use optomagnon::entanglement::{all_pairs, log_negativity, BipartiteCov};
use optomagnon::params::{derive, PhysicalConstants};
use optomagnon::{Error, Mat};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OmStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// String argument was not valid UTF-8, or a numeric argument was out
    /// of range.
    InvalidArgument = 2,
    /// Unknown key, malformed config text or invalid parameter value.
    Config = 3,
    /// The operating point has no steady state.
    Unstable = 4,
    /// Linear algebra failure (non-convergence, singular system).
    Numerical = 5,
    /// Covariance matrix violates the uncertainty principle.
    NonPhysical = 6,
    /// Internal panic caught at the boundary.
    Internal = 7,
}

/// Index of the light–magnon pair in entanglement outputs.
pub const OM_PAIR_LIGHT_MAGNON: usize = 0;
/// Index of the light–microwave pair in entanglement outputs.
pub const OM_PAIR_LIGHT_MICROWAVE: usize = 1;
/// Index of the microwave–magnon pair in entanglement outputs.
pub const OM_PAIR_MICROWAVE_MAGNON: usize = 2;

/// Opaque parameter set. Create with [`om_params_new`] or
/// [`om_params_from_config`], release with [`om_params_free`].
pub struct OmParams {
    config: Config,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> OmStatus {
    match e {
        Error::Config { .. } | Error::InvalidParam { .. } | Error::Domain(_) => OmStatus::Config,
        Error::Unstable { .. } | Error::AllUnstable => OmStatus::Unstable,
        Error::NonPhysicalState(_) => OmStatus::NonPhysical,
        Error::EigenNoConvergence | Error::SingularSolve | Error::IntegrationNoConvergence { .. } => {
            OmStatus::Numerical
        }
        Error::Io(_) => OmStatus::Internal,
    }
}

fn fail(status: OmStatus, msg: impl AsRef<str>) -> OmStatus {
    set_last_error(msg.as_ref());
    status
}

/// Runs `f`, converting panics into `OmStatus::Internal`.
fn guard(f: impl FnOnce() -> OmStatus) -> OmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => {
            if s == OmStatus::Ok {
                set_last_error("");
            }
            s
        }
        Err(_) => fail(OmStatus::Internal, "internal panic"),
    }
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, OmStatus> {
    if p.is_null() {
        return Err(fail(OmStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(OmStatus::InvalidArgument, "string argument is not valid UTF-8"))
}

/// Message describing the most recent failure on this thread, or an empty
/// string. The pointer stays valid until the next call into this library
/// from the same thread.
#[no_mangle]
pub extern "C" fn om_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn om_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}

/// New handle holding the baseline operating point. Never returns null.
#[no_mangle]
pub extern "C" fn om_params_new() -> *mut OmParams {
    Box::into_raw(Box::new(OmParams {
        config: Config::default(),
    }))
}

/// Parses flat `key = value` config text into a new handle.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn om_params_from_config(text: *const c_char, out: *mut *mut OmParams) -> OmStatus {
    guard(|| {
        if out.is_null() {
            return fail(OmStatus::NullPointer, "null output pointer");
        }
        *out = ptr::null_mut();
        let text = match str_arg(text) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match Config::parse(text) {
            Ok(config) => {
                *out = Box::into_raw(Box::new(OmParams { config }));
                OmStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `p` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn om_params_free(p: *mut OmParams) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Sets one config key. `delta_over_2pi_hz` sets Δ_a = −Δ_b. The handle is
/// left unchanged if the resulting parameter set is invalid.
///
/// # Safety
/// `p` must be a live handle and `key` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn om_params_set(p: *mut OmParams, key: *const c_char, value: f64) -> OmStatus {
    guard(|| {
        let Some(h) = p.as_mut() else {
            return fail(OmStatus::NullPointer, "null handle");
        };
        let key = match str_arg(key) {
            Ok(k) => k,
            Err(s) => return s,
        };
        if !value.is_finite() {
            return fail(
                OmStatus::InvalidArgument,
                format!("`{key}`: value must be finite"),
            );
        }
        let mut next = h.config.clone();
        if let Err(msg) = next.assign(key, &format!("{value:e}")) {
            return fail(OmStatus::Config, msg);
        }
        if let Err(e) = next.validate() {
            return fail(status_of(&e), e.to_string());
        }
        h.config = next;
        OmStatus::Ok
    })
}

/// Reads one physical parameter key in external units.
///
/// # Safety
/// `p` must be a live handle, `key` a NUL-terminated string and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn om_params_get(p: *const OmParams, key: *const c_char, out: *mut f64) -> OmStatus {
    guard(|| {
        let (Some(h), false) = (p.as_ref(), out.is_null()) else {
            return fail(OmStatus::NullPointer, "null handle or output pointer");
        };
        let key = match str_arg(key) {
            Ok(k) => k,
            Err(s) => return s,
        };
        match optomagnon::params::ParamKey::from_name(key) {
            Some(k) => {
                *out = h.config.get(k);
                OmStatus::Ok
            }
            None => fail(OmStatus::Config, format!("unknown key `{key}`")),
        }
    })
}

/// Stationary 6×6 covariance matrix, row-major into `out_cov[36]`, mode
/// order magnon, optical, microwave with (X, Y) per mode.
/// `out_max_real_eig` (nullable) receives the largest drift eigenvalue real
/// part in units of 2π × 1 MHz, also when the call returns `Unstable`.
///
/// # Safety
/// `p` must be a live handle; `out_cov` must hold 36 doubles.
#[no_mangle]
pub unsafe extern "C" fn om_steady_state(
    p: *const OmParams,
    out_cov: *mut f64,
    out_max_real_eig: *mut f64,
) -> OmStatus {
    guard(|| {
        let (Some(h), false) = (p.as_ref(), out_cov.is_null()) else {
            return fail(OmStatus::NullPointer, "null handle or output pointer");
        };
        let params = h.config.params();
        let dp = match derive(&params, &PhysicalConstants::SI) {
            Ok(d) => d,
            Err(e) => return fail(status_of(&e), e.to_string()),
        };
        let m = build_matrices(&dp, &params);
        match check_stability_with(&m, h.config.eps_stab_rel) {
            Ok(st) if !out_max_real_eig.is_null() => *out_max_real_eig = st.max_real_eig,
            Ok(_) => {}
            Err(e) => return fail(status_of(&e), e.to_string()),
        }
        match steady_state_with(&m, h.config.eps_stab_rel) {
            Ok(ss) => {
                std::slice::from_raw_parts_mut(out_cov, 36).copy_from_slice(ss.v.as_slice());
                OmStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// Logarithmic negativity for the three mode pairs into `out_en[3]`,
/// indexed by the `OM_PAIR_*` constants.
///
/// # Safety
/// `p` must be a live handle; `out_en` must hold 3 doubles.
#[no_mangle]
pub unsafe extern "C" fn om_entanglement(p: *const OmParams, out_en: *mut f64) -> OmStatus {
    guard(|| {
        if out_en.is_null() {
            return fail(OmStatus::NullPointer, "null output pointer");
        }
        let mut cov = [0.0; 36];
        let s = om_steady_state(p, cov.as_mut_ptr(), ptr::null_mut());
        if s != OmStatus::Ok {
            return s;
        }
        let v = Mat::new(6, 6, cov.to_vec()).expect("6x6");
        match all_pairs(&v) {
            Ok(res) => {
                let out = std::slice::from_raw_parts_mut(out_en, 3);
                for (o, r) in out.iter_mut().zip(res) {
                    *o = r.e_n;
                }
                OmStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// Logarithmic negativity of a two-mode covariance matrix given row-major
/// in `cov[16]`, ordering (x1, p1, x2, p2), vacuum variance 1/2. States
/// violating the uncertainty principle return `NonPhysical`.
///
/// # Safety
/// `cov` must hold 16 doubles and `out_en` must be valid.
#[no_mangle]
pub unsafe extern "C" fn om_log_negativity(cov: *const f64, out_en: *mut f64) -> OmStatus {
    guard(|| {
        if cov.is_null() || out_en.is_null() {
            return fail(OmStatus::NullPointer, "null pointer argument");
        }
        let data = std::slice::from_raw_parts(cov, 16).to_vec();
        if data.iter().any(|x| !x.is_finite()) {
            return fail(OmStatus::InvalidArgument, "covariance entries must be finite");
        }
        let v = Mat::new(4, 4, data).expect("4x4");
        if v.max_asymmetry() > 1e-12 * v.max_abs().max(1.0) {
            return fail(OmStatus::InvalidArgument, "covariance matrix is not symmetric");
        }
        let min_eig = uncertainty_min_eig(&v);
        if min_eig < -1e-9 * v.max_abs().max(1.0) {
            return fail(
                OmStatus::NonPhysical,
                format!("V + iΩ/2 has eigenvalue {min_eig:.3e} < 0"),
            );
        }
        match log_negativity(&BipartiteCov::from_4x4(&v)) {
            Ok(r) => {
                *out_en = r.e_n;
                OmStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

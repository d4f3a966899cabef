//! C ABI for the fracsplit solver.
//!
//! Conventions: every fallible call returns an [`FsStatus`]; results come
//! back through out-pointers. Handles (`FsConfig`, `FsTrajectory`) are
//! opaque and must be released with the matching `_free` function. The
//! last error message of the calling thread is available through
//! [`fs_last_error_message`].

use fracsplit::config::RunConfig;
use fracsplit::kernel::{heat_kernel, stable_density, stable_tail_mass, KernelSpec};
use fracsplit::regions::{fhn_rectangle, fisher_envelopes};
use fracsplit::splitting::{self, Trajectory};
use fracsplit::Error;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

/// Status code of every fallible C-ABI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FsStatus {
    FsOk = 0,
    FsNullPointer = 1,
    FsInvalidParameter = 2,
    FsInvalidData = 3,
    FsAccuracy = 4,
    FsBlowUp = 5,
    FsIoError = 6,
    FsConfigError = 7,
    FsUtf8 = 8,
    FsPanic = 9,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &Error) -> FsStatus {
    match err {
        Error::Parameter(_) => FsStatus::FsInvalidParameter,
        Error::Data(_) => FsStatus::FsInvalidData,
        Error::Accuracy { .. } => FsStatus::FsAccuracy,
        Error::BlowUp { .. } => FsStatus::FsBlowUp,
        Error::Io(_) => FsStatus::FsIoError,
        Error::Config(_) => FsStatus::FsConfigError,
    }
}

fn fail(err: Error) -> FsStatus {
    let code = status_of(&err);
    set_error(&err.to_string());
    code
}

fn guarded(body: impl FnOnce() -> FsStatus + std::panic::UnwindSafe) -> FsStatus {
    match catch_unwind(body) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            FsStatus::FsPanic
        }
    }
}

/// Validated run configuration (opaque).
pub struct FsConfig {
    inner: RunConfig,
}

/// Finished simulation trajectory (opaque).
pub struct FsTrajectory {
    inner: Trajectory,
}

/// Crate version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Last error message of the calling thread (valid until the next
/// failing call on this thread).
#[no_mangle]
pub extern "C" fn fs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Parse and validate a JSON run configuration.
///
/// On success `*out` owns a new handle; release with [`fs_config_free`].
///
/// # Safety
/// `json` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fs_config_parse(json: *const c_char, out: *mut *mut FsConfig) -> FsStatus {
    if json.is_null() || out.is_null() {
        set_error("null pointer argument");
        return FsStatus::FsNullPointer;
    }
    let text = match CStr::from_ptr(json).to_str() {
        Ok(t) => t.to_owned(),
        Err(_) => {
            set_error("config JSON is not valid UTF-8");
            return FsStatus::FsUtf8;
        }
    };
    unsafe { *out = ptr::null_mut() };
    guarded(AssertUnwindSafe(move || match RunConfig::from_json(&text) {
        Ok(cfg) => match cfg.build(None) {
            Ok(_) => {
                unsafe { *out = Box::into_raw(Box::new(FsConfig { inner: cfg })) };
                FsStatus::FsOk
            }
            Err(e) => fail(e),
        },
        Err(e) => fail(e),
    }))
}

/// # Safety
/// `cfg` must be a handle from [`fs_config_parse`] (or null).
#[no_mangle]
pub unsafe extern "C" fn fs_config_free(cfg: *mut FsConfig) {
    if !cfg.is_null() {
        drop(unsafe { Box::from_raw(cfg) });
    }
}

/// Run the configured simulation; on success `*out` owns a trajectory.
///
/// `seed_override` replaces the config seed when `use_seed_override` is
/// nonzero (randomized initial conditions).
///
/// # Safety
/// `cfg` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fs_simulate(
    cfg: *const FsConfig,
    use_seed_override: i32,
    seed_override: u64,
    out: *mut *mut FsTrajectory,
) -> FsStatus {
    if cfg.is_null() || out.is_null() {
        set_error("null pointer argument");
        return FsStatus::FsNullPointer;
    }
    unsafe { *out = ptr::null_mut() };
    let config = unsafe { &(*cfg).inner };
    guarded(AssertUnwindSafe(move || {
        let seed = if use_seed_override != 0 { Some(seed_override) } else { None };
        let plan = match config.build(seed) {
            Ok(p) => p,
            Err(e) => return fail(e),
        };
        match splitting::simulate(
            &plan.initial,
            &plan.model,
            &plan.specs,
            &plan.schedule,
            &plan.monitors,
            &plan.flow,
        ) {
            Ok(traj) => {
                unsafe { *out = Box::into_raw(Box::new(FsTrajectory { inner: traj })) };
                FsStatus::FsOk
            }
            Err(failure) => fail(failure.into()),
        }
    }))
}

/// # Safety
/// `traj` must be a handle from [`fs_simulate`] (or null).
#[no_mangle]
pub unsafe extern "C" fn fs_trajectory_free(traj: *mut FsTrajectory) {
    if !traj.is_null() {
        drop(unsafe { Box::from_raw(traj) });
    }
}

/// Number of stored snapshots (periods + 1); 0 for a null handle.
///
/// # Safety
/// `traj` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn fs_trajectory_snapshot_count(traj: *const FsTrajectory) -> usize {
    if traj.is_null() {
        return 0;
    }
    unsafe { &*traj }.inner.snapshots.len()
}

/// Values per snapshot (grid points x state components).
///
/// # Safety
/// `traj` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn fs_trajectory_values_len(traj: *const FsTrajectory) -> usize {
    if traj.is_null() {
        return 0;
    }
    let t = unsafe { &*traj };
    t.inner.snapshots.first().map_or(0, |f| f.values().len())
}

/// Time of snapshot `index`.
///
/// # Safety
/// `traj` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fs_trajectory_time(
    traj: *const FsTrajectory,
    index: usize,
    out: *mut f64,
) -> FsStatus {
    if traj.is_null() || out.is_null() {
        set_error("null pointer argument");
        return FsStatus::FsNullPointer;
    }
    let t = unsafe { &*traj };
    match t.inner.times.get(index) {
        Some(v) => {
            unsafe { *out = *v };
            FsStatus::FsOk
        }
        None => {
            set_error("snapshot index out of range");
            FsStatus::FsInvalidParameter
        }
    }
}

/// Copy snapshot `index` into `buffer` (row-major over the grid, then
/// state components), exactly `len == fs_trajectory_values_len` values.
///
/// # Safety
/// `traj` must be a live handle; `buffer` must point to `len` f64 slots.
#[no_mangle]
pub unsafe extern "C" fn fs_trajectory_copy_snapshot(
    traj: *const FsTrajectory,
    index: usize,
    buffer: *mut f64,
    len: usize,
) -> FsStatus {
    if traj.is_null() || buffer.is_null() {
        set_error("null pointer argument");
        return FsStatus::FsNullPointer;
    }
    let t = unsafe { &*traj };
    let Some(field) = t.inner.snapshots.get(index) else {
        set_error("snapshot index out of range");
        return FsStatus::FsInvalidParameter;
    };
    let values = field.values();
    if values.len() != len {
        set_error("buffer length does not match snapshot size");
        return FsStatus::FsInvalidData;
    }
    unsafe { ptr::copy_nonoverlapping(values.as_ptr(), buffer, len) };
    FsStatus::FsOk
}

/// Sup-norm monitor value at snapshot `index`.
///
/// # Safety
/// `traj` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fs_trajectory_sup_norm(
    traj: *const FsTrajectory,
    index: usize,
    out: *mut f64,
) -> FsStatus {
    if traj.is_null() || out.is_null() {
        set_error("null pointer argument");
        return FsStatus::FsNullPointer;
    }
    let t = unsafe { &*traj };
    match t.inner.monitors.sup_norm.get(index) {
        Some(v) => {
            unsafe { *out = *v };
            FsStatus::FsOk
        }
        None => {
            set_error("snapshot index out of range");
            FsStatus::FsInvalidParameter
        }
    }
}

/// Rotation-invariant stable density g_beta at the point `x[0..dim]`.
///
/// # Safety
/// `x` must point to `dim` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn fs_stable_density(
    beta: f64,
    dim: usize,
    x: *const f64,
    out: *mut f64,
) -> FsStatus {
    if x.is_null() || out.is_null() {
        set_error("null pointer argument");
        return FsStatus::FsNullPointer;
    }
    let point = unsafe { std::slice::from_raw_parts(x, dim) }.to_vec();
    guarded(AssertUnwindSafe(move || match stable_density(beta, dim, &point) {
        Ok(v) => {
            unsafe { *out = v };
            FsStatus::FsOk
        }
        Err(e) => fail(e),
    }))
}

/// Heat kernel G_{sigma,beta}(t, x) at the point `x[0..dim]`.
///
/// # Safety
/// `x` must point to `dim` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn fs_heat_kernel(
    sigma: f64,
    beta: f64,
    dim: usize,
    t: f64,
    x: *const f64,
    out: *mut f64,
) -> FsStatus {
    if x.is_null() || out.is_null() {
        set_error("null pointer argument");
        return FsStatus::FsNullPointer;
    }
    let point = unsafe { std::slice::from_raw_parts(x, dim) }.to_vec();
    guarded(AssertUnwindSafe(move || {
        let spec = match KernelSpec::new(sigma, beta, dim) {
            Ok(s) => s,
            Err(e) => return fail(e),
        };
        match heat_kernel(&spec, t, &point) {
            Ok(v) => {
                unsafe { *out = v };
                FsStatus::FsOk
            }
            Err(e) => fail(e),
        }
    }))
}

/// Mass of g_beta outside |y| > radius in one dimension.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fs_stable_tail_mass(beta: f64, radius: f64, out: *mut f64) -> FsStatus {
    if out.is_null() {
        set_error("null pointer argument");
        return FsStatus::FsNullPointer;
    }
    guarded(AssertUnwindSafe(move || match stable_tail_mass(beta, radius) {
        Ok(v) => {
            unsafe { *out = v };
            FsStatus::FsOk
        }
        Err(e) => fail(e),
    }))
}

/// On/off schedule weight alpha_h(t) in {0, 2}.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fs_alpha(h: f64, t: f64, out: *mut f64) -> FsStatus {
    if out.is_null() {
        set_error("null pointer argument");
        return FsStatus::FsNullPointer;
    }
    match splitting::alpha(h, t) {
        Ok(v) => {
            unsafe { *out = v };
            FsStatus::FsOk
        }
        Err(e) => fail(e),
    }
}

/// Schedule integral tau_h(t, t_prev) in closed form.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fs_tau(h: f64, t: f64, t_prev: f64, out: *mut f64) -> FsStatus {
    if out.is_null() {
        set_error("null pointer argument");
        return FsStatus::FsNullPointer;
    }
    match splitting::tau(h, t, t_prev) {
        Ok(v) => {
            unsafe { *out = v };
            FsStatus::FsOk
        }
        Err(e) => fail(e),
    }
}

/// Fisher envelopes (a(t), b(t)) for the interval family.
///
/// # Safety
/// `out_a` and `out_b` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn fs_fisher_envelopes(
    a0: f64,
    b0: f64,
    chi: f64,
    t: f64,
    out_a: *mut f64,
    out_b: *mut f64,
) -> FsStatus {
    if out_a.is_null() || out_b.is_null() {
        set_error("null pointer argument");
        return FsStatus::FsNullPointer;
    }
    match fisher_envelopes(a0, b0, chi, t) {
        Ok((a, b)) => {
            unsafe {
                *out_a = a;
                *out_b = b;
            }
            FsStatus::FsOk
        }
        Err(e) => fail(e),
    }
}

/// FitzHugh-Nagumo invariant rectangle (R1, R2) and the worst certified
/// sign margin of the outward boundary field (negative = inward).
///
/// # Safety
/// All out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn fs_fhn_rectangle(
    a: f64,
    e: f64,
    b: f64,
    out_r1: *mut f64,
    out_r2: *mut f64,
    out_worst_margin: *mut f64,
) -> FsStatus {
    if out_r1.is_null() || out_r2.is_null() || out_worst_margin.is_null() {
        set_error("null pointer argument");
        return FsStatus::FsNullPointer;
    }
    match fhn_rectangle(a, e, b) {
        Ok(rect) => {
            unsafe {
                *out_r1 = rect.r1;
                *out_r2 = rect.r2;
                *out_worst_margin = rect.worst_margin;
            }
            FsStatus::FsOk
        }
        Err(e) => fail(e),
    }
}

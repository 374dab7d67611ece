//! C interface to the `coadjoint` integrators.
//!
//! Every fallible call returns a [`CoadjointStatus`]; on failure the message
//! is available from [`coadjoint_last_error`] on the same thread. Handles are
//! opaque and must be released with the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;
use std::sync::OnceLock;

use coadjoint::config::RunConfig;
use coadjoint::diagnostics::{drift_series, run_with_casimirs, Trajectory};
use coadjoint::integrators::{Method, StepperConfig};
use coadjoint::models::{build_heavy_top, HeavyTopParams, Model};
use coadjoint::noise::{generate, TimeGrid};
use coadjoint::{DualVector, Error};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoadjointStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    SolverFailed = 4,
    NonFinite = 5,
    Config = 6,
    Io = 7,
    Unsupported = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoadjointMethod {
    Tmk = 0,
    DirectIm = 1,
    DirectTrapezoidal = 2,
    EulerMaruyamaMk = 3,
    DeterministicRkmk = 4,
}

impl From<CoadjointMethod> for Method {
    fn from(m: CoadjointMethod) -> Self {
        match m {
            CoadjointMethod::Tmk => Method::Tmk,
            CoadjointMethod::DirectIm => Method::DirectIm,
            CoadjointMethod::DirectTrapezoidal => Method::DirectTrapezoidal,
            CoadjointMethod::EulerMaruyamaMk => Method::EulerMaruyamaMk,
            CoadjointMethod::DeterministicRkmk => Method::DeterministicRkmk,
        }
    }
}

/// A model: algebra, Hamiltonians, Casimirs and initial state.
pub struct CoadjointModel {
    inner: Model,
}

/// A recorded trajectory with Casimir values at every step.
pub struct CoadjointTrajectory {
    inner: Trajectory,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nuls removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> CoadjointStatus {
    match e {
        Error::DimensionMismatch { .. } => CoadjointStatus::DimensionMismatch,
        Error::InvalidArgument(_) => CoadjointStatus::InvalidArgument,
        Error::SingularJacobian { .. } | Error::ChordNotConverged { .. } => CoadjointStatus::SolverFailed,
        Error::NonFinite => CoadjointStatus::NonFinite,
        Error::StepFailed { source, .. } => status_of(source),
        Error::Unsupported(_) => CoadjointStatus::Unsupported,
        Error::Config(_) => CoadjointStatus::Config,
        Error::Io(_) => CoadjointStatus::Io,
    }
}

/// Runs `f`, turning errors and panics into a status and a stored message.
fn guard<F>(f: F) -> CoadjointStatus
where
    F: FnOnce() -> Result<(), (CoadjointStatus, String)>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            CoadjointStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            CoadjointStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (CoadjointStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (CoadjointStatus, String) {
    (CoadjointStatus::NullPointer, format!("{what} is null"))
}

unsafe fn array3<'a>(p: *const f64, what: &str) -> Result<&'a [f64; 3], (CoadjointStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(&*(p as *const [f64; 3]))
}

unsafe fn out_slice<'a>(p: *mut f64, len: usize, need: usize) -> Result<&'a mut [f64], (CoadjointStatus, String)> {
    if p.is_null() {
        return Err(null("output buffer"));
    }
    if len < need {
        return Err((
            CoadjointStatus::DimensionMismatch,
            format!("output buffer holds {len} values, {need} needed"),
        ));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

fn boxed_model(m: Model, out: *mut *mut CoadjointModel) {
    // SAFETY: callers checked `out` for null.
    unsafe { *out = Box::into_raw(Box::new(CoadjointModel { inner: m })) };
}

/// Message of the last failed call on this thread, or null after a success.
/// The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn coadjoint_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn coadjoint_version() -> *const c_char {
    static VERSION: OnceLock<CString> = OnceLock::new();
    VERSION
        .get_or_init(|| CString::new(coadjoint::version_string()).expect("no interior nul"))
        .as_ptr()
}

/// Builds a heavy top. Each pointer addresses three doubles.
///
/// # Safety
/// The input pointers must be valid for three reads and `out` for one write.
#[no_mangle]
pub unsafe extern "C" fn coadjoint_model_heavy_top(
    inertia: *const f64,
    chi: *const f64,
    alpha: *const f64,
    pi0: *const f64,
    gamma0: *const f64,
    out: *mut *mut CoadjointModel,
) -> CoadjointStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let params = HeavyTopParams {
            inertia: *array3(inertia, "inertia")?,
            chi: *array3(chi, "chi")?,
            alpha: *array3(alpha, "alpha")?,
            pi0: *array3(pi0, "pi0")?,
            gamma0: *array3(gamma0, "gamma0")?,
        };
        boxed_model(build_heavy_top(&params).map_err(lib_err)?, out);
        Ok(())
    })
}

/// Builds the model described by a TOML configuration, as read by the CLI.
///
/// # Safety
/// `config` must be a NUL-terminated string and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn coadjoint_model_from_config(
    config: *const c_char,
    out: *mut *mut CoadjointModel,
) -> CoadjointStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if config.is_null() {
            return Err(null("config"));
        }
        let text = CStr::from_ptr(config)
            .to_str()
            .map_err(|e| (CoadjointStatus::Config, format!("config is not UTF-8: {e}")))?;
        let cfg = RunConfig::from_toml(text).map_err(lib_err)?;
        boxed_model(cfg.build_model().map_err(lib_err)?, out);
        Ok(())
    })
}

/// # Safety
/// `model` must come from a `coadjoint_model_*` constructor or be null.
#[no_mangle]
pub unsafe extern "C" fn coadjoint_model_free(model: *mut CoadjointModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Algebra dimension, or 0 for a null handle.
///
/// # Safety
/// `model` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn coadjoint_model_dim(model: *const CoadjointModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.algebra.dim())
}

/// Number of Wiener drivers, or 0 for a null handle.
///
/// # Safety
/// `model` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn coadjoint_model_drivers(model: *const CoadjointModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.hamiltonian.drivers())
}

/// Number of Casimirs, or 0 for a null handle.
///
/// # Safety
/// `model` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn coadjoint_model_casimir_count(model: *const CoadjointModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.casimirs.len())
}

/// Copies the initial state into `out[0..dim]`.
///
/// # Safety
/// `model` must be a live handle and `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn coadjoint_model_initial_state(
    model: *const CoadjointModel,
    out: *mut f64,
    len: usize,
) -> CoadjointStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let init = m.inner.initial.as_slice();
        out_slice(out, len, init.len())?[..init.len()].copy_from_slice(init);
        Ok(())
    })
}

/// Evaluates the Casimirs at `state[0..dim]` into `out[0..casimir_count]`.
///
/// # Safety
/// `model` must be a live handle, `state` valid for `dim` reads and `out`
/// for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn coadjoint_model_casimirs(
    model: *const CoadjointModel,
    state: *const f64,
    out: *mut f64,
    len: usize,
) -> CoadjointStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        if state.is_null() {
            return Err(null("state"));
        }
        let mu = DualVector::from_slice(slice::from_raw_parts(state, m.inner.algebra.dim()));
        let values = m.inner.casimirs.values(&mu);
        out_slice(out, len, values.len())?[..values.len()].copy_from_slice(&values);
        Ok(())
    })
}

/// Integrates `steps` steps of size `dt` on the Wiener path drawn from
/// `seed`. `mu0` may be null to start from the model's initial state.
///
/// # Safety
/// `model` must be a live handle, `mu0` null or valid for `dim` reads, and
/// `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn coadjoint_integrate(
    model: *const CoadjointModel,
    method: CoadjointMethod,
    dt: f64,
    steps: usize,
    seed: u64,
    mu0: *const f64,
    out: *mut *mut CoadjointTrajectory,
) -> CoadjointStatus {
    guard(|| {
        let m = &model.as_ref().ok_or_else(|| null("model"))?.inner;
        if out.is_null() {
            return Err(null("out"));
        }
        let start = if mu0.is_null() {
            m.initial.clone()
        } else {
            DualVector::from_slice(slice::from_raw_parts(mu0, m.algebra.dim()))
        };
        let grid = TimeGrid::new(0.0, dt, steps).map_err(lib_err)?;
        let path = generate(seed, m.hamiltonian.drivers(), &grid);
        let cfg = StepperConfig::with_method(method.into());
        let traj = run_with_casimirs(&m.algebra, &m.hamiltonian, &m.casimirs, &start, &grid, &path, &cfg)
            .map_err(lib_err)?;
        *out = Box::into_raw(Box::new(CoadjointTrajectory { inner: traj }));
        Ok(())
    })
}

/// # Safety
/// `traj` must come from [`coadjoint_integrate`] or be null.
#[no_mangle]
pub unsafe extern "C" fn coadjoint_trajectory_free(traj: *mut CoadjointTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Number of recorded states (steps + 1), or 0 for a null handle.
///
/// # Safety
/// `traj` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn coadjoint_trajectory_len(traj: *const CoadjointTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.inner.len())
}

/// Time of record `index`, or NaN when out of range.
///
/// # Safety
/// `traj` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn coadjoint_trajectory_time(traj: *const CoadjointTrajectory, index: usize) -> f64 {
    traj.as_ref()
        .and_then(|t| t.inner.times.get(index).copied())
        .unwrap_or(f64::NAN)
}

fn record<'a>(traj: *const CoadjointTrajectory, index: usize) -> Result<&'a Trajectory, (CoadjointStatus, String)> {
    // SAFETY: callers pass a live handle or null.
    let t = &unsafe { traj.as_ref() }.ok_or_else(|| null("trajectory"))?.inner;
    if index >= t.len() {
        return Err((
            CoadjointStatus::InvalidArgument,
            format!("index {index} is past the {} records", t.len()),
        ));
    }
    Ok(t)
}

/// Copies state `index` into `out[0..dim]`.
///
/// # Safety
/// `traj` must be a live handle and `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn coadjoint_trajectory_state(
    traj: *const CoadjointTrajectory,
    index: usize,
    out: *mut f64,
    len: usize,
) -> CoadjointStatus {
    guard(|| {
        let s = record(traj, index)?.states[index].as_slice();
        out_slice(out, len, s.len())?[..s.len()].copy_from_slice(s);
        Ok(())
    })
}

/// Copies the Casimir values at record `index` into `out`.
///
/// # Safety
/// `traj` must be a live handle and `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn coadjoint_trajectory_casimirs(
    traj: *const CoadjointTrajectory,
    index: usize,
    out: *mut f64,
    len: usize,
) -> CoadjointStatus {
    guard(|| {
        let c = &record(traj, index)?.casimirs[index];
        out_slice(out, len, c.len())?[..c.len()].copy_from_slice(c);
        Ok(())
    })
}

/// Largest relative (or, for a vanishing initial value, absolute) Casimir
/// drift over the whole run, one value per Casimir.
///
/// # Safety
/// `traj` must be a live handle and `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn coadjoint_trajectory_max_drift(
    traj: *const CoadjointTrajectory,
    out: *mut f64,
    len: usize,
) -> CoadjointStatus {
    guard(|| {
        let t = record(traj, 0)?;
        let drift: Vec<f64> = drift_series(t).iter().map(|d| d.max()).collect();
        out_slice(out, len, drift.len())?[..drift.len()].copy_from_slice(&drift);
        Ok(())
    })
}

//! C ABI over `qfigrowth`.
//!
//! Models and trajectories are opaque handles created and released through
//! this interface. Every fallible call returns a [`QgStatus`]; on failure the
//! message is available from [`qg_last_error`] on the same thread. Matrices
//! are passed as separate real and imaginary arrays in row-major order.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ndarray::Array2;
use qfigrowth::bounds::{hls_curve, hnls_curve, lambert_w_m1};
use qfigrowth::dynamics::{uniform_grid, IntegratorConfig, ParamModel};
use qfigrowth::fisher::qfi;
use qfigrowth::linalg::{c, CMat, Density, Hermitian};
use qfigrowth::scenarios::{damped_oscillator, dephasing_qubit, random_model, simulate, OscillatorSpec, Simulation};
use qfigrowth::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// A value lies outside the domain of the called function.
    Domain = 3,
    /// Numerical failure during integration or an SLD solve.
    Numerical = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

/// A parameterized Lindblad model.
pub struct QgModel {
    inner: ParamModel,
}

/// A simulated trajectory with its QFI and rate.
pub struct QgTrajectory {
    times: Vec<f64>,
    qfi: Vec<f64>,
    rates: Vec<f64>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let clean = msg.replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(clean).unwrap_or_default());
}

fn status_of(e: &Error) -> QgStatus {
    match e {
        Error::DimensionMismatch { .. }
        | Error::NotSquare { .. }
        | Error::NotHermitian { .. }
        | Error::BadTrace { .. }
        | Error::ZeroDimension
        | Error::NonMonotoneGrid { .. }
        | Error::InvalidArgument(_) => QgStatus::InvalidArgument,
        Error::Domain { .. } => QgStatus::Domain,
        _ => QgStatus::Numerical,
    }
}

/// Runs `f`, records any error message and converts panics into a status.
fn guard<F: FnOnce() -> Result<(), QgStatus>>(f: F) -> QgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            QgStatus::Ok
        }
        Ok(Err(status)) => status,
        Err(_) => {
            set_error("internal panic");
            QgStatus::Panic
        }
    }
}

fn fail(e: Error) -> QgStatus {
    set_error(&e.to_string());
    status_of(&e)
}

fn invalid(msg: &str) -> QgStatus {
    set_error(msg);
    QgStatus::InvalidArgument
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), QgStatus> {
    if p.is_null() {
        set_error(&format!("{name} is null"));
        return Err(QgStatus::NullPointer);
    }
    Ok(())
}

/// Reads an `n x n` complex matrix from split real and imaginary arrays.
///
/// # Safety
/// `re` and `im` must each point to `n * n` readable doubles.
unsafe fn read_matrix(n: usize, re: *const f64, im: *const f64) -> Result<CMat, QgStatus> {
    non_null(re, "real part")?;
    non_null(im, "imaginary part")?;
    let re = std::slice::from_raw_parts(re, n * n);
    let im = std::slice::from_raw_parts(im, n * n);
    Ok(Array2::from_shape_fn((n, n), |(i, j)| c(re[i * n + j], im[i * n + j])))
}

fn store_model(out: *mut *mut QgModel, model: ParamModel) -> Result<(), QgStatus> {
    non_null(out, "out")?;
    // SAFETY: checked non-null; the caller owns the slot
    unsafe { *out = Box::into_raw(Box::new(QgModel { inner: model })) };
    Ok(())
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn qg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Qubit with `H = g epsilon sigma_z` and dephasing channel `sqrt(gamma_d) sigma_z`.
///
/// # Safety
/// `out` must be a valid pointer to a `QgModel*` slot.
#[no_mangle]
pub unsafe extern "C" fn qg_model_dephasing_qubit(epsilon: f64, gamma_d: f64, out: *mut *mut QgModel) -> QgStatus {
    guard(|| store_model(out, dephasing_qubit(epsilon, gamma_d).map_err(fail)?))
}

/// Damped oscillator truncated at `n_max` levels with resonant or detuned
/// linear forcing `epsilon`.
///
/// # Safety
/// `out` must be a valid pointer to a `QgModel*` slot.
#[no_mangle]
pub unsafe extern "C" fn qg_model_oscillator(
    n_max: usize,
    gamma: f64,
    n_thermal: f64,
    epsilon_re: f64,
    epsilon_im: f64,
    detuning: f64,
    out: *mut *mut QgModel,
) -> QgStatus {
    guard(|| {
        let spec = OscillatorSpec {
            n_max,
            gamma,
            n_thermal,
            epsilon: c(epsilon_re, epsilon_im),
            detuning,
            ..Default::default()
        };
        store_model(out, damped_oscillator(&spec).map_err(fail)?)
    })
}

/// Random model `H0 + g H1` of dimension `dim` with `channels` Lindblad
/// operators, drawn deterministically from `seed`.
///
/// # Safety
/// `out` must be a valid pointer to a `QgModel*` slot.
#[no_mangle]
pub unsafe extern "C" fn qg_model_random(seed: u64, dim: usize, channels: usize, out: *mut *mut QgModel) -> QgStatus {
    guard(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        store_model(out, random_model(&mut rng, dim, channels).map_err(fail)?.model)
    })
}

/// Hilbert-space dimension, or 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn qg_model_dim(model: *const QgModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.dim())
}

/// Releases a model. Null is ignored.
///
/// # Safety
/// `model` must be null or a live handle not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qg_model_free(model: *mut QgModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Simulates `model` from the density matrix `rho0` (dimension `dim`) at
/// `g = 0` on `points` evenly spaced times in `[0, t_end]` with RK4 step `step`.
///
/// # Safety
/// `model` must be a live handle, `rho0_re`/`rho0_im` must hold `dim * dim`
/// doubles and `out` must be a valid `QgTrajectory*` slot.
#[no_mangle]
pub unsafe extern "C" fn qg_simulate(
    model: *const QgModel,
    dim: usize,
    rho0_re: *const f64,
    rho0_im: *const f64,
    t_end: f64,
    points: usize,
    step: f64,
    rank_tol: f64,
    out: *mut *mut QgTrajectory,
) -> QgStatus {
    guard(|| {
        non_null(model, "model")?;
        non_null(out, "out")?;
        let model = &(*model).inner;
        if dim != model.dim() {
            return Err(invalid(&format!("state dimension {dim} does not match model dimension {}", model.dim())));
        }
        if points < 2 || !(t_end > 0.0) {
            return Err(invalid("need points >= 2 and t_end > 0"));
        }
        let rho = Density::new(read_matrix(dim, rho0_re, rho0_im)?).map_err(fail)?;
        let grid = uniform_grid(t_end, points);
        let sim: Simulation =
            simulate(model, &rho, 0.0, &grid, &IntegratorConfig::with_step(step), rank_tol).map_err(fail)?;
        let traj = QgTrajectory { times: grid, qfi: sim.qfi(), rates: sim.rates() };
        *out = Box::into_raw(Box::new(traj));
        Ok(())
    })
}

/// Number of samples, or 0 for a null handle.
///
/// # Safety
/// `traj` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qg_trajectory_len(traj: *const QgTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.times.len())
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QgColumn {
    Time = 0,
    Qfi = 1,
    QfiRate = 2,
}

/// Copies one column of the trajectory into `buf`, which must have room
/// for [`qg_trajectory_len`] values.
///
/// # Safety
/// `traj` must be a live handle and `buf` must hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn qg_trajectory_column(
    traj: *const QgTrajectory,
    column: QgColumn,
    buf: *mut f64,
    len: usize,
) -> QgStatus {
    guard(|| {
        non_null(traj, "trajectory")?;
        non_null(buf, "buffer")?;
        let t = &*traj;
        let src = match column {
            QgColumn::Time => &t.times,
            QgColumn::Qfi => &t.qfi,
            QgColumn::QfiRate => &t.rates,
        };
        if len < src.len() {
            set_error(&format!("buffer holds {len} values, need {}", src.len()));
            return Err(QgStatus::BufferTooSmall);
        }
        ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
        Ok(())
    })
}

/// Releases a trajectory. Null is ignored.
///
/// # Safety
/// `traj` must be null or a live handle not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qg_trajectory_free(traj: *mut QgTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// QFI of `rho` with derivative `rho_prime`, both `dim x dim`.
///
/// # Safety
/// All four arrays must hold `dim * dim` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qg_qfi(
    dim: usize,
    rho_re: *const f64,
    rho_im: *const f64,
    rho_prime_re: *const f64,
    rho_prime_im: *const f64,
    rank_tol: f64,
    out: *mut f64,
) -> QgStatus {
    guard(|| {
        non_null(out, "out")?;
        if dim == 0 {
            return Err(fail(Error::ZeroDimension));
        }
        let rho = Density::new(read_matrix(dim, rho_re, rho_im)?).map_err(fail)?;
        let rp = Hermitian::new(read_matrix(dim, rho_prime_re, rho_prime_im)?).map_err(fail)?;
        *out = qfi(&rho, &rp, rank_tol).map_err(fail)?;
        Ok(())
    })
}

/// Integrated bound for `H'` inside the Lindblad span.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qg_hls_curve(c1: f64, c2: f64, t: f64, out: *mut f64) -> QgStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = hls_curve(c1, c2, t).map_err(fail)?;
        Ok(())
    })
}

/// Integrated bound for `H'` with a component outside the Lindblad span.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qg_hnls_curve(c0: f64, c1: f64, c2: f64, t: f64, out: *mut f64) -> QgStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = hnls_curve(c0, c1, c2, t).map_err(fail)?;
        Ok(())
    })
}

/// Lower branch `W_{-1}(x)` for `-1/e <= x < 0`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qg_lambert_w_m1(x: f64, out: *mut f64) -> QgStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = lambert_w_m1(x).map_err(fail)?;
        Ok(())
    })
}

//! C ABI over `chsim`.
//!
//! Every object crosses the boundary as an opaque pointer created by a
//! `*_new` function and released by the matching `*_free`. Fallible calls
//! return a [`ChsimStatus`]; on failure the message is available from
//! [`chsim_last_error`] until the next failing call on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use chsim::harness::emit::ResultRow;
use chsim::harness::{self, ExperimentConfig, ExperimentId, SchemeId};
use chsim::multipeakon::{self, PeakonState};
use chsim::ode::Tolerances;
use chsim::reference_solutions::{self, PeakonReference, TravelingWave};
use chsim::metrics::RhoInterp;
use chsim::Error;

/// Outcome of a fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChsimStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Configuration = 3,
    Singular = 4,
    Solver = 5,
    Integration = 6,
    Incompatible = 7,
    Numerical = 8,
    Io = 9,
    OutOfRange = 10,
    Panic = 11,
}

/// Density reconstruction for finite-difference two-component schemes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChsimRhoInterp {
    Default = 0,
    Constant = 1,
    Linear = 2,
}

/// One grid size of a convergence sweep. Missing values are NaN, missing
/// step counts are -1. `failed` is nonzero when the run produced no data.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ChsimRow {
    pub n: u64,
    pub t_final: f64,
    pub l2_error: f64,
    pub h1_error: f64,
    pub rho_l2_error: f64,
    pub runtime_seconds: f64,
    pub energy_deviation: f64,
    pub momentum_deviation: f64,
    pub accepted_steps: i64,
    pub rejected_steps: i64,
    pub failed: i32,
}

/// Sweep configuration.
pub struct ChsimSweep(ExperimentConfig);

/// Rows produced by a sweep.
pub struct ChsimResults {
    rows: Vec<ResultRow>,
    messages: Vec<Option<CString>>,
}

/// One period of a traveling wave.
pub struct ChsimWave(TravelingWave);

/// Periodic multipeakon state.
pub struct ChsimPeakons(PeakonState);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> ChsimStatus {
    match e {
        Error::Contract(_) | Error::Parse(_) => ChsimStatus::InvalidArgument,
        Error::Configuration(_) | Error::DegenerateCell { .. } => ChsimStatus::Configuration,
        Error::Singular { .. } => ChsimStatus::Singular,
        Error::Solver { .. } => ChsimStatus::Solver,
        Error::Integration { .. } | Error::EventNotFound { .. } => ChsimStatus::Integration,
        Error::Incompatible { .. } => ChsimStatus::Incompatible,
        Error::NonFinite(_) | Error::Consistency { .. } => ChsimStatus::Numerical,
        Error::Io(_) => ChsimStatus::Io,
    }
}

struct Fail(ChsimStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(ChsimStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(ChsimStatus::InvalidArgument, msg.into())
}

/// Run `f`, converting errors and panics into a status plus last-error text.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> ChsimStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ChsimStatus::Ok,
        Ok(Err(Fail(s, msg))) => {
            set_error(msg);
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            ChsimStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn as_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    as_mut(p, what)
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| invalid(format!("{what} is not UTF-8")))
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

unsafe fn slice_mut<'a>(p: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], Fail> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Message of the last failed call on this thread, or null if none.
/// The pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn chsim_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn chsim_status_string(status: ChsimStatus) -> *const c_char {
    let s: &'static CStr = match status {
        ChsimStatus::Ok => c"ok",
        ChsimStatus::NullPointer => c"null pointer",
        ChsimStatus::InvalidArgument => c"invalid argument",
        ChsimStatus::Configuration => c"invalid configuration",
        ChsimStatus::Singular => c"singular configuration",
        ChsimStatus::Solver => c"linear solve failed",
        ChsimStatus::Integration => c"integration failed",
        ChsimStatus::Incompatible => c"incompatible experiment and scheme",
        ChsimStatus::Numerical => c"numerical failure",
        ChsimStatus::Io => c"i/o error",
        ChsimStatus::OutOfRange => c"index out of range",
        ChsimStatus::Panic => c"internal panic",
    };
    s.as_ptr()
}

// Sweeps

/// Create a sweep for an experiment and scheme given by their CLI names.
///
/// # Safety
/// `experiment` and `scheme` must be nul-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chsim_sweep_new(
    experiment: *const c_char,
    scheme: *const c_char,
    out: *mut *mut ChsimSweep,
) -> ChsimStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let e = c_str(experiment, "experiment")?.parse::<ExperimentId>()?;
        let s = c_str(scheme, "scheme")?.parse::<SchemeId>()?;
        let mut cfg = ExperimentConfig::new(e, s);
        cfg.k0 = cfg.kmax + 2;
        cfg.validate()?;
        *out = boxed(ChsimSweep(cfg));
        Ok(())
    })
}

/// # Safety
/// `sweep` must come from [`chsim_sweep_new`] or be null.
#[no_mangle]
pub unsafe extern "C" fn chsim_sweep_free(sweep: *mut ChsimSweep) {
    free(sweep)
}

/// Grid sizes `2^kmin ..= 2^kmax`. The reference grid follows at `kmax + 2`.
///
/// # Safety
/// `sweep` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn chsim_sweep_set_levels(sweep: *mut ChsimSweep, kmin: u32, kmax: u32) -> ChsimStatus {
    guard(|| {
        let cfg = &mut as_mut(sweep, "sweep")?.0;
        cfg.kmin = kmin;
        cfg.kmax = kmax;
        cfg.k0 = kmax + 2;
        Ok(())
    })
}

/// # Safety
/// `sweep` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn chsim_sweep_set_tolerances(sweep: *mut ChsimSweep, abs_tol: f64, rel_tol: f64) -> ChsimStatus {
    guard(|| {
        let cfg = &mut as_mut(sweep, "sweep")?.0;
        cfg.tol = Tolerances::new(abs_tol, rel_tol)?;
        Ok(())
    })
}

/// # Safety
/// `sweep` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn chsim_sweep_set_shifted_grid(sweep: *mut ChsimSweep, shifted: bool) -> ChsimStatus {
    guard(|| {
        as_mut(sweep, "sweep")?.0.shifted = shifted;
        Ok(())
    })
}

/// # Safety
/// `sweep` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn chsim_sweep_set_rho_interp(sweep: *mut ChsimSweep, mode: ChsimRhoInterp) -> ChsimStatus {
    guard(|| {
        as_mut(sweep, "sweep")?.0.rho_interp = match mode {
            ChsimRhoInterp::Default => None,
            ChsimRhoInterp::Constant => Some(RhoInterp::Constant),
            ChsimRhoInterp::Linear => Some(RhoInterp::Linear),
        };
        Ok(())
    })
}

/// Timing repetitions per grid size; the median runtime is reported.
///
/// # Safety
/// `sweep` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn chsim_sweep_set_repeats(sweep: *mut ChsimSweep, repeats: usize) -> ChsimStatus {
    guard(|| {
        as_mut(sweep, "sweep")?.0.repeats = repeats;
        Ok(())
    })
}

/// Run the sweep. Per-size failures appear as failed rows, not as an error.
///
/// # Safety
/// `sweep` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chsim_sweep_run(sweep: *const ChsimSweep, out: *mut *mut ChsimResults) -> ChsimStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let mut cfg = as_ref(sweep, "sweep")?.0.clone();
        cfg.out = None;
        cfg.validate()?;
        let rows = harness::run(&cfg)?;
        let messages = rows
            .iter()
            .map(|r| r.failure.as_ref().map(|m| CString::new(m.replace('\0', " ")).expect("nul bytes removed")))
            .collect();
        *out = boxed(ChsimResults { rows, messages });
        Ok(())
    })
}

/// # Safety
/// `results` must come from [`chsim_sweep_run`] or be null.
#[no_mangle]
pub unsafe extern "C" fn chsim_results_free(results: *mut ChsimResults) {
    free(results)
}

/// Number of rows, or 0 for a null handle.
///
/// # Safety
/// `results` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn chsim_results_len(results: *const ChsimResults) -> usize {
    results.as_ref().map_or(0, |r| r.rows.len())
}

/// # Safety
/// `results` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chsim_results_row(results: *const ChsimResults, index: usize, out: *mut ChsimRow) -> ChsimStatus {
    guard(|| {
        let rows = &as_ref(results, "results")?.rows;
        let out = out_ptr(out, "out")?;
        let r = rows
            .get(index)
            .ok_or_else(|| Fail(ChsimStatus::OutOfRange, format!("row {index} of {}", rows.len())))?;
        let f = |v: Option<f64>| v.unwrap_or(f64::NAN);
        let c = |v: Option<u64>| v.map_or(-1, |v| v as i64);
        *out = ChsimRow {
            n: r.n as u64,
            t_final: r.t_final,
            l2_error: f(r.l2_error),
            h1_error: f(r.h1_error),
            rho_l2_error: f(r.rho_l2_error),
            runtime_seconds: f(r.runtime_seconds),
            energy_deviation: f(r.energy_deviation),
            momentum_deviation: f(r.momentum_deviation),
            accepted_steps: c(r.accepted_steps),
            rejected_steps: c(r.rejected_steps),
            failed: r.failure.is_some() as i32,
        };
        Ok(())
    })
}

/// Failure message of a row, or null if the row succeeded or is out of range.
/// Valid while `results` lives.
///
/// # Safety
/// `results` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn chsim_results_failure(results: *const ChsimResults, index: usize) -> *const c_char {
    results
        .as_ref()
        .and_then(|r| r.messages.get(index))
        .and_then(|m| m.as_ref())
        .map_or(ptr::null(), |c| c.as_ptr())
}

// Traveling waves

/// Traveling wave of the one-component equation (`two_component == false`)
/// or of the two-component system.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chsim_wave_new(two_component: bool, out: *mut *mut ChsimWave) -> ChsimStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let w = if two_component {
            reference_solutions::traveling_wave_2ch()?
        } else {
            reference_solutions::traveling_wave_ch()?
        };
        *out = boxed(ChsimWave(w));
        Ok(())
    })
}

/// # Safety
/// `wave` must come from [`chsim_wave_new`] or be null.
#[no_mangle]
pub unsafe extern "C" fn chsim_wave_free(wave: *mut ChsimWave) {
    free(wave)
}

/// Speed and period of the wave.
///
/// # Safety
/// `wave` must be a live handle; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn chsim_wave_info(wave: *const ChsimWave, speed: *mut f64, period: *mut f64) -> ChsimStatus {
    guard(|| {
        let w = &as_ref(wave, "wave")?.0;
        *out_ptr(speed, "speed")? = w.speed();
        *out_ptr(period, "period")? = w.period;
        Ok(())
    })
}

/// Evaluate `u`, `u_x` and `rho` at points `x[0..len]` and time `t`.
/// `rho` may be null; for the one-component wave it is filled with NaN.
///
/// # Safety
/// `wave` must be a live handle; arrays must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn chsim_wave_eval(
    wave: *const ChsimWave,
    t: f64,
    x: *const f64,
    len: usize,
    u: *mut f64,
    ux: *mut f64,
    rho: *mut f64,
) -> ChsimStatus {
    guard(|| {
        let w = &as_ref(wave, "wave")?.0;
        let x = slice(x, len, "x")?;
        let u = slice_mut(u, len, "u")?;
        let ux = slice_mut(ux, len, "ux")?;
        let mut rho = if rho.is_null() { None } else { Some(slice_mut(rho, len, "rho")?) };
        for (i, &xi) in x.iter().enumerate() {
            (u[i], ux[i]) = w.solution(t, xi);
            if let Some(r) = rho.as_deref_mut() {
                r[i] = if w.has_density() { w.density(xi - w.speed() * t) } else { f64::NAN };
            }
        }
        Ok(())
    })
}

// Multipeakons

/// Periodic multipeakon with positions `y`, heights `u` (both length `n`)
/// on a domain of length `period`. Positions must be nondecreasing within
/// one period; the energy distribution is the one of the peakon profile.
///
/// # Safety
/// `y` and `u` must hold `n` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chsim_peakons_new(
    y: *const f64,
    u: *const f64,
    n: usize,
    period: f64,
    out: *mut *mut ChsimPeakons,
) -> ChsimStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let y = slice(y, n, "y")?;
        let u = slice(u, n, "u")?;
        let mut s = PeakonState::new(y.to_vec(), u.to_vec(), vec![0.0; n], period)?;
        s.h_cum = multipeakon::cumulative_energy(&s)?;
        *out = boxed(ChsimPeakons(s));
        Ok(())
    })
}

/// # Safety
/// `peakons` must come from [`chsim_peakons_new`] or be null.
#[no_mangle]
pub unsafe extern "C" fn chsim_peakons_free(peakons: *mut ChsimPeakons) {
    free(peakons)
}

/// Number of peaks, or 0 for a null handle.
///
/// # Safety
/// `peakons` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn chsim_peakons_len(peakons: *const ChsimPeakons) -> usize {
    peakons.as_ref().map_or(0, |p| p.0.n())
}

/// Copy positions, heights and cumulative energies into arrays of length
/// [`chsim_peakons_len`]. Any output may be null.
///
/// # Safety
/// `peakons` must be a live handle; non-null arrays must be large enough.
#[no_mangle]
pub unsafe extern "C" fn chsim_peakons_get(
    peakons: *const ChsimPeakons,
    y: *mut f64,
    u: *mut f64,
    h: *mut f64,
) -> ChsimStatus {
    guard(|| {
        let s = &as_ref(peakons, "peakons")?.0;
        for (dst, src) in [(y, &s.y), (u, &s.u), (h, &s.h_cum)] {
            if !dst.is_null() {
                slice_mut(dst, s.n(), "output")?.copy_from_slice(src);
            }
        }
        Ok(())
    })
}

/// Energy and momentum over one period.
///
/// # Safety
/// `peakons` must be a live handle; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn chsim_peakons_invariants(
    peakons: *const ChsimPeakons,
    energy: *mut f64,
    momentum: *mut f64,
) -> ChsimStatus {
    guard(|| {
        let s = &as_ref(peakons, "peakons")?.0;
        *out_ptr(energy, "energy")? = s.energy();
        *out_ptr(momentum, "momentum")? = multipeakon::momentum(s);
        Ok(())
    })
}

/// Evaluate `u` and `u_x` of the interpolant at points `x[0..len]`.
///
/// # Safety
/// `peakons` must be a live handle; arrays must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn chsim_peakons_eval(
    peakons: *const ChsimPeakons,
    x: *const f64,
    len: usize,
    u: *mut f64,
    ux: *mut f64,
) -> ChsimStatus {
    guard(|| {
        let s = &as_ref(peakons, "peakons")?.0;
        let (vu, vux) = multipeakon::eval_interpolant(s, slice(x, len, "x")?);
        slice_mut(u, len, "u")?.copy_from_slice(&vu);
        slice_mut(ux, len, "ux")?.copy_from_slice(&vux);
        Ok(())
    })
}

/// Advance the state in place by `dt >= 0` with the adaptive integrator.
///
/// # Safety
/// `peakons` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn chsim_peakons_advance(
    peakons: *mut ChsimPeakons,
    dt: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> ChsimStatus {
    guard(|| {
        let p = as_mut(peakons, "peakons")?;
        if !(dt >= 0.0 && dt.is_finite()) {
            return Err(invalid(format!("dt must be finite and nonnegative, got {dt}")));
        }
        let tol = Tolerances::new(abs_tol, rel_tol)?;
        let mut traj = PeakonReference::compute(&p.0, &[dt], tol)?;
        p.0 = traj.states.pop().expect("one sample");
        Ok(())
    })
}

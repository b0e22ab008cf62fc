//! C ABI over the `hazode` core.
//!
//! Objects are opaque heap handles created by `*_new`/`*_from_*` functions
//! and released with the matching `*_free`. Every fallible call returns a
//! [`HazodeStatus`]; the message of the most recent failure on the calling
//! thread is available from [`hazode_last_error`].

use hazode::cli::{parse_kv, CliError};
use hazode::dataset::{ingest_survival_data, StatusConvention, SurvivalDataset, TimeUnit};
use hazode::inference::{log_likelihood, mgf, MgfConfig};
use hazode::models::ModelSpec;
use hazode::ode::{Channel, Trajectory};
use hazode::sampling::{simulate_dataset, Censoring, InversionConfig};
use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HazodeStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Invalid parameters, configuration or arguments.
    Config = 2,
    /// Numerical failure (non-positive hazard, blow-up, non-convergence).
    Numeric = 3,
    /// Malformed or inconsistent data.
    Data = 4,
    /// Caller buffer too small; the required length is reported.
    BufferTooSmall = 5,
    /// A Rust panic was caught at the boundary.
    Internal = 6,
}

/// Trajectory channel selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HazodeChannel {
    Hazard = 0,
    Slope = 1,
    CumHazard = 2,
}

/// Status column convention for CSV ingest.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HazodeConvention {
    /// 1 = event, 0 = censored.
    Status01 = 0,
    /// 2 = event, 1 = censored.
    Status12 = 1,
}

/// Opaque hazard model.
pub struct HazodeModel(ModelSpec);

/// Opaque solved trajectory (t, h, v, H on a uniform grid).
pub struct HazodeTrajectory(Trajectory);

/// Opaque right-censored dataset.
pub struct HazodeDataset(SurvivalDataset);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(e: CliError) -> HazodeStatus {
    set_error(e.message);
    match e.code {
        3 => HazodeStatus::Numeric,
        4 => HazodeStatus::Data,
        _ => HazodeStatus::Config,
    }
}

fn config(msg: &str) -> HazodeStatus {
    set_error(msg);
    HazodeStatus::Config
}

fn null(what: &str) -> HazodeStatus {
    set_error(format!("null pointer: {what}"));
    HazodeStatus::NullPointer
}

/// Runs `f`, turning panics into [`HazodeStatus::Internal`].
fn guard(f: impl FnOnce() -> Result<(), HazodeStatus>) -> HazodeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HazodeStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            HazodeStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, HazodeStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| config(&format!("{what} is not valid UTF-8")))
}

unsafe fn obj<'a, T>(p: *const T, what: &str) -> Result<&'a T, HazodeStatus> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, HazodeStatus> {
    p.as_mut().ok_or_else(|| null(what))
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`) and returns the full message length in bytes.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn hazode_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Builds a model from `key = value` lines, e.g.
/// `"model = damped\nalpha = 0.5\nbeta = 1\ngamma = 0.2\nh0 = 0.1\nv0 = 0.3"`.
///
/// # Safety
/// `text` must be a NUL-terminated string; `model_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hazode_model_from_kv(
    text: *const c_char,
    model_out: *mut *mut HazodeModel,
) -> HazodeStatus {
    guard(|| {
        let slot = out(model_out, "model_out")?;
        let kv = parse_kv(str_arg(text, "text")?).map_err(status_of)?;
        let spec = ModelSpec::from_kv(&kv).map_err(|e| status_of(e.into()))?;
        *slot = Box::into_raw(Box::new(HazodeModel(spec)));
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn hazode_model_free(model: *mut HazodeModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Closed-form `h(t)` and `H(t)` when the family has them; otherwise
/// [`HazodeStatus::Config`] (integrate a trajectory instead).
///
/// # Safety
/// Pointers must be valid; outputs may be null when not wanted.
#[no_mangle]
pub unsafe extern "C" fn hazode_model_closed_form(
    model: *const HazodeModel,
    t: f64,
    hazard_out: *mut f64,
    cum_hazard_out: *mut f64,
) -> HazodeStatus {
    guard(|| {
        let m = &obj(model, "model")?.0;
        if !(t >= 0.0 && t.is_finite()) {
            return Err(config(&format!("t = {t} must be finite and non-negative")));
        }
        let (h, cum) = m
            .closed_pair(t)
            .ok_or_else(|| config(&format!("{} has no closed form", m.tag())))?;
        if let Some(p) = hazard_out.as_mut() {
            *p = h;
        }
        if let Some(p) = cum_hazard_out.as_mut() {
            *p = cum;
        }
        Ok(())
    })
}

/// Integrates the model on `[0, t_end]` with step `dt`.
///
/// # Safety
/// `model` must be a valid handle; `traj_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hazode_trajectory_new(
    model: *const HazodeModel,
    t_end: f64,
    dt: f64,
    traj_out: *mut *mut HazodeTrajectory,
) -> HazodeStatus {
    guard(|| {
        let slot = out(traj_out, "traj_out")?;
        let traj = obj(model, "model")?
            .0
            .trajectory(t_end, dt)
            .map_err(|e| status_of(e.into()))?;
        *slot = Box::into_raw(Box::new(HazodeTrajectory(traj)));
        Ok(())
    })
}

/// # Safety
/// `traj` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn hazode_trajectory_free(traj: *mut HazodeTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Number of grid points (0 for a null handle).
///
/// # Safety
/// `traj` must be null or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn hazode_trajectory_len(traj: *const HazodeTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.0.len())
}

fn channel(c: HazodeChannel) -> Channel {
    match c {
        HazodeChannel::Hazard => Channel::Hazard,
        HazodeChannel::Slope => Channel::Slope,
        HazodeChannel::CumHazard => Channel::CumHazard,
    }
}

/// Copies one channel into `buf`, which must hold at least
/// [`hazode_trajectory_len`] values.
///
/// # Safety
/// `buf` must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn hazode_trajectory_copy(
    traj: *const HazodeTrajectory,
    which: HazodeChannel,
    buf: *mut f64,
    len: usize,
) -> HazodeStatus {
    guard(|| {
        let values = obj(traj, "traj")?.0.channel(channel(which));
        if buf.is_null() {
            return Err(null("buf"));
        }
        if len < values.len() {
            set_error(format!("buffer holds {len} values, need {}", values.len()));
            return Err(HazodeStatus::BufferTooSmall);
        }
        std::ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
        Ok(())
    })
}

/// Linear interpolation of one channel at `t`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hazode_trajectory_interp(
    traj: *const HazodeTrajectory,
    which: HazodeChannel,
    t: f64,
    value_out: *mut f64,
) -> HazodeStatus {
    guard(|| {
        let slot = out(value_out, "value_out")?;
        *slot = obj(traj, "traj")?
            .0
            .interp(channel(which), t)
            .map_err(|e| status_of(hazode::models::ModelError::from(e).into()))?;
        Ok(())
    })
}

/// Wraps caller arrays as a dataset; `events[i]` is nonzero for an event.
///
/// # Safety
/// `times` and `events` must be valid for `n` reads.
#[no_mangle]
pub unsafe extern "C" fn hazode_dataset_new(
    times: *const f64,
    events: *const u8,
    n: usize,
    data_out: *mut *mut HazodeDataset,
) -> HazodeStatus {
    guard(|| {
        let slot = out(data_out, "data_out")?;
        if times.is_null() || events.is_null() {
            return Err(null("times/events"));
        }
        let t = std::slice::from_raw_parts(times, n).to_vec();
        let d = std::slice::from_raw_parts(events, n)
            .iter()
            .map(|&e| e != 0)
            .collect();
        let data = SurvivalDataset::new(t, d).map_err(|e| status_of(e.into()))?;
        *slot = Box::into_raw(Box::new(HazodeDataset(data)));
        Ok(())
    })
}

/// Parses a `time,status` CSV held in memory. With `days_to_years` nonzero,
/// times are divided by 365.25.
///
/// # Safety
/// `csv` must be a NUL-terminated string; `data_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hazode_dataset_from_csv(
    csv: *const c_char,
    convention: HazodeConvention,
    days_to_years: u8,
    data_out: *mut *mut HazodeDataset,
) -> HazodeStatus {
    guard(|| {
        let slot = out(data_out, "data_out")?;
        let text = str_arg(csv, "csv")?;
        let conv = match convention {
            HazodeConvention::Status01 => StatusConvention::Status01,
            HazodeConvention::Status12 => StatusConvention::Status12,
        };
        let unit = if days_to_years != 0 {
            TimeUnit::DaysToYears
        } else {
            TimeUnit::Native
        };
        let data =
            ingest_survival_data(text.as_bytes(), conv, unit).map_err(|e| status_of(e.into()))?;
        *slot = Box::into_raw(Box::new(HazodeDataset(data)));
        Ok(())
    })
}

/// Simulates `n` observations from `model` with `Uniform(0, c_max)`
/// censoring; `c_max <= 0` means no censoring. Deterministic in `seed`.
///
/// # Safety
/// `model` must be a valid handle; `data_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hazode_simulate(
    model: *const HazodeModel,
    n: usize,
    c_max: f64,
    seed: u64,
    data_out: *mut *mut HazodeDataset,
) -> HazodeStatus {
    guard(|| {
        let slot = out(data_out, "data_out")?;
        let m = &obj(model, "model")?.0;
        let censor = if c_max > 0.0 {
            Censoring::Uniform { c_max }
        } else {
            Censoring::None
        };
        let data = simulate_dataset(m, n, censor, seed, &InversionConfig::default())
            .map_err(|e| status_of(e.into()))?;
        *slot = Box::into_raw(Box::new(HazodeDataset(data)));
        Ok(())
    })
}

/// # Safety
/// `data` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn hazode_dataset_free(data: *mut HazodeDataset) {
    if !data.is_null() {
        drop(Box::from_raw(data));
    }
}

/// Number of observations (0 for a null handle).
///
/// # Safety
/// `data` must be null or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn hazode_dataset_len(data: *const HazodeDataset) -> usize {
    data.as_ref().map_or(0, |d| d.0.len())
}

/// Copies times and event indicators out; either buffer may be null.
///
/// # Safety
/// Non-null buffers must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn hazode_dataset_copy(
    data: *const HazodeDataset,
    times: *mut f64,
    events: *mut u8,
    len: usize,
) -> HazodeStatus {
    guard(|| {
        let d = &obj(data, "data")?.0;
        if len < d.len() {
            set_error(format!("buffer holds {len} values, need {}", d.len()));
            return Err(HazodeStatus::BufferTooSmall);
        }
        for (i, (t, e)) in d.iter().enumerate() {
            if !times.is_null() {
                *times.add(i) = t;
            }
            if !events.is_null() {
                *events.add(i) = u8::from(e);
            }
        }
        Ok(())
    })
}

/// Right-censored log-likelihood of `data` under `model`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hazode_log_likelihood(
    model: *const HazodeModel,
    data: *const HazodeDataset,
    value_out: *mut f64,
) -> HazodeStatus {
    guard(|| {
        let slot = out(value_out, "value_out")?;
        let ll = log_likelihood(&obj(model, "model")?.0, &obj(data, "data")?.0);
        if !ll.is_finite() {
            set_error(format!("log-likelihood is {ll}"));
            return Err(HazodeStatus::Numeric);
        }
        *slot = ll;
        Ok(())
    })
}

/// `E[exp(sT)]`. On divergence `*divergent_out = 1` and `*value_out` is
/// `+inf`; the call still returns [`HazodeStatus::Ok`].
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hazode_mgf(
    model: *const HazodeModel,
    s: f64,
    value_out: *mut f64,
    divergent_out: *mut u8,
) -> HazodeStatus {
    guard(|| {
        let value = out(value_out, "value_out")?;
        let flag = out(divergent_out, "divergent_out")?;
        let r = mgf(&obj(model, "model")?.0, s, &MgfConfig::default())
            .map_err(|e| status_of(e.into()))?;
        *value = r.value.unwrap_or(f64::INFINITY);
        *flag = u8::from(r.divergent);
        Ok(())
    })
}

//! C ABI for `rilab`.
//!
//! Conventions:
//!
//! - Every function returns a [`RilabStatus`]; results go through out-pointers.
//! - Models and experiment reports are opaque handles. Models come from
//!   `rilab_model_charged`, `rilab_model_harmonic` or `rilab_model_damped`
//!   and reports from `rilab_strong_error`; each has a matching `*_free`.
//! - Arrays are passed as pointer plus element count. Matrices are row-major.
//! - On failure, [`rilab_last_error_message`] describes the most recent error
//!   raised on the calling thread.
//! - Panics never cross the boundary; they are reported as
//!   [`RilabStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use rilab::analysis::{strong_error_experiment, ErrorReport, ExperimentConfig, OracleKind};
use rilab::interaction::{self, run_chain};
use rilab::models::{harmonic_exact_flow, ChargedParticleParams, DampedParams, HarmonicParams, ModelSpec};
use rilab::reference::lyapunov_stationary;
use rilab::wiener::{sample_increments, IncrementSequence, NoiseSpec};
use rilab::{Error, InteractionModel};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RilabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    OutOfDomain = 4,
    NotDivisible = 5,
    Blowup = 6,
    DegenerateSamples = 7,
    TooFewPoints = 8,
    NotHurwitz = 9,
    ExperimentInvalid = 10,
    /// The caller's output buffer is shorter than required.
    BufferTooSmall = 11,
    Panic = 12,
}

/// Reference solution used by [`rilab_strong_error`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RilabOracle {
    /// Fine-grid Euler scheme of the limit equation.
    Euler = 0,
    /// Closed-form solution; charged-particle models only.
    ExactCharged = 1,
}

/// Opaque interaction model.
pub struct RilabModel {
    spec: ModelSpec,
    model: InteractionModel,
}

/// Opaque result of a strong-error experiment.
pub struct RilabErrorReport {
    report: ErrorReport,
}

/// Strong-error experiment settings. `h_list` and `p_list` are borrowed for
/// the duration of the call.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RilabExperimentConfig {
    pub tau: f64,
    pub h_list: *const f64,
    pub n_h: usize,
    pub n_paths: usize,
    pub p_list: *const f64,
    pub n_p: usize,
    pub master_seed: u64,
    pub oracle_refinement: usize,
    /// Oracle step; zero or negative selects `h_max / oracle_refinement`.
    pub oracle_step: f64,
    pub temperature: f64,
}

/// One `(h, p)` estimate of a report.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RilabErrorRow {
    pub h: f64,
    pub p: f64,
    pub error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_paths: usize,
    pub n_blowups: usize,
}

/// Log-log regression of the error against `h`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RilabFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

struct Failure(RilabStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::InvalidConfig(_) => RilabStatus::InvalidArgument,
            Error::DimensionMismatch { .. } => RilabStatus::DimensionMismatch,
            Error::OutOfDomain { .. } => RilabStatus::OutOfDomain,
            Error::NotDivisible { .. } => RilabStatus::NotDivisible,
            Error::Blowup { .. } => RilabStatus::Blowup,
            Error::DegenerateSamples => RilabStatus::DegenerateSamples,
            Error::TooFewPoints(_) => RilabStatus::TooFewPoints,
            Error::NotHurwitz => RilabStatus::NotHurwitz,
            Error::ExperimentInvalid { .. } => RilabStatus::ExperimentInvalid,
        };
        Failure(status, e.to_string())
    }
}

fn fail(status: RilabStatus, message: impl Into<String>) -> Failure {
    Failure(status, message.into())
}

/// Runs `body`, converting errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> RilabStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => RilabStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(&message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("panic: {message}"));
            RilabStatus::Panic
        }
    }
}

unsafe fn slice<'a>(data: *const f64, len: usize, name: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(fail(RilabStatus::NullPointer, format!("`{name}` is null")));
    }
    Ok(std::slice::from_raw_parts(data, len))
}

unsafe fn slice_mut<'a>(data: *mut f64, len: usize, needed: usize, name: &str) -> Result<&'a mut [f64], Failure> {
    if data.is_null() {
        return Err(fail(RilabStatus::NullPointer, format!("`{name}` is null")));
    }
    if len < needed {
        return Err(fail(
            RilabStatus::BufferTooSmall,
            format!("`{name}` holds {len} values, {needed} needed"),
        ));
    }
    Ok(std::slice::from_raw_parts_mut(data, len))
}

unsafe fn model_ref<'a>(model: *const RilabModel) -> Result<&'a RilabModel, Failure> {
    model
        .as_ref()
        .ok_or_else(|| fail(RilabStatus::NullPointer, "model handle is null"))
}

unsafe fn write_out<T>(out: *mut T, value: T, name: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(fail(RilabStatus::NullPointer, format!("`{name}` is null")));
    }
    out.write(value);
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rilab_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version contains NUL"),
    };
    VERSION.as_ptr()
}

/// Message of the last failed call on this thread, or an empty string.
///
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rilab_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

fn new_model(spec: ModelSpec, out: *mut *mut RilabModel) -> RilabStatus {
    guard(|| {
        if out.is_null() {
            return Err(fail(RilabStatus::NullPointer, "`out` is null"));
        }
        let model = spec.build()?;
        let handle = Box::into_raw(Box::new(RilabModel { spec, model }));
        unsafe { out.write(handle) };
        Ok(())
    })
}

/// Charged particle in a uniform field. Requires `mass > 0`.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn rilab_model_charged(charge: f64, mass: f64, out: *mut *mut RilabModel) -> RilabStatus {
    new_model(ModelSpec::Charged(ChargedParticleParams { charge, mass }), out)
}

/// Harmonic pair with spring rest length `rest_length`.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn rilab_model_harmonic(rest_length: f64, out: *mut *mut RilabModel) -> RilabStatus {
    new_model(ModelSpec::Harmonic(HarmonicParams { rest_length }), out)
}

/// Damped oscillator. Requires `friction > 0` and `temperature >= 0`.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn rilab_model_damped(
    friction: f64,
    temperature: f64,
    out: *mut *mut RilabModel,
) -> RilabStatus {
    new_model(ModelSpec::Damped(DampedParams { friction, temperature }), out)
}

/// Releases a model. Null is ignored.
///
/// # Safety
/// `model` must come from a `rilab_model_*` constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rilab_model_free(model: *mut RilabModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Dimensions of the system state and of one environment increment.
///
/// # Safety
/// `model` must be a live handle; the out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn rilab_model_dims(
    model: *const RilabModel,
    state_dim: *mut usize,
    noise_dim: *mut usize,
) -> RilabStatus {
    guard(|| {
        let m = model_ref(model)?;
        write_out(state_dim, m.model.state_dim(), "state_dim")?;
        write_out(noise_dim, m.model.noise_dim(), "noise_dim")
    })
}

/// One interaction `U(x, y)` at step `h`; writes `state_dim` values to `out`.
///
/// # Safety
/// Pointers must reference arrays of at least the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn rilab_step(
    model: *const RilabModel,
    h: f64,
    x: *const f64,
    x_len: usize,
    y: *const f64,
    y_len: usize,
    out: *mut f64,
    out_len: usize,
) -> RilabStatus {
    guard(|| {
        let m = model_ref(model)?;
        let next = interaction::step(&m.model, h, slice(x, x_len, "x")?, slice(y, y_len, "y")?)?;
        slice_mut(out, out_len, next.len(), "out")?[..next.len()].copy_from_slice(&next);
        Ok(())
    })
}

/// Runs the chain from `x0` over `n_steps` increments stored row-major in
/// `increments` (`n_steps * noise_dim` values). Writes the `n_steps + 1`
/// states, row-major, to `out`.
///
/// # Safety
/// Pointers must reference arrays of at least the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn rilab_run_chain(
    model: *const RilabModel,
    h: f64,
    x0: *const f64,
    x0_len: usize,
    increments: *const f64,
    n_steps: usize,
    out: *mut f64,
    out_len: usize,
) -> RilabStatus {
    guard(|| {
        let m = model_ref(model)?;
        let d = m.model.noise_dim();
        let values = slice(increments, n_steps * d, "increments")?.to_vec();
        let inc = IncrementSequence::new(h, d, values)?;
        let traj = run_chain(&m.model, h, slice(x0, x0_len, "x0")?, &inc)?;
        let states = traj.as_slice();
        slice_mut(out, out_len, states.len(), "out")?[..states.len()].copy_from_slice(states);
        Ok(())
    })
}

/// Deterministic Brownian increments of path `path_index`: `floor(horizon / step)`
/// rows of `dim` values, each `Normal(0, temperature * step)`. The number of
/// rows is written to `n_steps`.
///
/// # Safety
/// `out` must hold `out_len` values; `n_steps` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rilab_sample_increments(
    master_seed: u64,
    path_index: u64,
    dim: usize,
    step: f64,
    horizon: f64,
    temperature: f64,
    out: *mut f64,
    out_len: usize,
    n_steps: *mut usize,
) -> RilabStatus {
    guard(|| {
        let spec = NoiseSpec::new(master_seed, dim, step, horizon, temperature)?;
        let needed = spec.n_steps() * dim;
        let buf = slice_mut(out, out_len, needed, "out")?;
        let inc = sample_increments(&spec, path_index)?;
        buf[..needed].copy_from_slice(inc.as_slice());
        write_out(n_steps, inc.len(), "n_steps")
    })
}

/// Closed-form flow of the harmonic pair: `state` and `out` are `(Q1, P1, Q2, P2)`.
///
/// # Safety
/// `state` and `out` must each reference 4 values.
#[no_mangle]
pub unsafe extern "C" fn rilab_harmonic_exact_flow(
    state: *const f64,
    rest_length: f64,
    t: f64,
    out: *mut f64,
) -> RilabStatus {
    guard(|| {
        let s = slice(state, 4, "state")?;
        let next = harmonic_exact_flow([s[0], s[1], s[2], s[3]], rest_length, t);
        slice_mut(out, 4, 4, "out")?.copy_from_slice(&next);
        Ok(())
    })
}

/// Stationary covariance `C` of `dX = A X dt + Σ dW`, solving `A C + C Aᵀ + Σ Σᵀ = 0`.
/// `a` is `n × n`, `sigma` is `n × m`, `out` receives `n × n`; all row-major.
///
/// # Safety
/// Pointers must reference arrays of the stated shapes.
#[no_mangle]
pub unsafe extern "C" fn rilab_lyapunov_stationary(
    a: *const f64,
    n: usize,
    sigma: *const f64,
    m: usize,
    out: *mut f64,
) -> RilabStatus {
    guard(|| {
        if n == 0 || m == 0 {
            return Err(fail(RilabStatus::InvalidArgument, "matrix dimensions must be positive"));
        }
        let a = nalgebra::DMatrix::from_row_slice(n, n, slice(a, n * n, "a")?);
        let s = nalgebra::DMatrix::from_row_slice(n, m, slice(sigma, n * m, "sigma")?);
        let c = lyapunov_stationary(&a, &s)?;
        let buf = slice_mut(out, n * n, n * n, "out")?;
        for i in 0..n {
            for j in 0..n {
                buf[i * n + j] = c[(i, j)];
            }
        }
        Ok(())
    })
}

/// Strong sup-error experiment of `model` against `oracle`, started at `x0`.
/// On success `*out` receives a report handle to release with
/// [`rilab_report_free`].
///
/// # Safety
/// `config` must be readable and its arrays valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rilab_strong_error(
    model: *const RilabModel,
    oracle: RilabOracle,
    config: *const RilabExperimentConfig,
    x0: *const f64,
    x0_len: usize,
    out: *mut *mut RilabErrorReport,
) -> RilabStatus {
    guard(|| {
        let m = model_ref(model)?;
        let c = config
            .as_ref()
            .ok_or_else(|| fail(RilabStatus::NullPointer, "`config` is null"))?;
        if out.is_null() {
            return Err(fail(RilabStatus::NullPointer, "`out` is null"));
        }
        let oracle = match (oracle, m.spec) {
            (RilabOracle::Euler, _) => OracleKind::Euler,
            (RilabOracle::ExactCharged, ModelSpec::Charged(p)) => OracleKind::ExactCharged {
                charge: p.charge,
                mass: p.mass,
            },
            (RilabOracle::ExactCharged, _) => {
                return Err(fail(
                    RilabStatus::InvalidArgument,
                    "the exact oracle is available for charged-particle models only",
                ))
            }
        };
        let cfg = ExperimentConfig {
            tau: c.tau,
            h_list: slice(c.h_list, c.n_h, "h_list")?.to_vec(),
            n_paths: c.n_paths,
            p_list: slice(c.p_list, c.n_p, "p_list")?.to_vec(),
            master_seed: c.master_seed,
            oracle_refinement: c.oracle_refinement,
            oracle_step: (c.oracle_step > 0.0).then_some(c.oracle_step),
            temperature: c.temperature,
        };
        let report = strong_error_experiment(&m.model, oracle, &cfg, slice(x0, x0_len, "x0")?)?;
        out.write(Box::into_raw(Box::new(RilabErrorReport { report })));
        Ok(())
    })
}

/// Releases a report. Null is ignored.
///
/// # Safety
/// `report` must come from [`rilab_strong_error`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rilab_report_free(report: *mut RilabErrorReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Number of `(h, p)` rows, ordered by `h` descending then `p` ascending.
///
/// # Safety
/// `report` must be a live handle; `count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rilab_report_row_count(report: *const RilabErrorReport, count: *mut usize) -> RilabStatus {
    guard(|| {
        let r = report
            .as_ref()
            .ok_or_else(|| fail(RilabStatus::NullPointer, "report handle is null"))?;
        write_out(count, r.report.rows.len(), "count")
    })
}

/// Row `index` of the report.
///
/// # Safety
/// `report` must be a live handle; `row` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rilab_report_row(
    report: *const RilabErrorReport,
    index: usize,
    row: *mut RilabErrorRow,
) -> RilabStatus {
    guard(|| {
        let r = report
            .as_ref()
            .ok_or_else(|| fail(RilabStatus::NullPointer, "report handle is null"))?;
        let x = r.report.rows.get(index).ok_or_else(|| {
            fail(
                RilabStatus::InvalidArgument,
                format!("row {index} out of range ({} rows)", r.report.rows.len()),
            )
        })?;
        write_out(
            row,
            RilabErrorRow {
                h: x.h,
                p: x.p,
                error: x.error,
                ci_low: x.ci_low,
                ci_high: x.ci_high,
                n_paths: x.n_paths,
                n_blowups: x.n_blowups,
            },
            "row",
        )
    })
}

/// Rate fit for exponent `p`. Fails with `TooFewPoints` when fewer than three
/// positive estimates were available.
///
/// # Safety
/// `report` must be a live handle; `fit` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rilab_report_fit(report: *const RilabErrorReport, p: f64, fit: *mut RilabFit) -> RilabStatus {
    guard(|| {
        let r = report
            .as_ref()
            .ok_or_else(|| fail(RilabStatus::NullPointer, "report handle is null"))?;
        let entry = r
            .report
            .fits
            .iter()
            .find(|e| e.p == p)
            .ok_or_else(|| fail(RilabStatus::InvalidArgument, format!("no exponent p = {p} in report")))?;
        let f = entry
            .fit
            .ok_or_else(|| fail(RilabStatus::TooFewPoints, format!("no rate fit for p = {p}")))?;
        write_out(
            fit,
            RilabFit {
                slope: f.slope,
                intercept: f.intercept,
                r_squared: f.r_squared,
            },
            "fit",
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    #[test]
    fn error_mapping_covers_config() {
        let Failure(status, message) = Error::NotHurwitz.into();
        assert_eq!(status, RilabStatus::NotHurwitz);
        assert!(message.contains("Hurwitz"));
    }

    #[test]
    fn panics_are_contained() {
        let status = guard(|| panic!("boom"));
        assert_eq!(status, RilabStatus::Panic);
        let msg = unsafe { CStr::from_ptr(rilab_last_error_message()) };
        assert_eq!(msg.to_str().unwrap(), "panic: boom");
    }

    #[test]
    fn null_buffers_are_rejected() {
        assert!(unsafe { slice(ptr::null(), 3, "x") }.is_err());
        assert!(unsafe { slice(ptr::null(), 0, "x") }.is_ok());
    }
}

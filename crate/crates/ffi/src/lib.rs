//! C ABI over `starflow`.
//!
//! Objects are opaque handles released with the matching `*_free`. Every fallible call
//! returns a `StarflowStatus`; on failure `starflow_last_error` describes the cause. The
//! message lives in thread-local storage and stays valid until the next failing call on the
//! same thread.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use libc::c_char;

use starflow::flow::{estimate_blowup_time, run};
use starflow::geometry::{diameter, make_shape};
use starflow::harness::{emit_outputs, parse_config, report_json, run_experiment, Mode, RunReport};
use starflow::{Dim, Error, FlowConfig, FlowSeries, Preset, StarShape, Termination};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StarflowStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    NotStarShaped = 4,
    Degenerate = 5,
    InsufficientData = 6,
    Io = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// How a flow run ended.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StarflowTermination {
    ReachedTEnd = 0,
    BlowupDetected = 1,
    StarShapeLost = 2,
    StepLimit = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StarflowMode {
    Full = 0,
    Convergence = 1,
}

/// Time-stepping parameters; obtain defaults from `starflow_flow_config_default`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StarflowFlowConfig {
    pub cfl_factor: f64,
    pub t_end: f64,
    pub blowup_threshold: f64,
    pub snapshot_interval: f64,
    pub max_steps: u64,
}

impl From<StarflowFlowConfig> for FlowConfig {
    fn from(c: StarflowFlowConfig) -> Self {
        FlowConfig {
            cfl_factor: c.cfl_factor,
            t_end: c.t_end,
            blowup_threshold: c.blowup_threshold,
            snapshot_interval: c.snapshot_interval,
            max_steps: c.max_steps,
        }
    }
}

/// Opaque sampled initial shape.
pub struct StarflowShape(StarShape);

/// Opaque flow run.
pub struct StarflowSeries(FlowSeries);

/// Opaque experiment report.
pub struct StarflowReport(RunReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> StarflowStatus {
    match e {
        Error::UnknownPreset(_)
        | Error::InvalidParameter { .. }
        | Error::GridTooSmall { .. }
        | Error::UnsupportedDimension(_)
        | Error::InvalidFlowConfig(_)
        | Error::InvalidArgument(_)
        | Error::NonPositiveTau { .. } => StarflowStatus::InvalidArgument,
        Error::NotStarShaped(_) => StarflowStatus::NotStarShaped,
        Error::DegenerateShape(_) => StarflowStatus::Degenerate,
        Error::InsufficientData(_) => StarflowStatus::InsufficientData,
        Error::Config { .. } => StarflowStatus::Config,
        Error::Io { .. } => StarflowStatus::Io,
        Error::Json(_) => StarflowStatus::Io,
    }
}

fn fail(status: StarflowStatus, message: impl Into<String>) -> StarflowStatus {
    set_last_error(message.into());
    status
}

fn guard(f: impl FnOnce() -> Result<(), StarflowStatus>) -> StarflowStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => StarflowStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(StarflowStatus::Panic, "internal panic"),
    }
}

fn lift<T>(r: starflow::Result<T>) -> Result<T, StarflowStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, StarflowStatus> {
    if p.is_null() {
        return Err(fail(StarflowStatus::NullPointer, format!("`{name}` is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(StarflowStatus::InvalidArgument, format!("`{name}` is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, StarflowStatus> {
    p.as_ref()
        .ok_or_else(|| fail(StarflowStatus::NullPointer, format!("`{name}` is null")))
}

unsafe fn out_arg<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, StarflowStatus> {
    p.as_mut()
        .ok_or_else(|| fail(StarflowStatus::NullPointer, format!("`{name}` is null")))
}

/// Message of the last failure on this thread, or null if none.
#[no_mangle]
pub extern "C" fn starflow_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn starflow_flow_config_default() -> StarflowFlowConfig {
    let d = FlowConfig::default();
    StarflowFlowConfig {
        cfl_factor: d.cfl_factor,
        t_end: d.t_end,
        blowup_threshold: d.blowup_threshold,
        snapshot_interval: d.snapshot_interval,
        max_steps: d.max_steps,
    }
}

/// Samples a preset (`"round"`: `p1 = R0`; `"flower"`: `p1 = eps`, `p2 = k`;
/// `"ellipse"`: `p1 = a`, `p2 = b`) on `nodes` grid nodes in dimension `n`.
///
/// # Safety
/// `preset` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn starflow_shape_new(
    preset: *const c_char,
    p1: f64,
    p2: f64,
    n: u32,
    nodes: usize,
    out: *mut *mut StarflowShape,
) -> StarflowStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let name = str_arg(preset, "preset")?;
        let params: &[(&str, f64)] = match name {
            "round" => &[("R0", p1)],
            "flower" => &[("eps", p1), ("k", p2)],
            "ellipse" => &[("a", p1), ("b", p2)],
            _ => &[],
        };
        let preset = lift(Preset::from_name(name, params))?;
        let dim = lift(Dim::from_n(n as usize))?;
        let shape = lift(make_shape(&preset, dim, nodes))?;
        *out = Box::into_raw(Box::new(StarflowShape(shape)));
        Ok(())
    })
}

/// # Safety
/// `shape` must come from `starflow_shape_new` (or be null) and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn starflow_shape_free(shape: *mut StarflowShape) {
    if !shape.is_null() {
        drop(Box::from_raw(shape));
    }
}

/// Number of grid nodes, 0 for a null handle.
///
/// # Safety
/// `shape` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn starflow_shape_len(shape: *const StarflowShape) -> usize {
    shape.as_ref().map_or(0, |s| s.0.len())
}

/// Copies the node radii into `out`, which must hold `starflow_shape_len` values.
///
/// # Safety
/// `out` must point to `capacity` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn starflow_shape_radius(
    shape: *const StarflowShape,
    out: *mut f64,
    capacity: usize,
) -> StarflowStatus {
    guard(|| {
        let shape = ref_arg(shape, "shape")?;
        if out.is_null() {
            return Err(fail(StarflowStatus::NullPointer, "`out` is null"));
        }
        let r = shape.0.radius();
        if capacity < r.len() {
            return Err(fail(
                StarflowStatus::BufferTooSmall,
                format!("need {} values, got {capacity}", r.len()),
            ));
        }
        std::slice::from_raw_parts_mut(out, r.len()).copy_from_slice(&r);
        Ok(())
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn starflow_shape_diameter(
    shape: *const StarflowShape,
    out: *mut f64,
) -> StarflowStatus {
    guard(|| {
        let shape = ref_arg(shape, "shape")?;
        *out_arg(out, "out")? = diameter(&shape.0);
        Ok(())
    })
}

/// Runs the flow from `shape`.
///
/// # Safety
/// Pointers must be valid; `out` receives a handle owned by the caller.
#[no_mangle]
pub unsafe extern "C" fn starflow_flow_run(
    shape: *const StarflowShape,
    config: *const StarflowFlowConfig,
    out: *mut *mut StarflowSeries,
) -> StarflowStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let shape = ref_arg(shape, "shape")?;
        let config = ref_arg(config, "config")?;
        let series = lift(run(&shape.0, &FlowConfig::from(*config)))?;
        *out = Box::into_raw(Box::new(StarflowSeries(series)));
        Ok(())
    })
}

/// # Safety
/// `series` must come from `starflow_flow_run` (or be null) and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn starflow_series_free(series: *mut StarflowSeries) {
    if !series.is_null() {
        drop(Box::from_raw(series));
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn starflow_series_final_time(
    series: *const StarflowSeries,
    out: *mut f64,
) -> StarflowStatus {
    guard(|| {
        *out_arg(out, "out")? = ref_arg(series, "series")?.0.final_t;
        Ok(())
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn starflow_series_termination(
    series: *const StarflowSeries,
    out: *mut StarflowTermination,
) -> StarflowStatus {
    guard(|| {
        let t = match ref_arg(series, "series")?.0.termination {
            Termination::ReachedTEnd => StarflowTermination::ReachedTEnd,
            Termination::BlowupDetected => StarflowTermination::BlowupDetected,
            Termination::StarShapeLost => StarflowTermination::StarShapeLost,
            Termination::StepLimit => StarflowTermination::StepLimit,
        };
        *out_arg(out, "out")? = t;
        Ok(())
    })
}

/// Number of recorded snapshots, 0 for a null handle.
///
/// # Safety
/// `series` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn starflow_series_snapshot_count(series: *const StarflowSeries) -> usize {
    series.as_ref().map_or(0, |s| s.0.snapshots.len())
}

/// Extrapolated blow-up time of a run that ended in blow-up.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn starflow_series_blowup_time(
    series: *const StarflowSeries,
    out: *mut f64,
) -> StarflowStatus {
    guard(|| {
        let estimate = lift(estimate_blowup_time(&ref_arg(series, "series")?.0))?;
        *out_arg(out, "out")? = estimate.time;
        Ok(())
    })
}

/// Parses a TOML experiment and runs it.
///
/// # Safety
/// `config_toml` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn starflow_experiment_run(
    config_toml: *const c_char,
    mode: StarflowMode,
    out: *mut *mut StarflowReport,
) -> StarflowStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let config = lift(parse_config(str_arg(config_toml, "config_toml")?))?;
        let mode = match mode {
            StarflowMode::Full => Mode::Full,
            StarflowMode::Convergence => Mode::Convergence,
        };
        *out = Box::into_raw(Box::new(StarflowReport(run_experiment(&config, mode))));
        Ok(())
    })
}

/// # Safety
/// `report` must come from `starflow_experiment_run` (or be null) and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn starflow_report_free(report: *mut StarflowReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Process exit code of the report: 0 all pass, 1 a verdict failed, 2 runtime error; -1 for null.
///
/// # Safety
/// `report` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn starflow_report_exit_code(report: *const StarflowReport) -> i32 {
    report.as_ref().map_or(-1, |r| r.0.exit_code())
}

/// Writes the JSON report plus a nul terminator into `buf`. `needed` (optional) receives the
/// required size in bytes including the terminator, so a first call may pass a null buffer.
///
/// # Safety
/// `buf` must point to `capacity` writable bytes or be null with `capacity == 0`.
#[no_mangle]
pub unsafe extern "C" fn starflow_report_json(
    report: *const StarflowReport,
    buf: *mut c_char,
    capacity: usize,
    needed: *mut usize,
) -> StarflowStatus {
    guard(|| {
        let text = lift(report_json(&ref_arg(report, "report")?.0))?;
        let size = text.len() + 1;
        if let Some(n) = needed.as_mut() {
            *n = size;
        }
        if buf.is_null() || capacity < size {
            return Err(fail(
                StarflowStatus::BufferTooSmall,
                format!("need {size} bytes, got {capacity}"),
            ));
        }
        let dst = std::slice::from_raw_parts_mut(buf as *mut u8, size);
        dst[..text.len()].copy_from_slice(text.as_bytes());
        dst[text.len()] = 0;
        Ok(())
    })
}

/// Writes `diagnostics.csv`, `snapshots.csv` and `report.json` into `dir`.
///
/// # Safety
/// `report` must be a live handle and `dir` a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn starflow_report_write(
    report: *const StarflowReport,
    dir: *const c_char,
) -> StarflowStatus {
    guard(|| {
        let report = ref_arg(report, "report")?;
        let dir = str_arg(dir, "dir")?;
        lift(emit_outputs(&report.0, Path::new(dir)))?;
        Ok(())
    })
}

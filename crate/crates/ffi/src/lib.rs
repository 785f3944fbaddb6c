//! C ABI over the simulator core.
//!
//! Objects are exposed as opaque handles created by `*_new`/`*_load`
//! functions and released with the matching `*_free`. Every fallible call
//! returns an [`MmwStatus`]; on failure a message is available from
//! [`mmw_last_error`] on the same thread. Output pointers are written only
//! on success.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::io::BufReader;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use mmwsim::array::{array_gain_db, steering_vector, ArrayConfig};
use mmwsim::beamforming::{generate_codebook, Codebook};
use mmwsim::channel::{parse_trace, RayTraceSet};
use mmwsim::config::load_config;
use mmwsim::element::ElementPattern;
use mmwsim::engine::{self, SimulationOutput};
use mmwsim::geometry::{Direction, Orientation};
use mmwsim::metrics::{noise_power_dbm, LinkBudgetParams};
use mmwsim::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MmwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Parse = 4,
    Numerical = 5,
    Io = 6,
    Panic = 7,
}

pub struct MmwArray(ArrayConfig);
pub struct MmwCodebook(Codebook);
pub struct MmwTrace(RayTraceSet);
pub struct MmwRun(SimulationOutput);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> MmwStatus {
    match e {
        Error::InvalidParameter(_) => MmwStatus::InvalidArgument,
        Error::Config(_) => MmwStatus::Config,
        Error::Parse { .. } => MmwStatus::Parse,
        Error::Numerical(_) | Error::DegenerateChannel(_) => MmwStatus::Numerical,
        Error::Io(_) => MmwStatus::Io,
    }
}

fn guard<F: FnOnce() -> Result<(), (MmwStatus, String)>>(f: F) -> MmwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MmwStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(&msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            MmwStatus::Panic
        }
    }
}

fn lift<T>(r: mmwsim::Result<T>) -> Result<T, (MmwStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (MmwStatus, String) {
    (MmwStatus::NullPointer, format!("{what} is null"))
}

unsafe fn path_arg<'a>(p: *const c_char) -> Result<&'a Path, (MmwStatus, String)> {
    if p.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(Path::new)
        .map_err(|_| (MmwStatus::InvalidArgument, "path is not UTF-8".into()))
}

unsafe fn write_out<T>(out: *mut *mut T, v: T) -> Result<(), (MmwStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(v));
    Ok(())
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, (MmwStatus, String)> {
    p.as_ref().ok_or_else(|| null("handle"))
}

/// Message of the last failed call on this thread; empty if none. The
/// pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn mmw_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Thermal noise power in dBm.
#[no_mangle]
pub extern "C" fn mmw_noise_power_dbm(
    bandwidth_hz: f64,
    noise_figure_db: f64,
    noise_density_dbm_hz: f64,
) -> f64 {
    noise_power_dbm(&LinkBudgetParams {
        bandwidth_hz,
        noise_figure_db,
        noise_density_dbm_hz,
        ..LinkBudgetParams::default()
    })
}

// ---------------------------------------------------------------- arrays

/// Isotropic `rows x cols` array with the given spacings in wavelengths.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn mmw_array_new(
    rows: usize,
    cols: usize,
    spacing_v: f64,
    spacing_h: f64,
    out: *mut *mut MmwArray,
) -> MmwStatus {
    guard(|| {
        let a =
            lift(ArrayConfig::new(rows, cols).and_then(|a| a.with_spacing(spacing_v, spacing_h)))?;
        write_out(out, MmwArray(a))
    })
}

/// # Safety
/// `a` must be null or a handle from [`mmw_array_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mmw_array_free(a: *mut MmwArray) {
    if !a.is_null() {
        drop(Box::from_raw(a));
    }
}

/// Switches the element pattern to the 3GPP element.
///
/// # Safety
/// `a` must be a live array handle.
#[no_mangle]
pub unsafe extern "C" fn mmw_array_set_element_3gpp(a: *mut MmwArray) -> MmwStatus {
    guard(|| {
        let a = a.as_mut().ok_or_else(|| null("handle"))?;
        a.0.element = ElementPattern::three_gpp();
        Ok(())
    })
}

/// Switches the element pattern to a cosine element.
///
/// # Safety
/// `a` must be a live array handle.
#[no_mangle]
pub unsafe extern "C" fn mmw_array_set_element_cosine(
    a: *mut MmwArray,
    beamwidth_h_deg: f64,
    beamwidth_v_deg: f64,
) -> MmwStatus {
    guard(|| {
        let a = a.as_mut().ok_or_else(|| null("handle"))?;
        a.0.element = lift(ElementPattern::cosine(beamwidth_h_deg, beamwidth_v_deg))?;
        Ok(())
    })
}

/// # Safety
/// `a` must be a live array handle.
#[no_mangle]
pub unsafe extern "C" fn mmw_array_set_orientation(
    a: *mut MmwArray,
    bearing_deg: f64,
    downtilt_deg: f64,
) -> MmwStatus {
    guard(|| {
        let a = a.as_mut().ok_or_else(|| null("handle"))?;
        a.0.orientation = Orientation::new(bearing_deg, downtilt_deg);
        Ok(())
    })
}

/// Number of elements, or 0 for a null handle.
///
/// # Safety
/// `a` must be null or a live array handle.
#[no_mangle]
pub unsafe extern "C" fn mmw_array_num_elements(a: *const MmwArray) -> usize {
    a.as_ref().map_or(0, |a| a.0.num_elements())
}

/// Gain in dB toward `(eval_theta, eval_phi)` of the array steered to
/// `(steer_theta, steer_phi)`, both in the array-local frame.
///
/// # Safety
/// `a` must be a live array handle and `out_db` writable.
#[no_mangle]
pub unsafe extern "C" fn mmw_array_steered_gain_db(
    a: *const MmwArray,
    steer_theta_deg: f64,
    steer_phi_deg: f64,
    eval_theta_deg: f64,
    eval_phi_deg: f64,
    out_db: *mut f64,
) -> MmwStatus {
    guard(|| {
        let a = handle(a)?;
        let out = out_db.as_mut().ok_or_else(|| null("output pointer"))?;
        let w = steering_vector(&a.0, Direction::new(steer_theta_deg, steer_phi_deg));
        *out = array_gain_db(&a.0, &w, Direction::new(eval_theta_deg, eval_phi_deg));
        Ok(())
    })
}

// ------------------------------------------------------------- codebooks

/// # Safety
/// `a` must be a live array handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mmw_codebook_generate(
    a: *const MmwArray,
    out: *mut *mut MmwCodebook,
) -> MmwStatus {
    guard(|| {
        let a = handle(a)?;
        write_out(out, MmwCodebook(generate_codebook(&a.0)))
    })
}

/// # Safety
/// `cb` must be null or a live codebook handle.
#[no_mangle]
pub unsafe extern "C" fn mmw_codebook_free(cb: *mut MmwCodebook) {
    if !cb.is_null() {
        drop(Box::from_raw(cb));
    }
}

/// # Safety
/// `cb` must be null or a live codebook handle.
#[no_mangle]
pub unsafe extern "C" fn mmw_codebook_len(cb: *const MmwCodebook) -> usize {
    cb.as_ref().map_or(0, |c| c.0.len())
}

/// Copies codeword `index` into `re`/`im`, each of length `len`, which
/// must equal the number of array elements.
///
/// # Safety
/// `cb` must be a live codebook handle; `re` and `im` must point to `len`
/// writable doubles.
#[no_mangle]
pub unsafe extern "C" fn mmw_codebook_weights(
    cb: *const MmwCodebook,
    index: usize,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> MmwStatus {
    guard(|| {
        let cb = handle(cb)?;
        if re.is_null() || im.is_null() {
            return Err(null("output buffer"));
        }
        let w = cb.0.codewords.get(index).ok_or_else(|| {
            (
                MmwStatus::InvalidArgument,
                format!("codeword {index} out of range"),
            )
        })?;
        if w.len() != len {
            return Err((
                MmwStatus::InvalidArgument,
                format!("buffer length {len} does not match {} elements", w.len()),
            ));
        }
        let (re, im) = (
            std::slice::from_raw_parts_mut(re, len),
            std::slice::from_raw_parts_mut(im, len),
        );
        for (k, x) in w.weights().iter().enumerate() {
            re[k] = x.re;
            im[k] = x.im;
        }
        Ok(())
    })
}

// ---------------------------------------------------------------- traces

/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mmw_trace_load(path: *const c_char, out: *mut *mut MmwTrace) -> MmwStatus {
    guard(|| {
        let p = path_arg(path)?;
        let f = File::open(p).map_err(|e| (MmwStatus::Io, format!("{}: {e}", p.display())))?;
        let t = lift(parse_trace(BufReader::new(f)))?;
        write_out(out, MmwTrace(t))
    })
}

/// # Safety
/// `t` must be null or a live trace handle.
#[no_mangle]
pub unsafe extern "C" fn mmw_trace_free(t: *mut MmwTrace) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// # Safety
/// `t` must be null or a live trace handle.
#[no_mangle]
pub unsafe extern "C" fn mmw_trace_num_links(t: *const MmwTrace) -> usize {
    t.as_ref().map_or(0, |t| t.0.links.len())
}

/// # Safety
/// `t` must be null or a live trace handle.
#[no_mangle]
pub unsafe extern "C" fn mmw_trace_num_samples(t: *const MmwTrace) -> usize {
    t.as_ref().map_or(0, |t| t.0.n_samples)
}

// ------------------------------------------------------------------ runs

/// Loads a scenario file and runs it against its trace.
///
/// # Safety
/// `config_path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mmw_run_config(
    config_path: *const c_char,
    out: *mut *mut MmwRun,
) -> MmwStatus {
    guard(|| {
        let cfg = lift(load_config(path_arg(config_path)?))?;
        let f = File::open(&cfg.trace_path).map_err(|e| {
            (
                MmwStatus::Config,
                format!("cannot open trace {}: {e}", cfg.trace_path.display()),
            )
        })?;
        let trace = lift(parse_trace(BufReader::new(f)))?;
        let res = lift(engine::run(&cfg, &trace))?;
        write_out(out, MmwRun(res))
    })
}

/// # Safety
/// `r` must be null or a live run handle.
#[no_mangle]
pub unsafe extern "C" fn mmw_run_free(r: *mut MmwRun) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Number of associations (record series) in the run.
///
/// # Safety
/// `r` must be null or a live run handle.
#[no_mangle]
pub unsafe extern "C" fn mmw_run_num_series(r: *const MmwRun) -> usize {
    r.as_ref().map_or(0, |r| r.0.series.len())
}

/// Samples per series.
///
/// # Safety
/// `r` must be null or a live run handle.
#[no_mangle]
pub unsafe extern "C" fn mmw_run_num_samples(r: *const MmwRun) -> usize {
    r.as_ref().map_or(0, |r| r.0.metadata.n_samples)
}

/// Number of codebook search instants (0 for SVD runs).
///
/// # Safety
/// `r` must be null or a live run handle.
#[no_mangle]
pub unsafe extern "C" fn mmw_run_num_searches(r: *const MmwRun) -> usize {
    r.as_ref().map_or(0, |r| r.0.search_instants.len())
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MmwMetric {
    SnrDb = 0,
    SinrDb = 1,
    RxPowerDbm = 2,
    InterferenceDbm = 3,
    ThroughputBps = 4,
}

/// Copies one metric of series `series` into `buf` (length `len`, which
/// must equal the sample count). Zero power is `-INFINITY`.
///
/// # Safety
/// `r` must be a live run handle and `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn mmw_run_metric(
    r: *const MmwRun,
    series: usize,
    metric: MmwMetric,
    buf: *mut f64,
    len: usize,
) -> MmwStatus {
    guard(|| {
        let r = handle(r)?;
        if buf.is_null() {
            return Err(null("output buffer"));
        }
        let s = r.0.series.get(series).ok_or_else(|| {
            (
                MmwStatus::InvalidArgument,
                format!("series {series} out of range"),
            )
        })?;
        if s.records.len() != len {
            return Err((
                MmwStatus::InvalidArgument,
                format!(
                    "buffer length {len} does not match {} samples",
                    s.records.len()
                ),
            ));
        }
        let dst = std::slice::from_raw_parts_mut(buf, len);
        for (k, (rec, tp)) in s.records.iter().zip(&s.throughput_bps).enumerate() {
            dst[k] = match metric {
                MmwMetric::SnrDb => rec.snr_db,
                MmwMetric::SinrDb => rec.sinr_db,
                MmwMetric::RxPowerDbm => rec.rx_power_dbm,
                MmwMetric::InterferenceDbm => rec.interference_dbm,
                MmwMetric::ThroughputBps => *tp,
            };
        }
        Ok(())
    })
}

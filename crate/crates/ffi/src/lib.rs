//! C ABI over `nhtopo`.
//!
//! Every function returns an [`NhStatus`]; on failure the message is available
//! from [`nh_last_error`] on the same thread. Objects are opaque handles that
//! must be released with their `_free` function. Strings returned by the
//! library are released with [`nh_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use nhtopo::band::{Axis, Band};
use nhtopo::pipeline::output::scan_csv;
use nhtopo::pipeline::{run_scan, ScanOutput, ScenarioConfig};
use nhtopo::topology::{winding_report, KGrid};
use nhtopo::{eigensystem, Error, ModelParams};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NhStatus {
    Ok = 0,
    /// Null pointer, out-of-range index or malformed argument.
    InvalidArgument = 1,
    Config = 2,
    /// Exceptional point, positivity loss, failed fit and similar.
    Numerical = 3,
    Io = 4,
    Panic = 5,
}

/// Model parameters.
pub struct NhModel {
    params: ModelParams,
}

/// Result of a k-sweep.
pub struct NhScan {
    output: ScanOutput,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NhComplex {
    pub re: f64,
    pub im: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NhField {
    pub hx: NhComplex,
    pub hy: NhComplex,
    pub hz: NhComplex,
}

/// `w_plus`/`w_minus` are NaN when the bands exchange around the loop.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NhWindings {
    pub w_plus: f64,
    pub w_minus: f64,
    pub w_t: i64,
    pub w_t_raw: f64,
    pub nu_e: i64,
    pub nu_e_raw: f64,
    /// 1 when both residuals are within the rounding tolerance.
    pub quantized: i32,
}

/// Failed rows have NaN values and `ok == 0`.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NhScanRow {
    pub k: f64,
    pub phi_pp: f64,
    pub phi_mm: f64,
    pub re_phi: f64,
    pub re_e: f64,
    pub im_e: f64,
    pub ok: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> NhStatus {
    match e {
        Error::Config(_) => NhStatus::Config,
        Error::Io(_) => NhStatus::Io,
        e if e.is_numerical() => NhStatus::Numerical,
        _ => NhStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (NhStatus, String)>) -> NhStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            NhStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            NhStatus::Panic
        }
    }
}

fn lib<T>(r: nhtopo::Result<T>) -> Result<T, (NhStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (NhStatus, String) {
    (NhStatus::InvalidArgument, format!("null pointer: {what}"))
}

fn cplx(z: nhtopo::linalg::C64) -> NhComplex {
    NhComplex { re: z.re, im: z.im }
}

/// Message of the last failure on this thread; empty after a success.
/// Valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn nh_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn nh_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn nh_model_new(j0: f64, j1: f64, j2: f64, delta: f64, hz: f64, out: *mut *mut NhModel) -> NhStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let params = lib(ModelParams::new(j0, j1, j2, delta, hz))?;
        *out = Box::into_raw(Box::new(NhModel { params }));
        Ok(())
    })
}

/// # Safety
/// `model` must come from [`nh_model_new`] and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn nh_model_free(model: *mut NhModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nh_model_field(model: *const NhModel, k: f64, out: *mut NhField) -> NhStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let h = m.params.field(k);
        *out = NhField { hx: cplx(h.hx), hy: cplx(h.hy), hz: cplx(h.hz) };
        Ok(())
    })
}

/// Upper-band energy `E₊` (`E₋ = −E₊`).
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nh_model_energy(model: *const NhModel, k: f64, out: *mut NhComplex) -> NhStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let es = lib(eigensystem(&m.params.field(k)))?;
        *out = cplx(es.energy(Band::Plus));
        Ok(())
    })
}

/// Eigenstate textures `[+x, +y, +z, −x, −y, −z]` written to `out[0..6]`.
///
/// # Safety
/// `model` must be a live handle and `out` must point to 6 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn nh_model_textures(model: *const NhModel, k: f64, out: *mut f64) -> NhStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let es = lib(eigensystem(&m.params.field(k)))?;
        let out = std::slice::from_raw_parts_mut(out, 6);
        for (i, band) in Band::BOTH.into_iter().enumerate() {
            for (j, axis) in [Axis::X, Axis::Y, Axis::Z].into_iter().enumerate() {
                out[3 * i + j] = es.texture(band, axis);
            }
        }
        Ok(())
    })
}

/// Invariants on a uniform grid of `grid` points (0 selects the default).
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nh_model_windings(model: *const NhModel, grid: usize, out: *mut NhWindings) -> NhStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let n = if grid == 0 { nhtopo::topology::DEFAULT_GRID } else { grid };
        let r = lib(KGrid::new(n).and_then(|g| winding_report(&m.params, &g)))?;
        *out = NhWindings {
            w_plus: r.w_plus.unwrap_or(f64::NAN),
            w_minus: r.w_minus.unwrap_or(f64::NAN),
            w_t: r.w_t.value,
            w_t_raw: r.w_t.raw,
            nu_e: r.nu_e.value,
            nu_e_raw: r.nu_e.raw,
            quantized: (r.w_t.rounded && r.nu_e.rounded) as i32,
        };
        Ok(())
    })
}

/// Run a scan from a JSON scenario; null or `"{}"` selects the defaults.
///
/// # Safety
/// `config_json` must be null or a NUL-terminated string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nh_scan_run(config_json: *const c_char, out: *mut *mut NhScan) -> NhStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = if config_json.is_null() {
            ScenarioConfig::default()
        } else {
            let text = CStr::from_ptr(config_json)
                .to_str()
                .map_err(|e| (NhStatus::Config, format!("config is not UTF-8: {e}")))?;
            lib(ScenarioConfig::from_json(text))?
        };
        let output = lib(run_scan(&cfg))?;
        *out = Box::into_raw(Box::new(NhScan { output }));
        Ok(())
    })
}

/// # Safety
/// `scan` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nh_scan_len(scan: *const NhScan) -> usize {
    scan.as_ref().map_or(0, |s| s.output.rows.len())
}

/// # Safety
/// `scan` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nh_scan_row(scan: *const NhScan, index: usize, out: *mut NhScanRow) -> NhStatus {
    guard(|| {
        let s = scan.as_ref().ok_or_else(|| null("scan"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let r = s
            .output
            .rows
            .get(index)
            .ok_or_else(|| (NhStatus::InvalidArgument, format!("row {index} out of range")))?;
        *out = NhScanRow {
            k: r.k,
            phi_pp: r.phi_pp,
            phi_mm: r.phi_mm,
            re_phi: r.re_phi,
            re_e: r.re_e,
            im_e: r.im_e,
            ok: r.is_ok() as i32,
        };
        Ok(())
    })
}

/// `w_t` and `ν_E` from the scanned series; `Numerical` when either is unavailable.
///
/// # Safety
/// `scan` must be a live handle; `w_t` and `nu_e` writable.
#[no_mangle]
pub unsafe extern "C" fn nh_scan_winding(scan: *const NhScan, w_t: *mut i64, nu_e: *mut i64) -> NhStatus {
    guard(|| {
        let s = scan.as_ref().ok_or_else(|| null("scan"))?;
        let (w_out, n_out) = (w_t.as_mut().ok_or_else(|| null("w_t"))?, nu_e.as_mut().ok_or_else(|| null("nu_e"))?);
        let sum = &s.output.summary;
        let unavailable = |inv: &nhtopo::pipeline::scan::Invariant| {
            (NhStatus::Numerical, inv.error.clone().unwrap_or_else(|| "invariant unavailable".into()))
        };
        *w_out = sum.w_t.value.ok_or_else(|| unavailable(&sum.w_t))?;
        *n_out = sum.nu_e.value.ok_or_else(|| unavailable(&sum.nu_e))?;
        Ok(())
    })
}

/// Scan CSV text; release with [`nh_string_free`].
///
/// # Safety
/// `scan` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nh_scan_csv(scan: *const NhScan, out: *mut *mut c_char) -> NhStatus {
    guard(|| {
        let s = scan.as_ref().ok_or_else(|| null("scan"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let text = lib(scan_csv(&s.output.rows))?;
        *out = CString::new(text).map_err(|e| (NhStatus::Io, e.to_string()))?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `scan` must come from [`nh_scan_run`] and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn nh_scan_free(scan: *mut NhScan) {
    if !scan.is_null() {
        drop(Box::from_raw(scan));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn nh_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

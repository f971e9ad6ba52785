// SPDX-License-Identifier: MIT OR Apache-2.0

//! C ABI over `bocpd-core`.
//!
//! Detectors are opaque heap handles created by [`cpd_detector_new`] and
//! released with [`cpd_detector_free`]. Every fallible call returns a
//! [`CpdStatus`]; outputs are written through caller-provided pointers.
//! Buffer-filling calls report the required length through `out_len` and
//! return `CPD_STATUS_BUFFER_TOO_SMALL` when `cap` is insufficient, so callers
//! can size a buffer with a first call passing `cap = 0`.
//!
//! The C header `include/bocpd.h` is generated by cbindgen at build time.

use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use bocpd_core::detector::{Algorithm, Detector};
use bocpd_core::nig::{log_pdf_student_t, StudentTSpec};
use bocpd_core::CpdError;

/// Original BOCPD: decisions never feed back into inference.
pub const CPD_ALGORITHM_BOCPD: u32 = 0;
/// BOCPD with baseline re-initialization after every change point.
pub const CPD_ALGORITHM_BOCPD_BLS: u32 = 1;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CpdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NonFinite = 3,
    BufferTooSmall = 4,
    UnknownDataset = 5,
    Panic = 6,
}

impl From<&CpdError> for CpdStatus {
    fn from(e: &CpdError) -> Self {
        match e {
            CpdError::NonFinite { .. } => CpdStatus::NonFinite,
            CpdError::UnknownDataset(_) => CpdStatus::UnknownDataset,
            _ => CpdStatus::InvalidArgument,
        }
    }
}

/// Opaque detector handle.
pub struct CpdDetector {
    inner: Detector,
}

/// One observation's outcome.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CpdStep {
    /// 1-based time index.
    pub t: u64,
    pub x: f64,
    /// Observation minus the partition baseline (equals `x` for BOCPD).
    pub x_prime: f64,
    pub delta: i64,
    /// 1 when a change point was declared at `t`.
    pub change_point: u8,
    pub argmax_run_length: u64,
    pub partition: u64,
    /// Entries in the run-length posterior after this step.
    pub support_len: u64,
}

fn algorithm(code: u32) -> Option<Algorithm> {
    match code {
        CPD_ALGORITHM_BOCPD => Some(Algorithm::Bocpd),
        CPD_ALGORITHM_BOCPD_BLS => Some(Algorithm::BocpdBls),
        _ => None,
    }
}

fn guard(f: impl FnOnce() -> CpdStatus) -> CpdStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(CpdStatus::Panic)
}

/// Copies `src` into `dst[..cap]`, always reporting `src.len()` in `out_len`.
unsafe fn fill<T: Copy>(src: &[T], dst: *mut T, cap: usize, out_len: *mut usize) -> CpdStatus {
    *out_len = src.len();
    if src.len() > cap {
        return CpdStatus::BufferTooSmall;
    }
    if !src.is_empty() {
        if dst.is_null() {
            return CpdStatus::NullPointer;
        }
        std::ptr::copy_nonoverlapping(src.as_ptr(), dst, src.len());
    }
    CpdStatus::Ok
}

/// Creates a detector with the default prior centred at `prior_loc`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn cpd_detector_new(
    algorithm_code: u32,
    lambda: f64,
    prior_loc: f64,
    out: *mut *mut CpdDetector,
) -> CpdStatus {
    guard(|| {
        if out.is_null() {
            return CpdStatus::NullPointer;
        }
        let Some(alg) = algorithm(algorithm_code) else {
            return CpdStatus::InvalidArgument;
        };
        match Detector::new(alg, lambda, prior_loc) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(CpdDetector { inner }));
                CpdStatus::Ok
            }
            Err(e) => CpdStatus::from(&e),
        }
    })
}

/// Releases a detector. Null is ignored.
///
/// # Safety
/// `detector` must come from [`cpd_detector_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cpd_detector_free(detector: *mut CpdDetector) {
    if !detector.is_null() {
        drop(Box::from_raw(detector));
    }
}

/// Feeds one observation. A non-finite `x` returns `CPD_STATUS_NON_FINITE`
/// and leaves the detector unchanged.
///
/// # Safety
/// `detector` must be a live handle; `out` may be null when the step is not
/// needed.
#[no_mangle]
pub unsafe extern "C" fn cpd_detector_observe(
    detector: *mut CpdDetector,
    x: f64,
    out: *mut CpdStep,
) -> CpdStatus {
    guard(|| {
        let Some(det) = detector.as_mut() else {
            return CpdStatus::NullPointer;
        };
        match det.inner.observe(x) {
            Ok(s) => {
                if !out.is_null() {
                    *out = CpdStep {
                        t: s.t as u64,
                        x: s.x,
                        x_prime: s.x_prime,
                        delta: s.delta,
                        change_point: s.change_point as u8,
                        argmax_run_length: s.argmax_run_length as u64,
                        partition: s.partition as u64,
                        support_len: s.posterior_snapshot.len() as u64,
                    };
                }
                CpdStatus::Ok
            }
            Err(e) => CpdStatus::from(&e),
        }
    })
}

/// Copies the current run-length log-posterior (`ln P(r)`, `r = 0..len`).
///
/// # Safety
/// `detector` must be a live handle, `out_len` writable, and `buf` valid for
/// `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn cpd_detector_posterior(
    detector: *const CpdDetector,
    buf: *mut f64,
    cap: usize,
    out_len: *mut usize,
) -> CpdStatus {
    guard(|| {
        let Some(det) = detector.as_ref() else {
            return CpdStatus::NullPointer;
        };
        if out_len.is_null() {
            return CpdStatus::NullPointer;
        }
        fill(&det.inner.posterior().log_probs, buf, cap, out_len)
    })
}

/// Runs a fresh detector over `values[..len]` and writes the 1-based change
/// point indices.
///
/// # Safety
/// `values` must be valid for `len` doubles, `out_indices` for `cap` entries,
/// and `out_count` writable.
#[no_mangle]
pub unsafe extern "C" fn cpd_detect_series(
    algorithm_code: u32,
    lambda: f64,
    values: *const f64,
    len: usize,
    out_indices: *mut u64,
    cap: usize,
    out_count: *mut usize,
) -> CpdStatus {
    guard(|| {
        if values.is_null() || out_count.is_null() {
            return CpdStatus::NullPointer;
        }
        let Some(alg) = algorithm(algorithm_code) else {
            return CpdStatus::InvalidArgument;
        };
        let series = slice::from_raw_parts(values, len);
        match bocpd_core::detect_series(alg, lambda, series) {
            Ok(d) => {
                let cps: Vec<u64> = d.change_points.iter().map(|&t| t as u64).collect();
                fill(&cps, out_indices, cap, out_count)
            }
            Err(e) => CpdStatus::from(&e),
        }
    })
}

/// Draws synthetic dataset `dataset` (1..=6) with `seed`.
///
/// # Safety
/// `out_values` must be valid for `cap` doubles and `out_len` writable.
#[no_mangle]
pub unsafe extern "C" fn cpd_generate(
    dataset: u32,
    seed: u64,
    out_values: *mut f64,
    cap: usize,
    out_len: *mut usize,
) -> CpdStatus {
    guard(|| {
        if out_len.is_null() {
            return CpdStatus::NullPointer;
        }
        match bocpd_core::generate(dataset, seed) {
            Ok(s) => fill(&s.values, out_values, cap, out_len),
            Err(e) => CpdStatus::from(&e),
        }
    })
}

/// Natural-log density of the location-scale Student-t.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cpd_log_pdf_student_t(
    x: f64,
    df: f64,
    loc: f64,
    scale_sq: f64,
    out: *mut f64,
) -> CpdStatus {
    if out.is_null() {
        return CpdStatus::NullPointer;
    }
    if !(x.is_finite() && loc.is_finite()) {
        return CpdStatus::NonFinite;
    }
    if !(df > 0.0 && scale_sq > 0.0 && df.is_finite() && scale_sq.is_finite()) {
        return CpdStatus::InvalidArgument;
    }
    *out = log_pdf_student_t(x, &StudentTSpec { df, loc, scale_sq });
    CpdStatus::Ok
}

/// Static, NUL-terminated description of a status code (any integer is
/// accepted).
#[no_mangle]
pub extern "C" fn cpd_status_message(status: i32) -> *const c_char {
    let msg: &'static [u8] = match status {
        0 => b"ok\0",
        1 => b"null pointer argument\0",
        2 => b"invalid argument\0",
        3 => b"non-finite value\0",
        4 => b"buffer too small\0",
        5 => b"dataset id must be in 1..=6\0",
        6 => b"internal panic\0",
        _ => b"unknown status\0",
    };
    msg.as_ptr().cast()
}

/// Library version, NUL-terminated.
#[no_mangle]
pub extern "C" fn cpd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

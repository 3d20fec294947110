//! C ABI over the scenario generator and the detectors.
//!
//! Objects are opaque handles created by `*_new` and released by `*_free`.
//! Every fallible call returns an [`RfmStatus`]; on failure a message is
//! kept per thread and can be read with [`rfm_last_error_message`].
//! Complex vectors cross the boundary as separate real and imaginary
//! `double` arrays. Secondary data is row-major, one length-N row per
//! sample.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::sync::Arc;

use rfm_radar::detectors::{mf_threshold_analytic, nmf_threshold_analytic, DetectorError, TylerOptions};
use rfm_radar::drfm::{DrfmDetector, IntegrationConfig, Threshold, ThresholdSource};
use rfm_radar::flow::load_checkpoint;
use rfm_radar::harness::{DetectorHandle, DetectorKind, HarnessError, Trial};
use rfm_radar::linalg::{ComplexVector, LinalgError};
use rfm_radar::scenario::{ClutterKind, Hypothesis, Scenario, ScenarioConfig, ScenarioError};
use rfm_radar::streams::{stream, Purpose, StreamRng};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RfmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    NotConverged = 4,
    Singular = 5,
    Uncalibrated = 6,
    Io = 7,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RfmDetectorKind {
    Mf = 0,
    Nmf = 1,
    AmfScm = 2,
    AnmfScm = 3,
    AnmfFp = 4,
}

impl From<RfmDetectorKind> for DetectorKind {
    fn from(k: RfmDetectorKind) -> Self {
        match k {
            RfmDetectorKind::Mf => DetectorKind::Mf,
            RfmDetectorKind::Nmf => DetectorKind::Nmf,
            RfmDetectorKind::AmfScm => DetectorKind::AmfScm,
            RfmDetectorKind::AnmfScm => DetectorKind::AnmfScm,
            RfmDetectorKind::AnmfFp => DetectorKind::AnmfFp,
        }
    }
}

/// Scenario plus the random stream its samples are drawn from.
pub struct RfmScenario {
    scenario: Scenario,
    rng: StreamRng,
}

/// One detector matched to a Doppler bin, with an optional threshold.
pub struct RfmDetector {
    handle: DetectorHandle,
    n: usize,
}

struct FfiError {
    status: RfmStatus,
    message: String,
}

impl FfiError {
    fn new(status: RfmStatus, message: impl Into<String>) -> Self {
        Self { status, message: message.into() }
    }
}

fn linalg_status(e: &LinalgError) -> RfmStatus {
    match e {
        LinalgError::DimensionMismatch { .. } => RfmStatus::DimensionMismatch,
        LinalgError::NonPositiveDefinite { .. } => RfmStatus::Singular,
        _ => RfmStatus::InvalidArgument,
    }
}

fn detector_status(e: &DetectorError) -> RfmStatus {
    match e {
        DetectorError::Linalg(l) => linalg_status(l),
        DetectorError::NotConverged { .. } => RfmStatus::NotConverged,
        DetectorError::InsufficientSecondaryData { .. } => RfmStatus::DimensionMismatch,
        _ => RfmStatus::InvalidArgument,
    }
}

impl From<HarnessError> for FfiError {
    fn from(e: HarnessError) -> Self {
        let status = match &e {
            HarnessError::Detector { source, .. } => detector_status(source),
            HarnessError::Uncalibrated(_) => RfmStatus::Uncalibrated,
            HarnessError::Io { .. } => RfmStatus::Io,
            _ => RfmStatus::InvalidArgument,
        };
        Self::new(status, e.to_string())
    }
}

impl From<ScenarioError> for FfiError {
    fn from(e: ScenarioError) -> Self {
        Self::new(RfmStatus::InvalidArgument, e.to_string())
    }
}

impl From<DetectorError> for FfiError {
    fn from(e: DetectorError) -> Self {
        Self::new(detector_status(&e), e.to_string())
    }
}

impl From<LinalgError> for FfiError {
    fn from(e: LinalgError) -> Self {
        Self::new(linalg_status(&e), e.to_string())
    }
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_last_error(message: String) {
    LAST_ERROR.with(|m| *m.borrow_mut() = message);
}

/// Runs `f`, records any error or panic, and maps it to a status.
fn guard(f: impl FnOnce() -> Result<(), FfiError>) -> RfmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error(String::new());
            RfmStatus::Ok
        }
        Ok(Err(e)) => {
            set_last_error(e.message);
            e.status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("internal panic: {msg}"));
            RfmStatus::Panic
        }
    }
}

fn null(what: &str) -> FfiError {
    FfiError::new(RfmStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_vector(re: *const f64, im: *const f64, n: usize) -> Result<ComplexVector, FfiError> {
    if re.is_null() || im.is_null() {
        return Err(null("vector buffer"));
    }
    let re = std::slice::from_raw_parts(re, n);
    let im = std::slice::from_raw_parts(im, n);
    Ok(ComplexVector::from_parts(re, im)?)
}

unsafe fn write_vector(v: &ComplexVector, re: *mut f64, im: *mut f64) {
    for (i, c) in v.iter().enumerate() {
        *re.add(i) = c.re;
        *im.add(i) = c.im;
    }
}

/// Length in bytes of the last error message on this thread, excluding
/// the terminating NUL. Zero after a successful call.
#[no_mangle]
pub extern "C" fn rfm_last_error_length() -> usize {
    LAST_ERROR.with(|m| m.borrow().len())
}

/// Copies the last error message into `buf` as a NUL-terminated string,
/// truncating to `len - 1` bytes. Returns the number of bytes written
/// without the NUL, or -1 if `buf` is null or `len` is zero.
///
/// # Safety
/// `buf` must point to at least `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn rfm_last_error_message(buf: *mut c_char, len: usize) -> isize {
    if buf.is_null() || len == 0 {
        return -1;
    }
    LAST_ERROR.with(|m| {
        let m = m.borrow();
        let n = m.len().min(len - 1);
        std::ptr::copy_nonoverlapping(m.as_ptr(), buf.cast::<u8>(), n);
        *buf.add(n) = 0;
        n as isize
    })
}

/// Creates a scenario with `n_pulses` pulses and correlation `rho`.
/// `mu > 0` selects compound-Gaussian clutter with texture shape `mu`;
/// `mu <= 0` selects homogeneous Gaussian clutter.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn rfm_scenario_new(n_pulses: usize, rho: f64, mu: f64, seed: u64, out: *mut *mut RfmScenario) -> RfmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let clutter = if mu > 0.0 { ClutterKind::CompoundGaussian { mu } } else { ClutterKind::GaussianHomogeneous };
        let cfg = ScenarioConfig { n_pulses, rho, clutter, seed, ..ScenarioConfig::default() };
        let scenario = Scenario::new(cfg)?;
        let rng = stream(seed, Purpose::Misc, &[]);
        *out = Box::into_raw(Box::new(RfmScenario { scenario, rng }));
        Ok(())
    })
}

/// Releases a scenario. Null is ignored.
///
/// # Safety
/// `s` must be null or a handle from [`rfm_scenario_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rfm_scenario_free(s: *mut RfmScenario) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Number of pulses N, or 0 for a null handle.
///
/// # Safety
/// `s` must be null or a live scenario handle.
#[no_mangle]
pub unsafe extern "C" fn rfm_scenario_n_pulses(s: *const RfmScenario) -> usize {
    s.as_ref().map_or(0, |s| s.scenario.n_pulses())
}

/// Writes the N x N interference covariance, row-major, into `re`/`im`
/// (`len` must be N*N).
///
/// # Safety
/// `s` must be a live scenario; `re` and `im` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn rfm_scenario_covariance(s: *const RfmScenario, re: *mut f64, im: *mut f64, len: usize) -> RfmStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("scenario"))?;
        if re.is_null() || im.is_null() {
            return Err(null("output buffer"));
        }
        let n = s.scenario.n_pulses();
        if len != n * n {
            return Err(FfiError::new(RfmStatus::DimensionMismatch, format!("expected {} entries, got {len}", n * n)));
        }
        let cov = s.scenario.total_covariance();
        for i in 0..n {
            for j in 0..n {
                let c = cov.get(i, j);
                *re.add(i * n + j) = c.re;
                *im.add(i * n + j) = c.im;
            }
        }
        Ok(())
    })
}

/// Draws one observation of length `n` from the scenario's stream. With
/// `h1` false, `snr_db` and `doppler_bin` are ignored.
///
/// # Safety
/// `s` must be a live scenario; `re` and `im` must hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn rfm_scenario_sample(
    s: *mut RfmScenario,
    h1: bool,
    snr_db: f64,
    doppler_bin: f64,
    re: *mut f64,
    im: *mut f64,
    n: usize,
) -> RfmStatus {
    guard(|| {
        let s = s.as_mut().ok_or_else(|| null("scenario"))?;
        if re.is_null() || im.is_null() {
            return Err(null("output buffer"));
        }
        let expected = s.scenario.n_pulses();
        if n != expected {
            return Err(FfiError::new(RfmStatus::DimensionMismatch, format!("expected length {expected}, got {n}")));
        }
        let hyp = if h1 { Hypothesis::H1 } else { Hypothesis::H0 };
        let obs = s.scenario.sample_observation(hyp, snr_db, doppler_bin, &mut s.rng)?;
        write_vector(&obs.y, re, im);
        Ok(())
    })
}

/// Draws `k` target-free samples into row-major `re`/`im` of `k*N`
/// doubles each.
///
/// # Safety
/// `s` must be a live scenario; `re` and `im` must hold `k*N` doubles.
#[no_mangle]
pub unsafe extern "C" fn rfm_scenario_sample_secondary(s: *mut RfmScenario, k: usize, re: *mut f64, im: *mut f64) -> RfmStatus {
    guard(|| {
        let s = s.as_mut().ok_or_else(|| null("scenario"))?;
        if re.is_null() || im.is_null() {
            return Err(null("output buffer"));
        }
        let n = s.scenario.n_pulses();
        let data = s.scenario.sample_secondary(k, &mut s.rng)?;
        for (row, z) in data.z.iter().enumerate() {
            write_vector(z, re.add(row * n), im.add(row * n));
        }
        Ok(())
    })
}

/// Creates a classical detector matched to `doppler_bin`. MF and NMF use
/// the scenario's true covariance; the adaptive ones need secondary data
/// at each call.
///
/// # Safety
/// `s` must be a live scenario; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rfm_detector_new(s: *const RfmScenario, kind: RfmDetectorKind, doppler_bin: f64, out: *mut *mut RfmDetector) -> RfmStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("scenario"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let handle = DetectorHandle::classical(kind.into(), &s.scenario, doppler_bin, TylerOptions::default())?;
        *out = Box::into_raw(Box::new(RfmDetector { handle, n: s.scenario.n_pulses() }));
        Ok(())
    })
}

/// Loads a D-RFM detector from a checkpoint. A threshold stored in the
/// checkpoint is adopted. `steps` is the Euler step count; 0 uses the
/// count the stored threshold was calibrated with, or the default.
///
/// # Safety
/// `s` must be a live scenario, `path` a NUL-terminated string, `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn rfm_detector_load_drfm(s: *const RfmScenario, path: *const c_char, steps: usize, out: *mut *mut RfmDetector) -> RfmStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("scenario"))?;
        if path.is_null() {
            return Err(null("path"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let path = CStr::from_ptr(path).to_str().map_err(|_| FfiError::new(RfmStatus::InvalidArgument, "path is not UTF-8"))?;
        let ck = load_checkpoint(Path::new(path)).map_err(|e| FfiError::new(RfmStatus::Io, e.to_string()))?;
        let n = s.scenario.n_pulses();
        if ck.header.architecture.data_dim() != 2 * n {
            return Err(FfiError::new(
                RfmStatus::DimensionMismatch,
                format!("checkpoint dimension {} does not match 2N = {}", ck.header.architecture.data_dim(), 2 * n),
            ));
        }
        let record = ck.header.threshold.clone();
        let steps = match (steps, &record) {
            (0, Some(r)) => r.integration_steps,
            (0, None) => IntegrationConfig::default().steps,
            (k, _) => k,
        };
        let mut det = DrfmDetector::new(ck.params, IntegrationConfig { steps });
        det.threshold = record.filter(|r| r.integration_steps == steps).map(|r| Threshold::from_record(&r));
        let handle = DetectorHandle::drfm(Arc::new(det), &s.scenario, 0.0);
        *out = Box::into_raw(Box::new(RfmDetector { handle, n }));
        Ok(())
    })
}

/// Releases a detector. Null is ignored.
///
/// # Safety
/// `d` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rfm_detector_free(d: *mut RfmDetector) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Computes the statistic for `y` (length `n`). Adaptive detectors read
/// `k` secondary rows from `sec_re`/`sec_im`; others ignore them and
/// accept null.
///
/// # Safety
/// `d` must be a live detector; `y_re`/`y_im` must hold `n` doubles,
/// `sec_re`/`sec_im` `k*n` doubles when non-null; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rfm_detector_statistic(
    d: *const RfmDetector,
    y_re: *const f64,
    y_im: *const f64,
    n: usize,
    sec_re: *const f64,
    sec_im: *const f64,
    k: usize,
    out: *mut f64,
) -> RfmStatus {
    guard(|| {
        let d = d.as_ref().ok_or_else(|| null("detector"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        if n != d.n {
            return Err(FfiError::new(RfmStatus::DimensionMismatch, format!("expected length {}, got {n}", d.n)));
        }
        let y = read_vector(y_re, y_im, n)?;
        let secondary = if d.handle.kind().needs_secondary() {
            let z = (0..k).map(|row| read_vector(sec_re.wrapping_add(row * n), sec_im.wrapping_add(row * n), n)).collect::<Result<Vec<_>, _>>()?;
            Some(Arc::new(z))
        } else {
            None
        };
        *out = d.handle.statistic(&Trial { y, secondary })?;
        Ok(())
    })
}

/// Sets the threshold λ; a statistic above λ decides H1.
///
/// # Safety
/// `d` must be a live detector.
#[no_mangle]
pub unsafe extern "C" fn rfm_detector_set_threshold(d: *mut RfmDetector, lambda: f64, pfa_target: f64) -> RfmStatus {
    guard(|| {
        let d = d.as_mut().ok_or_else(|| null("detector"))?;
        if !lambda.is_finite() {
            return Err(FfiError::new(RfmStatus::InvalidArgument, "threshold must be finite"));
        }
        d.handle.set_threshold(Threshold { lambda, pfa_target, calibration_size: 0, source: ThresholdSource::Analytic });
        Ok(())
    })
}

/// Reads the current threshold, or returns `RFM_STATUS_UNCALIBRATED`.
///
/// # Safety
/// `d` must be a live detector; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rfm_detector_threshold(d: *const RfmDetector, out: *mut f64) -> RfmStatus {
    guard(|| {
        let d = d.as_ref().ok_or_else(|| null("detector"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let t = d.handle.threshold().ok_or(HarnessError::Uncalibrated(d.handle.kind()))?;
        *out = t.lambda;
        Ok(())
    })
}

/// Writes `true` to `h1` iff `statistic` exceeds the threshold.
///
/// # Safety
/// `d` must be a live detector; `h1` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rfm_detector_decide(d: *const RfmDetector, statistic: f64, h1: *mut bool) -> RfmStatus {
    guard(|| {
        let d = d.as_ref().ok_or_else(|| null("detector"))?;
        if h1.is_null() {
            return Err(null("h1"));
        }
        *h1 = d.handle.decide(statistic)? == Hypothesis::H1;
        Ok(())
    })
}

/// Closed-form MF threshold for a target false-alarm probability.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rfm_threshold_mf(pfa: f64, out: *mut f64) -> RfmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = mf_threshold_analytic(pfa)?;
        Ok(())
    })
}

/// Closed-form NMF threshold for `n` pulses.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rfm_threshold_nmf(pfa: f64, n: usize, out: *mut f64) -> RfmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = nmf_threshold_analytic(pfa, n)?;
        Ok(())
    })
}

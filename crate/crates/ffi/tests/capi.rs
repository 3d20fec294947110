use std::ffi::{c_char, CString};
use std::ptr;

use rfm_radar::detectors::{anmf_fp, mf_statistic, nmf_statistic};
use rfm_radar::linalg::ComplexVector;
use rfm_radar::scenario::{Scenario, ScenarioConfig};
use rfm_radar_ffi::*;

struct Owned(*mut RfmScenario);

impl Drop for Owned {
    fn drop(&mut self) {
        unsafe { rfm_scenario_free(self.0) }
    }
}

fn scenario(mu: f64) -> Owned {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { rfm_scenario_new(16, 0.5, mu, 7, &mut s) }, RfmStatus::Ok);
    assert!(!s.is_null());
    Owned(s)
}

fn detector(s: &Owned, kind: RfmDetectorKind, d: f64) -> *mut RfmDetector {
    let mut det = ptr::null_mut();
    assert_eq!(unsafe { rfm_detector_new(s.0, kind, d, &mut det) }, RfmStatus::Ok);
    det
}

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    let n = unsafe { rfm_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert!(n >= 0);
    let bytes: Vec<u8> = buf[..n as usize].iter().map(|&c| c as u8).collect();
    String::from_utf8(bytes).unwrap()
}

fn sample(s: &Owned, h1: bool) -> (Vec<f64>, Vec<f64>) {
    let (mut re, mut im) = (vec![0.0; 16], vec![0.0; 16]);
    assert_eq!(unsafe { rfm_scenario_sample(s.0, h1, 10.0, 2.0, re.as_mut_ptr(), im.as_mut_ptr(), 16) }, RfmStatus::Ok);
    (re, im)
}

fn secondary(s: &Owned, k: usize) -> (Vec<f64>, Vec<f64>) {
    let (mut re, mut im) = (vec![0.0; k * 16], vec![0.0; k * 16]);
    assert_eq!(unsafe { rfm_scenario_sample_secondary(s.0, k, re.as_mut_ptr(), im.as_mut_ptr()) }, RfmStatus::Ok);
    (re, im)
}

#[test]
fn statistics_match_the_rust_api() {
    let s = scenario(0.0);
    let reference = Scenario::new(ScenarioConfig { seed: 7, ..ScenarioConfig::default() }).unwrap();
    let (yr, yi) = sample(&s, true);
    let y = ComplexVector::from_parts(&yr, &yi).unwrap();
    let p = reference.steering(2.0);
    let sigma = reference.total_covariance();

    let mut stat = 0.0;
    let mf = detector(&s, RfmDetectorKind::Mf, 2.0);
    let nmf = detector(&s, RfmDetectorKind::Nmf, 2.0);
    unsafe {
        assert_eq!(rfm_detector_statistic(mf, yr.as_ptr(), yi.as_ptr(), 16, ptr::null(), ptr::null(), 0, &mut stat), RfmStatus::Ok);
        assert!((stat - mf_statistic(&y, &p, sigma).unwrap()).abs() < 1e-9 * stat.max(1.0));
        assert_eq!(rfm_detector_statistic(nmf, yr.as_ptr(), yi.as_ptr(), 16, ptr::null(), ptr::null(), 0, &mut stat), RfmStatus::Ok);
        assert!((stat - nmf_statistic(&y, &p, sigma).unwrap()).abs() < 1e-12);
        rfm_detector_free(mf);
        rfm_detector_free(nmf);
    }

    let (zr, zi) = secondary(&s, 32);
    let z: Vec<ComplexVector> = (0..32).map(|r| ComplexVector::from_parts(&zr[r * 16..][..16], &zi[r * 16..][..16]).unwrap()).collect();
    let fp = detector(&s, RfmDetectorKind::AnmfFp, 2.0);
    unsafe {
        assert_eq!(rfm_detector_statistic(fp, yr.as_ptr(), yi.as_ptr(), 16, zr.as_ptr(), zi.as_ptr(), 32, &mut stat), RfmStatus::Ok);
        assert!((stat - anmf_fp(&y, &p, &z).unwrap()).abs() < 1e-12);
        assert!((0.0..=1.0).contains(&stat));
        rfm_detector_free(fp);
    }
}

#[test]
fn covariance_is_toeplitz_plus_noise() {
    let s = scenario(0.0);
    let (mut re, mut im) = (vec![0.0; 256], vec![0.0; 256]);
    assert_eq!(unsafe { rfm_scenario_covariance(s.0, re.as_mut_ptr(), im.as_mut_ptr(), 256) }, RfmStatus::Ok);
    for i in 0..16 {
        for j in 0..16 {
            let want = 0.5f64.powi((i as i32 - j as i32).abs()) + if i == j { 1.0 } else { 0.0 };
            assert!((re[i * 16 + j] - want).abs() < 1e-12);
            assert_eq!(im[i * 16 + j], 0.0);
        }
    }
    assert_eq!(unsafe { rfm_scenario_n_pulses(s.0) }, 16);
    assert_eq!(unsafe { rfm_scenario_n_pulses(ptr::null()) }, 0);
}

#[test]
fn thresholds_and_decisions() {
    let mut t = 0.0;
    unsafe {
        assert_eq!(rfm_threshold_mf(0.01, &mut t), RfmStatus::Ok);
        assert!((t - 100f64.ln()).abs() < 1e-12);
        assert_eq!(rfm_threshold_nmf(0.01, 16, &mut t), RfmStatus::Ok);
        assert!((t - (1.0 - 0.01f64.powf(1.0 / 15.0))).abs() < 1e-12);
        assert_eq!(rfm_threshold_mf(1.5, &mut t), RfmStatus::InvalidArgument);
        assert!(!last_error().is_empty());
    }

    let s = scenario(0.0);
    let det = detector(&s, RfmDetectorKind::Mf, 0.0);
    let mut h1 = false;
    unsafe {
        assert_eq!(rfm_detector_decide(det, 1.0, &mut h1), RfmStatus::Uncalibrated);
        assert_eq!(rfm_detector_threshold(det, &mut t), RfmStatus::Uncalibrated);
        assert_eq!(rfm_detector_set_threshold(det, 2.0, 0.01), RfmStatus::Ok);
        assert_eq!(rfm_detector_threshold(det, &mut t), RfmStatus::Ok);
        assert_eq!(t, 2.0);
        assert_eq!(rfm_detector_decide(det, 2.5, &mut h1), RfmStatus::Ok);
        assert!(h1);
        assert_eq!(rfm_detector_decide(det, 2.0, &mut h1), RfmStatus::Ok);
        assert!(!h1, "ties decide H0");
        assert_eq!(rfm_detector_set_threshold(det, f64::NAN, 0.01), RfmStatus::InvalidArgument);
        rfm_detector_free(det);
    }
}

#[test]
fn error_codes() {
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(rfm_scenario_new(16, 1.5, 0.0, 1, &mut s), RfmStatus::InvalidArgument);
        assert!(s.is_null());
        assert!(last_error().contains("rho"));
        assert_eq!(rfm_scenario_new(16, 0.5, 0.0, 1, ptr::null_mut()), RfmStatus::NullPointer);
    }

    let s = scenario(1.0);
    let (yr, yi) = sample(&s, false);
    let mut stat = 0.0;
    let amf = detector(&s, RfmDetectorKind::AmfScm, 0.0);
    unsafe {
        assert_eq!(rfm_detector_statistic(amf, yr.as_ptr(), yi.as_ptr(), 8, ptr::null(), ptr::null(), 0, &mut stat), RfmStatus::DimensionMismatch);
        assert_eq!(rfm_detector_statistic(amf, yr.as_ptr(), yi.as_ptr(), 16, ptr::null(), ptr::null(), 4, &mut stat), RfmStatus::NullPointer);
        let (zr, zi) = secondary(&s, 8);
        assert_eq!(rfm_detector_statistic(amf, yr.as_ptr(), yi.as_ptr(), 16, zr.as_ptr(), zi.as_ptr(), 8, &mut stat), RfmStatus::Singular);
        let fp = detector(&s, RfmDetectorKind::AnmfFp, 0.0);
        assert_eq!(rfm_detector_statistic(fp, yr.as_ptr(), yi.as_ptr(), 16, zr.as_ptr(), zi.as_ptr(), 8, &mut stat), RfmStatus::DimensionMismatch);
        assert!(last_error().contains("K = 8"));
        rfm_detector_free(fp);
        let (zr, zi) = secondary(&s, 32);
        assert_eq!(rfm_detector_statistic(amf, yr.as_ptr(), yi.as_ptr(), 16, zr.as_ptr(), zi.as_ptr(), 32, &mut stat), RfmStatus::Ok);
        assert_eq!(rfm_last_error_length(), 0);
        assert_eq!(rfm_detector_statistic(ptr::null(), yr.as_ptr(), yi.as_ptr(), 16, ptr::null(), ptr::null(), 0, &mut stat), RfmStatus::NullPointer);
        rfm_detector_free(amf);
        rfm_detector_free(ptr::null_mut());
        rfm_scenario_free(ptr::null_mut());
    }

    let missing = CString::new("/nonexistent/drfm.rfn").unwrap();
    let mut det = ptr::null_mut();
    assert_eq!(unsafe { rfm_detector_load_drfm(s.0, missing.as_ptr(), 0, &mut det) }, RfmStatus::Io);
    assert!(det.is_null());
}

#[test]
fn same_seed_same_samples() {
    let a = scenario(0.5);
    let b = scenario(0.5);
    for h1 in [false, true, true] {
        assert_eq!(sample(&a, h1), sample(&b, h1));
    }
    assert_ne!(sample(&a, false), sample(&a, false));
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/rfm_radar.h")).unwrap();
    for sym in [
        "rfm_last_error_length",
        "rfm_last_error_message",
        "rfm_scenario_new",
        "rfm_scenario_free",
        "rfm_scenario_n_pulses",
        "rfm_scenario_covariance",
        "rfm_scenario_sample",
        "rfm_scenario_sample_secondary",
        "rfm_detector_new",
        "rfm_detector_load_drfm",
        "rfm_detector_free",
        "rfm_detector_statistic",
        "rfm_detector_set_threshold",
        "rfm_detector_threshold",
        "rfm_detector_decide",
        "rfm_threshold_mf",
        "rfm_threshold_nmf",
        "typedef struct RfmScenario RfmScenario",
        "typedef struct RfmDetector RfmDetector",
        "RFM_STATUS_NOT_CONVERGED = 4",
    ] {
        assert!(header.contains(sym), "missing {sym}");
    }
}

//! Detection with a trained velocity field.
//!
//! A test vector is carried from `t = 1` back to `t = 0` by explicit Euler
//! steps on the learned field; the squared norm of the resulting latent
//! point is the anomaly score, compared with a CFAR threshold fixed on
//! target-free validation data.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flow::{FlowError, MlpParams, ThresholdRecord};
use crate::scenario::Hypothesis;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DrfmError {
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error("no scores to calibrate on")]
    EmptyScores,
    #[error("false-alarm probability {0} outside (0, 1)")]
    PfaOutOfRange(f64),
    #[error("non-finite score encountered")]
    NonFiniteScore,
    #[error("integration needs at least one step")]
    ZeroSteps,
}

pub type Result<T> = std::result::Result<T, DrfmError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegrationConfig {
    /// Number of Euler steps over `[0, 1]`.
    pub steps: usize,
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        Self { steps: 64 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThresholdSource {
    EmpiricalQuantile,
    Analytic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub lambda: f64,
    pub pfa_target: f64,
    pub calibration_size: usize,
    pub source: ThresholdSource,
}

impl Threshold {
    /// `H1` iff `score > λ`; equality decides `H0`.
    pub fn decide(&self, score: f64) -> Hypothesis {
        if score > self.lambda {
            Hypothesis::H1
        } else {
            Hypothesis::H0
        }
    }

    pub fn to_record(&self, scenario_digest: String, integration_steps: usize) -> ThresholdRecord {
        ThresholdRecord {
            lambda: self.lambda,
            pfa_target: self.pfa_target,
            calibration_size: self.calibration_size,
            scenario_digest,
            integration_steps,
        }
    }

    pub fn from_record(r: &ThresholdRecord) -> Self {
        Self { lambda: r.lambda, pfa_target: r.pfa_target, calibration_size: r.calibration_size, source: ThresholdSource::EmpiricalQuantile }
    }
}

/// Euler integration from `t = 1` to `t = 0`: `u ← u − v(u, k/S)/S` for `k = S, …, 1`.
pub fn inverse_map(params: &MlpParams, x: &[f64], cfg: &IntegrationConfig) -> Result<Vec<f64>> {
    let xs = ArrayView2::from_shape((1, x.len()), x).map_err(|e| FlowError::Shape(e.to_string()))?;
    Ok(inverse_map_batch(params, xs, cfg)?.into_raw_vec_and_offset().0)
}

/// Row-wise [`inverse_map`]; all rows share each network evaluation.
pub fn inverse_map_batch(params: &MlpParams, xs: ArrayView2<f64>, cfg: &IntegrationConfig) -> Result<Array2<f64>> {
    if cfg.steps == 0 {
        return Err(DrfmError::ZeroSteps);
    }
    let h = 1.0 / cfg.steps as f64;
    let mut u = xs.to_owned();
    for k in (1..=cfg.steps).rev() {
        let v = params.forward_batch_at(u.view(), k as f64 * h)?;
        u.scaled_add(-h, &v);
    }
    Ok(u)
}

/// `S(x) = ‖z‖²`.
pub fn anomaly_score(z: &[f64]) -> f64 {
    z.iter().map(|v| v * v).sum()
}

/// Anomaly scores of every row of `xs`.
pub fn score_batch(params: &MlpParams, xs: ArrayView2<f64>, cfg: &IntegrationConfig) -> Result<Vec<f64>> {
    let z = inverse_map_batch(params, xs, cfg)?;
    Ok(z.rows().into_iter().map(|r| r.iter().map(|v| v * v).sum()).collect())
}

/// Order-statistic rank `⌈(1 − pfa)·M⌉`, clamped to `[1, M]`.
pub fn quantile_rank(m: usize, pfa: f64) -> usize {
    let q = (1.0 - pfa) * m as f64;
    // (1 - 0.01)·100 is not exactly 99 in binary
    let k = if (q - q.round()).abs() < 1e-9 { q.round() } else { q.ceil() };
    (k as usize).clamp(1, m)
}

/// λ is the `⌈(1 − pfa)·M⌉`-th smallest score.
pub fn calibrate_threshold(scores: &[f64], pfa: f64) -> Result<Threshold> {
    if scores.is_empty() {
        return Err(DrfmError::EmptyScores);
    }
    if !(pfa > 0.0 && pfa < 1.0) {
        return Err(DrfmError::PfaOutOfRange(pfa));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(DrfmError::NonFiniteScore);
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    let k = quantile_rank(sorted.len(), pfa);
    Ok(Threshold { lambda: sorted[k - 1], pfa_target: pfa, calibration_size: sorted.len(), source: ThresholdSource::EmpiricalQuantile })
}

pub fn detect(x: &[f64], params: &MlpParams, threshold: &Threshold, cfg: &IntegrationConfig) -> Result<Hypothesis> {
    Ok(threshold.decide(anomaly_score(&inverse_map(params, x, cfg)?)))
}

/// A trained field bundled with its integration settings and, once
/// calibrated, its threshold.
#[derive(Debug, Clone)]
pub struct DrfmDetector {
    pub params: MlpParams,
    pub integration: IntegrationConfig,
    pub threshold: Option<Threshold>,
}

impl DrfmDetector {
    pub fn new(params: MlpParams, integration: IntegrationConfig) -> Self {
        Self { params, integration, threshold: None }
    }

    pub fn scores(&self, xs: ArrayView2<f64>) -> Result<Vec<f64>> {
        score_batch(&self.params, xs, &self.integration)
    }

    pub fn calibrate(&mut self, validation: ArrayView2<f64>, pfa: f64) -> Result<Threshold> {
        let t = calibrate_threshold(&self.scores(validation)?, pfa)?;
        self.threshold = Some(t);
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::NetArchitecture;
    use proptest::prelude::*;

    fn constant_field(c: &[f64]) -> MlpParams {
        let arch = NetArchitecture::for_data_dim(c.len(), vec![4, 4]);
        let mut p = MlpParams::zeros(&arch);
        p.layers[2].bias = ndarray::Array1::from(c.to_vec());
        p
    }

    #[test]
    fn zero_field_is_identity() {
        let p = MlpParams::zeros(&NetArchitecture::for_data_dim(4, vec![8, 8]));
        let x = [1.5, -2.0, 0.25, 3.0];
        assert_eq!(inverse_map(&p, &x, &IntegrationConfig::default()).unwrap(), x.to_vec());
    }

    #[test]
    fn constant_field_integrates_exactly() {
        let c = [0.5, -1.0, 2.0, 0.0];
        let p = constant_field(&c);
        let x = [1.0, 1.0, 1.0, 1.0];
        for steps in [1, 3, 64] {
            let z = inverse_map(&p, &x, &IntegrationConfig { steps }).unwrap();
            for i in 0..4 {
                assert!((z[i] - (x[i] - c[i])).abs() < 1e-14, "steps {steps}");
            }
        }
        assert!(matches!(inverse_map(&p, &x, &IntegrationConfig { steps: 0 }), Err(DrfmError::ZeroSteps)));
    }

    #[test]
    fn score_examples() {
        assert_eq!(anomaly_score(&[0.0; 5]), 0.0);
        assert_eq!(anomaly_score(&[1.0; 32]), 32.0);
    }

    #[test]
    fn calibration_order_statistics() {
        let scores: Vec<f64> = (1..=100).map(f64::from).collect();
        let t = calibrate_threshold(&scores, 0.01).unwrap();
        assert_eq!(t.lambda, 99.0);
        assert_eq!(scores.iter().filter(|&&s| s > t.lambda).count(), 1);
        assert_eq!(calibrate_threshold(&scores, 0.5).unwrap().lambda, 50.0);
        assert!(matches!(calibrate_threshold(&[], 0.1), Err(DrfmError::EmptyScores)));
        assert!(matches!(calibrate_threshold(&scores, 0.0), Err(DrfmError::PfaOutOfRange(_))));
        assert!(matches!(calibrate_threshold(&scores, 1.0), Err(DrfmError::PfaOutOfRange(_))));
    }

    proptest! {
        #[test]
        fn calibration_is_monotone_and_sound(scores in prop::collection::vec(0.0f64..100.0, 1..400), a in 0.001f64..0.999, b in 0.001f64..0.999) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let t_lo = calibrate_threshold(&scores, lo).unwrap();
            let t_hi = calibrate_threshold(&scores, hi).unwrap();
            prop_assert!(t_lo.lambda >= t_hi.lambda);
            let m = scores.len() as f64;
            let frac = scores.iter().filter(|&&s| s > t_lo.lambda).count() as f64 / m;
            prop_assert!(frac <= lo + 1.0 / m + 1e-12);
        }

        #[test]
        fn calibration_lower_bound_without_ties(n in 10usize..500, pfa in 0.01f64..0.99) {
            let scores: Vec<f64> = (0..n).map(|i| ((i * 7919) % n) as f64).collect();
            let t = calibrate_threshold(&scores, pfa).unwrap();
            let frac = scores.iter().filter(|&&s| s > t.lambda).count() as f64 / n as f64;
            prop_assert!(frac >= pfa - 1.0 / n as f64 - 1e-12);
        }
    }

    #[test]
    fn decision_rule_extremes() {
        let p = MlpParams::zeros(&NetArchitecture::for_data_dim(2, vec![3]));
        let cfg = IntegrationConfig::default();
        let never = Threshold { lambda: f64::MAX, pfa_target: 0.01, calibration_size: 1, source: ThresholdSource::Analytic };
        let always = Threshold { lambda: -1.0, ..never };
        for x in [[0.0, 0.0], [1e10, -3.0], [0.1, 0.2]] {
            assert_eq!(detect(&x, &p, &never, &cfg).unwrap(), Hypothesis::H0);
            assert_eq!(detect(&x, &p, &always, &cfg).unwrap(), Hypothesis::H1);
        }
        // tie goes to H0
        let tie = Threshold { lambda: 5.0, ..never };
        assert_eq!(detect(&[1.0, 2.0], &p, &tie, &cfg).unwrap(), Hypothesis::H0);
    }

    #[test]
    fn zero_field_thresholds_energy() {
        let p = MlpParams::zeros(&NetArchitecture::for_data_dim(2, vec![3]));
        let cfg = IntegrationConfig { steps: 5 };
        let th = Threshold { lambda: 2.0, pfa_target: 0.1, calibration_size: 10, source: ThresholdSource::EmpiricalQuantile };
        for x in [[1.0, 1.0], [1.0, 1.01], [0.0, 1.5], [-2.0, 0.0]] {
            let energy = x[0] * x[0] + x[1] * x[1];
            assert_eq!(detect(&x, &p, &th, &cfg).unwrap(), th.decide(energy));
        }
    }
}

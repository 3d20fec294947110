//! Classical detection statistics and covariance estimators.
//!
//! MF and NMF use a known interference covariance. The adaptive variants
//! plug in the sample covariance (AMF-SCM, ANMF-SCM) or Tyler's fixed-point
//! estimate (ANMF-FP) built from target-free secondary data.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{cholesky, ComplexScalar, ComplexVector, HermitianMatrix, LinalgError, LowerTriangular};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DetectorError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("observation is the zero vector")]
    ZeroObservation,
    #[error("no secondary data")]
    EmptySecondaryData,
    #[error("secondary data size K = {k} is below the dimension N = {n}")]
    InsufficientSecondaryData { k: usize, n: usize },
    #[error("secondary sample {index} is the zero vector")]
    DegenerateSample { index: usize },
    #[error("fixed-point iteration did not converge after {iterations} iterations (last change {last_change:e})")]
    NotConverged { iterations: usize, last_change: f64 },
    #[error("domain error: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, DetectorError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Estimator {
    Known,
    Scm,
    TylerFp,
}

#[derive(Debug, Clone)]
pub struct CovEstimate {
    pub matrix: HermitianMatrix,
    pub estimator: Estimator,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TylerOptions {
    /// Relative Frobenius change that counts as converged.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for TylerOptions {
    fn default() -> Self {
        Self { tol: 1e-6, max_iter: 100 }
    }
}

/// A covariance factor paired with a pre-whitened steering vector, so that
/// repeated MF/NMF evaluations cost two triangular solves at most.
#[derive(Debug, Clone)]
pub struct WhitenedSteering {
    factor: LowerTriangular,
    whitened_p: ComplexVector,
    gain: f64,
}

impl WhitenedSteering {
    pub fn new(sigma: &HermitianMatrix, p: &ComplexVector) -> Result<Self> {
        Self::from_factor(cholesky(sigma)?, p)
    }

    pub fn from_factor(factor: LowerTriangular, p: &ComplexVector) -> Result<Self> {
        let whitened_p = factor.forward_solve(p)?;
        let gain = whitened_p.norm_sqr();
        Ok(Self { factor, whitened_p, gain })
    }

    /// `pᴴΣ⁻¹p`.
    pub fn gain(&self) -> f64 {
        self.gain
    }

    /// Returns `(|pᴴΣ⁻¹y|², yᴴΣ⁻¹y)`.
    fn projections(&self, y: &ComplexVector) -> Result<(f64, f64)> {
        let wy = self.factor.forward_solve(y)?;
        Ok((self.whitened_p.dot_conj(&wy)?.norm_sqr(), wy.norm_sqr()))
    }

    /// `|pᴴΣ⁻¹y|² / (pᴴΣ⁻¹p)`.
    pub fn mf(&self, y: &ComplexVector) -> Result<f64> {
        Ok(self.projections(y)?.0 / self.gain)
    }

    /// `|pᴴΣ⁻¹y|² / ((pᴴΣ⁻¹p)(yᴴΣ⁻¹y))`, in `[0, 1]`.
    pub fn nmf(&self, y: &ComplexVector) -> Result<f64> {
        if y.norm_sqr() == 0.0 {
            return Err(DetectorError::ZeroObservation);
        }
        let (num, energy) = self.projections(y)?;
        Ok((num / (self.gain * energy)).clamp(0.0, 1.0))
    }
}

pub fn mf_statistic(y: &ComplexVector, p: &ComplexVector, sigma: &HermitianMatrix) -> Result<f64> {
    WhitenedSteering::new(sigma, p)?.mf(y)
}

pub fn nmf_statistic(y: &ComplexVector, p: &ComplexVector, sigma: &HermitianMatrix) -> Result<f64> {
    WhitenedSteering::new(sigma, p)?.nmf(y)
}

/// Sample covariance `(1/K) Σ z_k z_kᴴ`.
pub fn scm(z: &[ComplexVector]) -> Result<CovEstimate> {
    let first = z.first().ok_or(DetectorError::EmptySecondaryData)?;
    let n = first.len();
    if let Some(bad) = z.iter().find(|v| v.len() != n) {
        return Err(LinalgError::DimensionMismatch { expected: n, found: bad.len() }.into());
    }
    let mut acc = vec![ComplexScalar::new(0.0, 0.0); n * n];
    for v in z {
        accumulate_outer(&mut acc, v.as_slice(), 1.0);
    }
    let scale = 1.0 / z.len() as f64;
    acc.iter_mut().for_each(|a| *a *= scale);
    Ok(CovEstimate {
        matrix: HermitianMatrix::from_raw_unchecked(n, acc),
        estimator: Estimator::Scm,
        iterations: 0,
        converged: true,
    })
}

/// Adds `w · v vᴴ` into the upper triangle of a row-major `n × n` buffer.
fn accumulate_outer(acc: &mut [ComplexScalar], v: &[ComplexScalar], w: f64) {
    let n = v.len();
    for i in 0..n {
        let vi = v[i] * w;
        for j in i..n {
            acc[i * n + j] += vi * v[j].conj();
        }
    }
}

/// One application of the Tyler map followed by trace normalisation to `N`.
fn tyler_map(z: &[ComplexVector], sigma: &HermitianMatrix) -> Result<HermitianMatrix> {
    let n = sigma.dim();
    let l = cholesky(sigma)?;
    let mut acc = vec![ComplexScalar::new(0.0, 0.0); n * n];
    for v in z {
        let q = l.inverse_quadratic_form(v)?;
        accumulate_outer(&mut acc, v.as_slice(), 1.0 / q);
    }
    // the N/K prefactor cancels under trace normalisation
    let trace: f64 = (0..n).map(|i| acc[i * n + i].re).sum();
    let s = n as f64 / trace;
    acc.iter_mut().for_each(|a| *a *= s);
    Ok(HermitianMatrix::from_raw_unchecked(n, acc))
}

/// Tyler's fixed-point scatter estimate, started at the identity and
/// normalised to trace `N` after every iteration.
pub fn tyler_fp(z: &[ComplexVector], opts: TylerOptions) -> Result<CovEstimate> {
    let first = z.first().ok_or(DetectorError::EmptySecondaryData)?;
    let n = first.len();
    if z.len() < n {
        return Err(DetectorError::InsufficientSecondaryData { k: z.len(), n });
    }
    for (index, v) in z.iter().enumerate() {
        if v.len() != n {
            return Err(LinalgError::DimensionMismatch { expected: n, found: v.len() }.into());
        }
        if v.norm_sqr() == 0.0 {
            return Err(DetectorError::DegenerateSample { index });
        }
    }
    let mut sigma = HermitianMatrix::identity(n);
    let mut last_change = f64::INFINITY;
    for it in 1..=opts.max_iter {
        let next = tyler_map(z, &sigma)?;
        last_change = next.frobenius_distance(&sigma)? / sigma.frobenius_norm();
        sigma = next;
        if last_change < opts.tol {
            return Ok(CovEstimate { matrix: sigma, estimator: Estimator::TylerFp, iterations: it, converged: true });
        }
    }
    Err(DetectorError::NotConverged { iterations: opts.max_iter, last_change })
}

/// Relative Frobenius residual of the normalised fixed-point equation at `sigma`.
pub fn tyler_residual(z: &[ComplexVector], sigma: &HermitianMatrix) -> Result<f64> {
    Ok(tyler_map(z, sigma)?.frobenius_distance(sigma)? / sigma.frobenius_norm())
}

pub fn amf_scm(y: &ComplexVector, p: &ComplexVector, secondary: &[ComplexVector]) -> Result<f64> {
    WhitenedSteering::new(&scm(secondary)?.matrix, p)?.mf(y)
}

pub fn anmf_scm(y: &ComplexVector, p: &ComplexVector, secondary: &[ComplexVector]) -> Result<f64> {
    WhitenedSteering::new(&scm(secondary)?.matrix, p)?.nmf(y)
}

pub fn anmf_fp(y: &ComplexVector, p: &ComplexVector, secondary: &[ComplexVector]) -> Result<f64> {
    WhitenedSteering::new(&tyler_fp(secondary, TylerOptions::default())?.matrix, p)?.nmf(y)
}

fn check_pfa(pfa: f64) -> Result<()> {
    if !(pfa > 0.0 && pfa < 1.0) {
        return Err(DetectorError::Domain(format!("false-alarm probability {pfa} outside (0, 1)")));
    }
    Ok(())
}

/// Known-covariance MF threshold; the H0 statistic is Exp(1).
pub fn mf_threshold_analytic(pfa: f64) -> Result<f64> {
    check_pfa(pfa)?;
    Ok(-pfa.ln())
}

/// Known-covariance NMF threshold; the Gaussian H0 statistic is Beta(1, N−1).
pub fn nmf_threshold_analytic(pfa: f64, n: usize) -> Result<f64> {
    check_pfa(pfa)?;
    if n < 2 {
        return Err(DetectorError::Domain(format!("NMF threshold needs N >= 2, got {n}")));
    }
    Ok(1.0 - pfa.powf(1.0 / (n as f64 - 1.0)))
}

/// Known-covariance MF detection probability at whitened SNR `snr_linear`:
/// `Q₁(sqrt(2·SNR), sqrt(−2 ln Pfa))`.
pub fn mf_pd_analytic(snr_linear: f64, pfa: f64) -> Result<f64> {
    check_pfa(pfa)?;
    if !(snr_linear >= 0.0) {
        return Err(DetectorError::Domain(format!("SNR {snr_linear} must be non-negative")));
    }
    if snr_linear.is_infinite() {
        return Ok(1.0);
    }
    Ok(marcum_q1((2.0 * snr_linear).sqrt(), (-2.0 * pfa.ln()).sqrt()))
}

fn ln_factorial(j: u64) -> f64 {
    (1..=j).map(|k| (k as f64).ln()).sum()
}

/// First-order Marcum Q function.
///
/// Uses the Poisson mixture form of the noncentral χ²₂ tail:
/// `Q₁(a, b) = Σ_j Pois(j; a²/2) · P(Pois(b²/2) ≤ j)`.
pub fn marcum_q1(a: f64, b: f64) -> f64 {
    let la = 0.5 * a * a;
    let lb = 0.5 * b * b;
    if b <= 0.0 {
        return 1.0;
    }
    let log_pois = |lambda: f64, j: u64| {
        if lambda == 0.0 {
            if j == 0 {
                0.0
            } else {
                f64::NEG_INFINITY
            }
        } else {
            -lambda + j as f64 * lambda.ln() - ln_factorial(j)
        }
    };
    let j_max = (la + 12.0 * la.sqrt() + 60.0).ceil() as u64;
    let mut cdf_b = 0.0;
    let mut q = 0.0;
    // ln j! grows incrementally; recomputing keeps the code obvious at this size
    for j in 0..=j_max {
        cdf_b += log_pois(lb, j).exp();
        q += log_pois(la, j).exp() * cdf_b.min(1.0);
    }
    q.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::toeplitz_covariance;
    use crate::scenario::{sample_complex_gaussian, steering_vector, Scenario, ScenarioConfig};
    use crate::streams::{stream, Purpose, StreamRng};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> ComplexScalar {
        ComplexScalar::new(re, im)
    }

    fn rng(tag: u64) -> StreamRng {
        stream(tag, Purpose::Misc, &[0xDE7])
    }

    fn random_vec(n: usize, r: &mut StreamRng) -> ComplexVector {
        sample_complex_gaussian(&HermitianMatrix::identity(n), r).unwrap()
    }

    #[test]
    fn mf_examples() {
        let p = steering_vector(0.0, 16);
        let eye = HermitianMatrix::identity(16);
        assert!((mf_statistic(&p, &p, &eye).unwrap() - 16.0).abs() < 1e-12);
        let y = steering_vector(1.0, 16);
        assert!(mf_statistic(&y, &p, &eye).unwrap() < 1e-20);
    }

    #[test]
    fn mf_h0_mean_is_one() {
        let s = Scenario::new(ScenarioConfig::default()).unwrap();
        let w = WhitenedSteering::new(s.total_covariance(), &s.steering(0.0)).unwrap();
        let mut r = rng(1);
        let lambda = mf_threshold_analytic(0.01).unwrap();
        let (mut sum, mut exceed) = (0.0, 0usize);
        let m = 100_000;
        for _ in 0..m {
            let v = w.mf(&s.sample_interference(&mut r)).unwrap();
            sum += v;
            exceed += (v > lambda) as usize;
        }
        assert!((sum / m as f64 - 1.0).abs() < 0.02);
        assert!((exceed as f64 / m as f64 - 0.01).abs() < 0.003);
    }

    #[test]
    fn nmf_examples() {
        let sigma = toeplitz_covariance(0.5, 16).unwrap().add(&HermitianMatrix::identity(16)).unwrap();
        let p = steering_vector(3.0, 16);
        assert!((nmf_statistic(&p, &p, &sigma).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(nmf_statistic(&ComplexVector::zeros(16), &p, &sigma), Err(DetectorError::ZeroObservation));
    }

    #[test]
    fn nmf_h0_tail_matches_beta() {
        let s = Scenario::new(ScenarioConfig::default()).unwrap();
        let w = WhitenedSteering::new(s.total_covariance(), &s.steering(0.0)).unwrap();
        let lambda = nmf_threshold_analytic(0.01, 16).unwrap();
        let mut r = rng(2);
        let m = 100_000;
        let exceed = (0..m).filter(|_| w.nmf(&s.sample_interference(&mut r)).unwrap() > lambda).count();
        assert!((exceed as f64 / m as f64 - 0.010).abs() < 0.003);
    }

    #[test]
    fn analytic_thresholds() {
        assert!((mf_threshold_analytic(1e-2).unwrap() - 4.605_170_185_988_091).abs() < 1e-12);
        assert!(mf_threshold_analytic(1.0 - 1e-15).unwrap() < 1e-14);
        assert!((nmf_threshold_analytic(1e-2, 16).unwrap() - (1.0 - 0.01f64.powf(1.0 / 15.0))).abs() < 1e-15);
        assert!((nmf_threshold_analytic(1e-2, 16).unwrap() - 0.264_36).abs() < 1e-5);
        assert!(nmf_threshold_analytic(1.0 - 1e-15, 16).unwrap() < 1e-14);
        assert!(mf_threshold_analytic(0.0).is_err());
        assert!(mf_threshold_analytic(1.0).is_err());
        assert!(nmf_threshold_analytic(0.5, 1).is_err());
    }

    /// Exponentially scaled modified Bessel I0 by its power series.
    fn bessel_i0_scaled(z: f64) -> f64 {
        let kmax = (z + 10.0 * z.sqrt() + 40.0) as u64;
        let mut ln_fact = 0.0;
        let mut sum = 0.0;
        for k in 0..=kmax {
            if k > 0 {
                ln_fact += (k as f64).ln();
            }
            let ln_term = if z == 0.0 { if k == 0 { 0.0 } else { f64::NEG_INFINITY } } else { 2.0 * k as f64 * (0.5 * z).ln() - 2.0 * ln_fact };
            sum += (ln_term - z).exp();
        }
        sum
    }

    /// Q₁(a, b) by Simpson quadrature of the Rician density; independent of the series.
    fn marcum_quadrature(a: f64, b: f64) -> f64 {
        let upper = b.max(a) + 40.0;
        let steps = 40_000;
        let h = (upper - b) / steps as f64;
        let f = |x: f64| x * (-(x - a).powi(2) / 2.0).exp() * bessel_i0_scaled(a * x);
        let mut s = f(b) + f(upper);
        for i in 1..steps {
            s += f(b + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn marcum_matches_quadrature() {
        for &(a, b) in &[(0.0, 1.0), (1.0, 1.0), (2.0, 3.0), (4.47, 3.03), (8.0, 3.0), (0.5, 5.0), (12.0, 14.0)] {
            let series = marcum_q1(a, b);
            let quad = marcum_quadrature(a, b);
            assert!((series - quad).abs() < 1e-9, "Q1({a},{b}): {series} vs {quad}");
        }
        // a = 0 reduces to the Rayleigh tail
        assert!((marcum_q1(0.0, 2.0) - (-2.0f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn mf_pd_limits() {
        assert!((mf_pd_analytic(0.0, 0.01).unwrap() - 0.01).abs() < 1e-12);
        assert!(mf_pd_analytic(1e4, 0.01).unwrap() > 1.0 - 1e-12);
        assert!(mf_pd_analytic(f64::INFINITY, 0.01).unwrap() == 1.0);
        assert!(mf_pd_analytic(-1.0, 0.01).is_err());
    }

    #[test]
    fn mf_pd_matches_monte_carlo_at_10db() {
        let s = Scenario::new(ScenarioConfig::default()).unwrap();
        let p = s.steering(0.0);
        let w = WhitenedSteering::new(s.total_covariance(), &p).unwrap();
        let lambda = mf_threshold_analytic(0.01).unwrap();
        let mut r = rng(3);
        let m = 100_000;
        let hits = (0..m)
            .filter(|_| {
                let obs = s.sample_observation(crate::scenario::Hypothesis::H1, 10.0, 0.0, &mut r).unwrap();
                w.mf(&obs.y).unwrap() > lambda
            })
            .count();
        let pd = hits as f64 / m as f64;
        let analytic = mf_pd_analytic(10.0, 0.01).unwrap();
        let half = 1.96 * (analytic * (1.0 - analytic) / m as f64).sqrt();
        assert!((pd - analytic).abs() < half + 1e-4, "MC {pd} vs analytic {analytic}");
        assert!((analytic - 0.9556).abs() < 0.03);
    }

    #[test]
    fn scm_examples() {
        let mut r = rng(4);
        let z = random_vec(5, &mut r);
        let est = scm(std::slice::from_ref(&z)).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                assert!((est.matrix.get(i, j) - z[i] * z[j].conj()).norm() < 1e-14);
            }
        }
        assert!(matches!(scm(&[]), Err(DetectorError::EmptySecondaryData)));
    }

    #[test]
    fn scm_consistency() {
        let sigma = toeplitz_covariance(0.5, 8).unwrap();
        let mut r = rng(5);
        let z: Vec<_> = (0..100_000).map(|_| sample_complex_gaussian(&sigma, &mut r).unwrap()).collect();
        assert!(scm(&z).unwrap().matrix.max_abs_diff(&sigma).unwrap() < 0.03);
    }

    #[test]
    fn tyler_scalar_case() {
        let z: Vec<_> = [0.3, -2.0, 5.0].iter().map(|&v| ComplexVector::new(vec![c(v, 0.1)]).unwrap()).collect();
        let est = tyler_fp(&z, TylerOptions::default()).unwrap();
        assert!((est.matrix.get(0, 0) - c(1.0, 0.0)).norm() < 1e-15);
        assert!(est.converged);
    }

    #[test]
    fn tyler_spherical_consistency() {
        let mut r = rng(6);
        let z: Vec<_> = (0..10_000).map(|_| random_vec(4, &mut r)).collect();
        let est = tyler_fp(&z, TylerOptions::default()).unwrap();
        assert!(est.matrix.max_abs_diff(&HermitianMatrix::identity(4)).unwrap() < 0.05);
        assert!((est.matrix.trace() - 4.0).abs() < 1e-9);
    }

    #[test]
    fn tyler_errors() {
        let mut r = rng(7);
        let few: Vec<_> = (0..3).map(|_| random_vec(4, &mut r)).collect();
        assert!(matches!(tyler_fp(&few, TylerOptions::default()), Err(DetectorError::InsufficientSecondaryData { k: 3, n: 4 })));
        let mut with_zero: Vec<_> = (0..8).map(|_| random_vec(4, &mut r)).collect();
        with_zero[5] = ComplexVector::zeros(4);
        assert!(matches!(tyler_fp(&with_zero, TylerOptions::default()), Err(DetectorError::DegenerateSample { index: 5 })));
        let z: Vec<_> = (0..8).map(|_| random_vec(4, &mut r)).collect();
        assert!(matches!(tyler_fp(&z, TylerOptions { tol: 1e-6, max_iter: 1 }), Err(DetectorError::NotConverged { .. })));
    }

    #[test]
    fn tyler_residual_and_iterations_over_seeds() {
        let s = Scenario::new(ScenarioConfig::default()).unwrap();
        for seed in 0..100 {
            let mut r = rng(1000 + seed);
            let sec = s.sample_secondary(32, &mut r).unwrap();
            let est = tyler_fp(&sec.z, TylerOptions::default()).unwrap();
            assert!(est.iterations < 100);
            let res = tyler_residual(&sec.z, &est.matrix).unwrap();
            assert!(res < 1e-5, "seed {seed}: residual {res}");
        }
    }

    #[test]
    fn amf_equals_mf_when_scm_is_exact() {
        // z_k = sqrt(K)·(k-th column of L) gives SCM = L·Lᴴ = Σ exactly
        let sigma = toeplitz_covariance(0.5, 6).unwrap().add(&HermitianMatrix::identity(6)).unwrap();
        let l = cholesky(&sigma).unwrap();
        let k = 6;
        let z: Vec<_> = (0..k)
            .map(|col| ComplexVector::new((0..6).map(|row| l.get(row, col) * (k as f64).sqrt()).collect()).unwrap())
            .collect();
        let mut r = rng(8);
        let y = random_vec(6, &mut r);
        let p = steering_vector(1.0, 6);
        let a = amf_scm(&y, &p, &z).unwrap();
        let m = mf_statistic(&y, &p, &sigma).unwrap();
        assert!((a - m).abs() < 1e-12 * m.max(1.0));
        assert!((anmf_scm(&y, &p, &z).unwrap() - nmf_statistic(&y, &p, &sigma).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn adaptive_statistics_approach_known_covariance() {
        let s = Scenario::new(ScenarioConfig::default()).unwrap();
        let p = s.steering(0.0);
        let known = WhitenedSteering::new(s.total_covariance(), &p).unwrap();
        let mut r = rng(9);
        let ys: Vec<_> = (0..20).map(|_| s.sample_interference(&mut r)).collect();
        let mut gaps = Vec::new();
        for k in [64usize, 1024, 16384] {
            let sec = s.sample_secondary(k, &mut r).unwrap();
            let gap: f64 = ys
                .iter()
                .map(|y| {
                    (amf_scm(y, &p, &sec.z).unwrap() - known.mf(y).unwrap()).abs()
                        + (anmf_scm(y, &p, &sec.z).unwrap() - known.nmf(y).unwrap()).abs()
                })
                .sum();
            gaps.push(gap);
        }
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "gaps {gaps:?}");
    }

    proptest! {
        #[test]
        fn mf_is_homogeneous(seed in 0u64..1000, re in -3.0f64..3.0, im in -3.0f64..3.0) {
            let mut r = rng(seed);
            let y = random_vec(8, &mut r);
            let p = steering_vector(1.5, 8);
            let sigma = toeplitz_covariance(0.5, 8).unwrap();
            let s = c(re, im);
            let base = mf_statistic(&y, &p, &sigma).unwrap();
            let scaled = mf_statistic(&y.scale(s), &p, &sigma).unwrap();
            prop_assert!((scaled - s.norm_sqr() * base).abs() <= 1e-12 * (s.norm_sqr() * base).max(1e-300) + 1e-300);
        }

        #[test]
        fn nmf_family_is_scale_invariant(seed in 0u64..1000, re in -5.0f64..5.0, im in 0.1f64..5.0) {
            let s = Scenario::new(ScenarioConfig::compound(1.0)).unwrap();
            let mut r = rng(seed);
            let y = s.sample_interference(&mut r);
            let sec = s.sample_secondary(32, &mut r).unwrap();
            let p = s.steering(2.0);
            let k = c(re, im);
            let w = WhitenedSteering::new(s.total_covariance(), &p).unwrap();
            let nmf = w.nmf(&y).unwrap();
            prop_assert!((0.0..=1.0).contains(&nmf));
            prop_assert!((w.nmf(&y.scale(k)).unwrap() - nmf).abs() < 1e-12);
            prop_assert!((anmf_scm(&y.scale(k), &p, &sec.z).unwrap() - anmf_scm(&y, &p, &sec.z).unwrap()).abs() < 1e-12);
            prop_assert!((anmf_fp(&y.scale(k), &p, &sec.z).unwrap() - anmf_fp(&y, &p, &sec.z).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn tyler_ignores_common_scale(seed in 0u64..200, re in -4.0f64..4.0, im in 0.2f64..4.0) {
            let s = Scenario::new(ScenarioConfig::default()).unwrap();
            let mut r = rng(seed + 5000);
            let sec = s.sample_secondary(32, &mut r).unwrap();
            let k = c(re, im);
            let scaled: Vec<_> = sec.z.iter().map(|z| z.scale(k)).collect();
            let a = tyler_fp(&sec.z, TylerOptions::default()).unwrap();
            let b = tyler_fp(&scaled, TylerOptions::default()).unwrap();
            prop_assert!(a.matrix.frobenius_distance(&b.matrix).unwrap() < 1e-10);
            let y = s.sample_interference(&mut r);
            let p = s.steering(0.0);
            prop_assert!((anmf_fp(&y, &p, &sec.z).unwrap() - anmf_fp(&y, &p, &scaled).unwrap()).abs() < 1e-12);
        }
    }
}

//! Synthetic radar observations under both hypotheses.
//!
//! `H0: y = c + n` and `H1: y = α·p + c + n`, with Gaussian or compound
//! Gaussian clutter `c`, white noise `n`, and a target amplitude calibrated
//! to a requested SNR.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dataset::{Dataset, Split};
use crate::linalg::{self, cholesky, ComplexScalar, ComplexVector, HermitianMatrix, LinalgError, LowerTriangular};
use crate::streams::stream;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("real embedding must have even length, got {0}")]
    OddLength(usize),
}

pub type Result<T> = std::result::Result<T, ScenarioError>;

/// Clutter family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClutterKind {
    /// `c ~ CN(0, Σc)`.
    GaussianHomogeneous,
    /// `c = sqrt(δ)·g`, `g ~ CN(0, Σc)`, `δ ~ Gamma(μ, 1/μ)`.
    CompoundGaussian { mu: f64 },
}

impl ClutterKind {
    pub fn short_name(&self) -> &'static str {
        match self {
            ClutterKind::GaussianHomogeneous => "cGN+AWGN",
            ClutterKind::CompoundGaussian { .. } => "cCGN+AWGN",
        }
    }
}

/// How a requested SNR becomes a target amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SnrMode {
    /// `|α|²·pᴴΣ⁻¹p = SNR`.
    #[default]
    Whitened,
    /// `|α| = sqrt(SNR/N)` regardless of the interference covariance.
    Literal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Pulses per observation (N).
    pub n_pulses: usize,
    /// Clutter correlation coefficient.
    pub rho: f64,
    pub clutter: ClutterKind,
    /// Clutter-to-noise ratio `Tr(Σc)/(N σ²)`.
    pub cnr: f64,
    pub seed: u64,
    pub snr_mode: SnrMode,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_pulses: 16,
            rho: 0.5,
            clutter: ClutterKind::GaussianHomogeneous,
            cnr: 1.0,
            seed: 2024,
            snr_mode: SnrMode::Whitened,
        }
    }
}

impl ScenarioConfig {
    pub fn compound(mu: f64) -> Self {
        Self { clutter: ClutterKind::CompoundGaussian { mu }, ..Self::default() }
    }

    /// Hex SHA-256 of the canonical JSON form; identifies the scenario a
    /// threshold was calibrated under.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("scenario serialises");
        Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_pulses < 2 {
            return Err(ScenarioError::Invalid(format!("n_pulses must be at least 2, got {}", self.n_pulses)));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(ScenarioError::Invalid(format!("rho must lie in [0, 1), got {}", self.rho)));
        }
        if !(self.cnr.is_finite() && self.cnr > 0.0) {
            return Err(ScenarioError::Invalid(format!("cnr must be positive, got {}", self.cnr)));
        }
        if let ClutterKind::CompoundGaussian { mu } = self.clutter {
            if !(mu.is_finite() && mu > 0.0) {
                return Err(ScenarioError::Invalid(format!("texture shape mu must be positive, got {mu}")));
            }
        }
        Ok(())
    }

    /// Real dimension of the embedded observation, `2N`.
    pub fn embedded_dim(&self) -> usize {
        2 * self.n_pulses
    }

    /// Default secondary-data size `K = 2N`.
    pub fn default_secondary_size(&self) -> usize {
        2 * self.n_pulses
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Hypothesis {
    H0,
    H1,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub y: ComplexVector,
    pub hypothesis: Hypothesis,
    pub snr_db: Option<f64>,
    pub doppler_bin: Option<f64>,
    pub phase: Option<f64>,
}

/// Target-free observations for covariance estimation.
#[derive(Debug, Clone)]
pub struct SecondaryData {
    pub z: Vec<ComplexVector>,
    pub config_snapshot: ScenarioConfig,
}

/// Sample counts for the train / validation / test splits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitCounts {
    pub train: usize,
    pub validation: usize,
    pub test: usize,
}

impl Default for SplitCounts {
    fn default() -> Self {
        Self { train: 10_000, validation: 10_000, test: 5_000 }
    }
}

#[derive(Debug, Clone)]
pub struct Splits {
    pub train: Dataset,
    pub validation: Dataset,
    pub test: Dataset,
}

/// Steering vector `p_k = exp(2jπ d k / n)`.
pub fn steering_vector(d: f64, n: usize) -> ComplexVector {
    let entries = (0..n).map(|k| ComplexScalar::from_polar(1.0, 2.0 * PI * d * k as f64 / n as f64)).collect();
    ComplexVector::from_vec_unchecked(entries)
}

/// One circular standard complex normal draw: real and imaginary variance 1/2.
fn circular_normal<R: Rng + ?Sized>(rng: &mut R) -> ComplexScalar {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    ComplexScalar::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn circular_white<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<ComplexScalar> {
    (0..n).map(|_| circular_normal(rng)).collect()
}

/// Draws `z ~ CN(0, cov)` as `L·u` with `u` circular white.
pub fn sample_complex_gaussian<R: Rng + ?Sized>(cov: &HermitianMatrix, rng: &mut R) -> Result<ComplexVector> {
    let l = cholesky(cov)?;
    Ok(l.mul_vec(&circular_white(cov.dim(), rng))?)
}

/// Draws a texture `δ ~ Gamma(shape μ, scale 1/μ)`, so `E[δ] = 1`.
pub fn sample_texture<R: Rng + ?Sized>(mu: f64, rng: &mut R) -> Result<f64> {
    if !(mu.is_finite() && mu > 0.0) {
        return Err(ScenarioError::Invalid(format!("texture shape mu must be positive, got {mu}")));
    }
    let gamma = Gamma::new(mu, 1.0 / mu).map_err(|e| ScenarioError::Invalid(e.to_string()))?;
    loop {
        // tiny shapes can underflow to exactly zero
        let v = gamma.sample(rng);
        if v > 0.0 {
            return Ok(v);
        }
    }
}

/// `x = [Re{y}; Im{y}]`.
pub fn embed_real(y: &ComplexVector) -> Vec<f64> {
    let mut x = Vec::with_capacity(2 * y.len());
    x.extend(y.iter().map(|z| z.re));
    x.extend(y.iter().map(|z| z.im));
    x
}

/// Inverse of [`embed_real`].
pub fn unembed_real(x: &[f64]) -> Result<ComplexVector> {
    if x.len() % 2 != 0 {
        return Err(ScenarioError::OddLength(x.len()));
    }
    let n = x.len() / 2;
    Ok(ComplexVector::from_parts(&x[..n], &x[n..])?)
}

/// Whitened amplitude: `|α|²·pᴴΣ⁻¹p = 10^(snr_db/10)`, phase `e^{2jπφ}`.
pub fn whitened_amplitude(snr_db: f64, p: &ComplexVector, total_factor: &LowerTriangular, phi: f64) -> Result<ComplexScalar> {
    let gain = total_factor.inverse_quadratic_form(p)?;
    let magnitude = (db_to_linear(snr_db) / gain).sqrt();
    Ok(ComplexScalar::from_polar(magnitude, 2.0 * PI * phi))
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// A validated scenario with its covariance factors precomputed.
#[derive(Debug, Clone)]
pub struct Scenario {
    cfg: ScenarioConfig,
    clutter_cov: HermitianMatrix,
    total_cov: HermitianMatrix,
    clutter_factor: LowerTriangular,
    total_factor: LowerTriangular,
    noise_power: f64,
}

impl Scenario {
    pub fn new(cfg: ScenarioConfig) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.n_pulses;
        let clutter_cov = linalg::toeplitz_covariance(cfg.rho, n)?;
        let noise_power = clutter_cov.trace() / (n as f64 * cfg.cnr);
        let total_cov = clutter_cov.add(&HermitianMatrix::scaled_identity(n, noise_power))?;
        let clutter_factor = cholesky(&clutter_cov)?;
        let total_factor = cholesky(&total_cov)?;
        Ok(Self { cfg, clutter_cov, total_cov, clutter_factor, total_factor, noise_power })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    pub fn n_pulses(&self) -> usize {
        self.cfg.n_pulses
    }

    /// Σc.
    pub fn clutter_covariance(&self) -> &HermitianMatrix {
        &self.clutter_cov
    }

    /// Σ = Σc + σ²·I.
    pub fn total_covariance(&self) -> &HermitianMatrix {
        &self.total_cov
    }

    pub fn total_factor(&self) -> &LowerTriangular {
        &self.total_factor
    }

    /// σ², fixed by the clutter-to-noise ratio.
    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }

    pub fn steering(&self, d: f64) -> ComplexVector {
        steering_vector(d, self.cfg.n_pulses)
    }

    /// Target amplitude for the configured SNR convention.
    pub fn calibrate_alpha(&self, snr_db: f64, d: f64, phi: f64) -> Result<ComplexScalar> {
        if !(0.0..=1.0).contains(&phi) {
            return Err(ScenarioError::Invalid(format!("phase {phi} outside [0, 1]")));
        }
        match self.cfg.snr_mode {
            SnrMode::Whitened => whitened_amplitude(snr_db, &self.steering(d), &self.total_factor, phi),
            SnrMode::Literal => {
                let magnitude = (db_to_linear(snr_db) / self.cfg.n_pulses as f64).sqrt();
                Ok(ComplexScalar::from_polar(magnitude, 2.0 * PI * phi))
            }
        }
    }

    /// Clutter only, conditioned on a given texture: `sqrt(δ)·g`.
    pub fn sample_clutter_given_texture<R: Rng + ?Sized>(&self, texture: f64, rng: &mut R) -> ComplexVector {
        let g = self.clutter_factor.mul_vec(&circular_white(self.cfg.n_pulses, rng)).expect("dimension fixed");
        if texture == 1.0 {
            g
        } else {
            g.scale(ComplexScalar::new(texture.sqrt(), 0.0))
        }
    }

    /// Clutter plus thermal noise, `c + n`.
    pub fn sample_interference<R: Rng + ?Sized>(&self, rng: &mut R) -> ComplexVector {
        let texture = match self.cfg.clutter {
            ClutterKind::GaussianHomogeneous => 1.0,
            ClutterKind::CompoundGaussian { mu } => sample_texture(mu, rng).expect("mu validated"),
        };
        let c = self.sample_clutter_given_texture(texture, rng);
        let sigma = self.noise_power.sqrt();
        let entries = c.iter().map(|ci| ci + circular_normal(rng) * sigma).collect();
        ComplexVector::from_vec_unchecked(entries)
    }

    /// `α·p + c + n` for a caller-chosen amplitude.
    pub fn sample_with_amplitude<R: Rng + ?Sized>(&self, alpha: ComplexScalar, p: &ComplexVector, rng: &mut R) -> ComplexVector {
        let interference = self.sample_interference(rng);
        interference.add_scaled(alpha, p).expect("dimension fixed")
    }

    /// One observation. Under H1 a fresh phase is drawn uniformly on `[0, 1)`.
    pub fn sample_observation<R: Rng + ?Sized>(&self, hyp: Hypothesis, snr_db: f64, d: f64, rng: &mut R) -> Result<Observation> {
        match hyp {
            Hypothesis::H0 => Ok(Observation {
                y: self.sample_interference(rng),
                hypothesis: Hypothesis::H0,
                snr_db: None,
                doppler_bin: None,
                phase: None,
            }),
            Hypothesis::H1 => {
                let phi: f64 = rng.random::<f64>();
                let alpha = self.calibrate_alpha(snr_db, d, phi)?;
                let y = self.sample_with_amplitude(alpha, &self.steering(d), rng);
                Ok(Observation { y, hypothesis: Hypothesis::H1, snr_db: Some(snr_db), doppler_bin: Some(d), phase: Some(phi) })
            }
        }
    }

    /// `k` independent H0 draws.
    pub fn sample_secondary<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> Result<SecondaryData> {
        if k == 0 {
            return Err(ScenarioError::Invalid("secondary data size must be at least 1".into()));
        }
        let z = (0..k).map(|_| self.sample_interference(rng)).collect();
        Ok(SecondaryData { z, config_snapshot: self.cfg.clone() })
    }

    /// H0 dataset for one split; row `i` comes from its own stream.
    pub fn generate_split(&self, split: Split, rows: usize) -> Result<Dataset> {
        if rows == 0 {
            return Err(ScenarioError::Invalid("split sizes must be positive".into()));
        }
        let purpose = split.purpose();
        let seed = self.cfg.seed;
        let dim = self.cfg.embedded_dim();
        let flat: Vec<f64> = (0..rows as u64)
            .into_par_iter()
            .flat_map_iter(|i| {
                let mut rng = stream(seed, purpose, &[i]);
                embed_real(&self.sample_interference(&mut rng))
            })
            .collect();
        let x = ndarray::Array2::from_shape_vec((rows, dim), flat).expect("row-major shape");
        Ok(Dataset::new(x, split, self.cfg.clone(), seed))
    }

    pub fn generate_splits(&self, counts: SplitCounts) -> Result<Splits> {
        Ok(Splits {
            train: self.generate_split(Split::Train, counts.train)?,
            validation: self.generate_split(Split::Validation, counts.validation)?,
            test: self.generate_split(Split::Test, counts.test)?,
        })
    }
}

//! Monte Carlo evaluation of the detector suite: per-detector threshold
//! calibration, false-alarm checks, Pd-vs-SNR sweeps, Doppler maps, the
//! timing benchmark and result export.
//!
//! Every trial owns a random stream keyed by `(purpose, SNR, bin, index)`,
//! so results do not depend on thread count or on which detectors are run
//! together.

pub mod bench;
pub mod export;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Dataset, Split};
use crate::detectors::{scm, tyler_fp, DetectorError, TylerOptions, WhitenedSteering};
use crate::drfm::{calibrate_threshold, DrfmDetector, DrfmError, Threshold};
use crate::linalg::ComplexVector;
use crate::scenario::{embed_real, unembed_real, Hypothesis, Scenario, ScenarioError};
use crate::streams::{real_key, stream, Purpose};

pub use bench::{bench, mean_per_sample_ms, published_reference_ms, BenchConfig, BenchEntry, BenchMode, BenchResult};
pub use export::{export_results, read_bench, read_doppler_maps, read_pd_curves, read_thresholds, ExportedFiles, Results, ThresholdRow};

/// Rows per D-RFM scoring batch.
const DRFM_CHUNK: usize = 512;

// secondary-data stream scopes
const SCOPE_SPLIT: u64 = 1;
const SCOPE_SWEEP: u64 = 2;
const SCOPE_BENCH: u64 = 3;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{detector}, trial {trial}: {source}")]
    Detector { detector: DetectorKind, trial: usize, source: DetectorError },
    #[error(transparent)]
    Drfm(#[from] DrfmError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("validation set is empty")]
    EmptyValidation,
    #[error("{0} has no threshold; calibrate first")]
    Uncalibrated(DetectorKind),
    #[error("D-RFM needs a trained model")]
    MissingModel,
    #[error("{0} needs secondary data but the trial carries none")]
    MissingSecondary(DetectorKind),
    #[error("invalid evaluation settings: {0}")]
    Invalid(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: std::path::PathBuf, source: std::io::Error },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("malformed results file: {0}")]
    Parse(String),
}

impl HarnessError {
    /// True when a Tyler iteration failed to converge.
    pub fn is_not_converged(&self) -> bool {
        matches!(self, HarnessError::Detector { source: DetectorError::NotConverged { .. }, .. })
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DetectorKind {
    #[serde(rename = "MF")]
    Mf,
    #[serde(rename = "NMF")]
    Nmf,
    #[serde(rename = "AMF-SCM")]
    AmfScm,
    #[serde(rename = "ANMF-SCM")]
    AnmfScm,
    #[serde(rename = "ANMF-FP")]
    AnmfFp,
    #[serde(rename = "D-RFM")]
    Drfm,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 6] =
        [DetectorKind::Mf, DetectorKind::Nmf, DetectorKind::AmfScm, DetectorKind::AnmfScm, DetectorKind::AnmfFp, DetectorKind::Drfm];

    pub const CLASSICAL: [DetectorKind; 5] =
        [DetectorKind::Mf, DetectorKind::Nmf, DetectorKind::AmfScm, DetectorKind::AnmfScm, DetectorKind::AnmfFp];

    pub fn name(self) -> &'static str {
        match self {
            DetectorKind::Mf => "MF",
            DetectorKind::Nmf => "NMF",
            DetectorKind::AmfScm => "AMF-SCM",
            DetectorKind::AnmfScm => "ANMF-SCM",
            DetectorKind::AnmfFp => "ANMF-FP",
            DetectorKind::Drfm => "D-RFM",
        }
    }

    /// Adaptive detectors estimate the covariance from secondary data.
    pub fn needs_secondary(self) -> bool {
        matches!(self, DetectorKind::AmfScm | DetectorKind::AnmfScm | DetectorKind::AnmfFp)
    }

    /// The D-RFM score ignores the steering vector; every other statistic
    /// is matched to a Doppler bin.
    pub fn depends_on_doppler(self) -> bool {
        self != DetectorKind::Drfm
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DetectorKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase();
        Ok(match key.as_str() {
            "mf" => DetectorKind::Mf,
            "nmf" => DetectorKind::Nmf,
            "amfscm" => DetectorKind::AmfScm,
            "anmfscm" => DetectorKind::AnmfScm,
            "anmffp" => DetectorKind::AnmfFp,
            "drfm" => DetectorKind::Drfm,
            _ => return Err(HarnessError::Invalid(format!("unknown detector `{s}`"))),
        })
    }
}

/// Parses a comma-separated detector list, keeping the canonical order.
pub fn parse_detector_list(s: &str) -> Result<Vec<DetectorKind>> {
    let mut kinds = s.split(',').map(str::trim).filter(|t| !t.is_empty()).map(DetectorKind::from_str).collect::<Result<Vec<_>>>()?;
    if kinds.is_empty() {
        return Err(HarnessError::Invalid("empty detector list".into()));
    }
    kinds.sort();
    kinds.dedup();
    Ok(kinds)
}

/// Where adaptive detectors get their secondary data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SecondaryMode {
    /// A fresh block of `K` vectors for every trial.
    #[default]
    PerTrial,
    /// One block per scenario (the secondary split), shared by every trial.
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    pub secondary_mode: SecondaryMode,
    /// Secondary vectors per block (K).
    pub secondary_size: usize,
    pub tyler: TylerOptions,
    /// Spread trials over the rayon pool.
    pub parallel: bool,
}

impl EvalConfig {
    pub fn for_scenario(scenario: &Scenario) -> Self {
        Self {
            secondary_mode: SecondaryMode::PerTrial,
            secondary_size: scenario.config().default_secondary_size(),
            tyler: TylerOptions::default(),
            parallel: true,
        }
    }
}

/// One primary observation, with secondary data when adaptive detectors
/// are evaluated.
#[derive(Debug, Clone)]
pub struct Trial {
    pub y: ComplexVector,
    pub secondary: Option<Arc<Vec<ComplexVector>>>,
}

enum SecondarySource {
    None,
    PerTrial { k: usize },
    Fixed(Arc<Vec<ComplexVector>>),
}

impl SecondarySource {
    fn resolve(scenario: &Scenario, cfg: &EvalConfig, needed: bool) -> Result<Self> {
        if !needed {
            return Ok(SecondarySource::None);
        }
        if cfg.secondary_size == 0 {
            return Err(HarnessError::Invalid("secondary size must be positive".into()));
        }
        Ok(match cfg.secondary_mode {
            SecondaryMode::PerTrial => SecondarySource::PerTrial { k: cfg.secondary_size },
            SecondaryMode::Fixed => SecondarySource::Fixed(Arc::new(fixed_secondary_block(scenario, cfg.secondary_size)?)),
        })
    }

    fn block(&self, scenario: &Scenario, key: &[u64]) -> Result<Option<Arc<Vec<ComplexVector>>>> {
        Ok(match self {
            SecondarySource::None => None,
            SecondarySource::Fixed(z) => Some(Arc::clone(z)),
            SecondarySource::PerTrial { k } => {
                let mut rng = stream(scenario.config().seed, Purpose::Secondary, key);
                Some(Arc::new(scenario.sample_secondary(*k, &mut rng)?.z))
            }
        })
    }
}

/// The shared block of [`SecondaryMode::Fixed`]: the first `k` rows of the
/// secondary split.
pub fn fixed_secondary_block(scenario: &Scenario, k: usize) -> Result<Vec<ComplexVector>> {
    let data = scenario.generate_split(Split::Secondary, k)?;
    data.x.rows().into_iter().map(|r| Ok(unembed_real(r.as_slice().expect("standard layout"))?)).collect()
}

fn map_indices<T: Send>(count: usize, parallel: bool, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    if parallel {
        (0..count).into_par_iter().map(f).collect()
    } else {
        (0..count).map(f).collect()
    }
}

/// H0 trials whose primaries are exactly the rows of `split` as produced by
/// [`Scenario::generate_split`].
pub fn h0_trials(scenario: &Scenario, split: Split, count: usize, with_secondary: bool, cfg: &EvalConfig) -> Result<Vec<Trial>> {
    let source = SecondarySource::resolve(scenario, cfg, with_secondary)?;
    let seed = scenario.config().seed;
    map_indices(count, cfg.parallel, |i| {
        let y = scenario.sample_interference(&mut stream(seed, split.purpose(), &[i as u64]));
        let secondary = source.block(scenario, &[SCOPE_SPLIT, split.tag() as u64, i as u64])?;
        Ok(Trial { y, secondary })
    })
}

/// H0 trials from a stored dataset. Secondary blocks use the same streams
/// as [`h0_trials`].
pub fn h0_trials_from_dataset(data: &Dataset, scenario: &Scenario, with_secondary: bool, cfg: &EvalConfig) -> Result<Vec<Trial>> {
    if data.dim() != scenario.config().embedded_dim() {
        return Err(HarnessError::Invalid(format!(
            "dataset has {} columns, scenario expects {}",
            data.dim(),
            scenario.config().embedded_dim()
        )));
    }
    let source = SecondarySource::resolve(scenario, cfg, with_secondary)?;
    let tag = data.split.tag() as u64;
    map_indices(data.rows(), cfg.parallel, |i| {
        let row = data.x.row(i);
        let y = unembed_real(row.as_slice().expect("standard layout"))?;
        let secondary = source.block(scenario, &[SCOPE_SPLIT, tag, i as u64])?;
        Ok(Trial { y, secondary })
    })
}

fn h1_trials_for(
    scenario: &Scenario,
    purpose: Purpose,
    scope: u64,
    snr_db: f64,
    d: f64,
    count: usize,
    source: &SecondarySource,
    parallel: bool,
) -> Result<Vec<Trial>> {
    let seed = scenario.config().seed;
    let (sk, dk) = (real_key(snr_db), real_key(d));
    map_indices(count, parallel, |t| {
        let mut rng = stream(seed, purpose, &[sk, dk, t as u64]);
        let y = scenario.sample_observation(Hypothesis::H1, snr_db, d, &mut rng)?.y;
        let secondary = source.block(scenario, &[scope, sk, dk, t as u64])?;
        Ok(Trial { y, secondary })
    })
}

/// Fresh H1 trials at `(snr_db, d)` from the sweep streams.
pub fn h1_trials(scenario: &Scenario, snr_db: f64, d: f64, count: usize, with_secondary: bool, cfg: &EvalConfig) -> Result<Vec<Trial>> {
    let source = SecondarySource::resolve(scenario, cfg, with_secondary)?;
    h1_trials_for(scenario, Purpose::Sweep, SCOPE_SWEEP, snr_db, d, count, &source, cfg.parallel)
}

/// A detector bound to its fixed inputs: steering vector for one Doppler
/// bin, the known covariance (MF, NMF) or the trained field (D-RFM), and
/// its threshold once calibrated.
#[derive(Debug, Clone)]
pub struct DetectorHandle {
    kind: DetectorKind,
    doppler_bin: f64,
    steering: ComplexVector,
    known: Option<WhitenedSteering>,
    model: Option<Arc<DrfmDetector>>,
    tyler: TylerOptions,
    threshold: Option<Threshold>,
}

impl DetectorHandle {
    /// A classical detector at bin `d`.
    pub fn classical(kind: DetectorKind, scenario: &Scenario, d: f64, tyler: TylerOptions) -> Result<Self> {
        if kind == DetectorKind::Drfm {
            return Err(HarnessError::MissingModel);
        }
        let steering = scenario.steering(d);
        let known = match kind {
            DetectorKind::Mf | DetectorKind::Nmf => Some(
                WhitenedSteering::from_factor(scenario.total_factor().clone(), &steering)
                    .map_err(|source| HarnessError::Detector { detector: kind, trial: 0, source })?,
            ),
            _ => None,
        };
        Ok(Self { kind, doppler_bin: d, steering, known, model: None, tyler, threshold: None })
    }

    /// D-RFM; picks up the model's threshold if it has one.
    pub fn drfm(model: Arc<DrfmDetector>, scenario: &Scenario, d: f64) -> Self {
        let threshold = model.threshold;
        Self {
            kind: DetectorKind::Drfm,
            doppler_bin: d,
            steering: scenario.steering(d),
            known: None,
            model: Some(model),
            tyler: TylerOptions::default(),
            threshold,
        }
    }

    /// The same detector matched to bin `d`. Doppler-dependent detectors
    /// lose their threshold and must be recalibrated.
    pub fn at_doppler(&self, scenario: &Scenario, d: f64) -> Result<Self> {
        match &self.model {
            Some(model) => {
                let mut h = Self::drfm(Arc::clone(model), scenario, d);
                h.threshold = self.threshold;
                Ok(h)
            }
            None => Self::classical(self.kind, scenario, d, self.tyler),
        }
    }

    pub fn kind(&self) -> DetectorKind {
        self.kind
    }

    pub fn doppler_bin(&self) -> f64 {
        self.doppler_bin
    }

    pub fn threshold(&self) -> Option<&Threshold> {
        self.threshold.as_ref()
    }

    pub fn set_threshold(&mut self, threshold: Threshold) {
        self.threshold = Some(threshold);
    }

    pub fn model(&self) -> Option<&Arc<DrfmDetector>> {
        self.model.as_ref()
    }

    fn classical_statistic(&self, trial: &Trial) -> std::result::Result<f64, DetectorError> {
        if let Some(ws) = &self.known {
            return match self.kind {
                DetectorKind::Mf => ws.mf(&trial.y),
                _ => ws.nmf(&trial.y),
            };
        }
        let z = trial.secondary.as_deref().ok_or_else(|| DetectorError::Domain(format!("{} needs secondary data", self.kind)))?;
        let estimate = match self.kind {
            DetectorKind::AnmfFp => tyler_fp(z, self.tyler)?,
            _ => scm(z)?,
        };
        let ws = WhitenedSteering::new(&estimate.matrix, &self.steering)?;
        match self.kind {
            DetectorKind::AmfScm => ws.mf(&trial.y),
            _ => ws.nmf(&trial.y),
        }
    }

    /// The detection statistic of every trial, in order.
    pub fn statistics(&self, trials: &[Trial], parallel: bool) -> Result<Vec<f64>> {
        if self.kind.needs_secondary() && trials.iter().any(|t| t.secondary.is_none()) {
            return Err(HarnessError::MissingSecondary(self.kind));
        }
        if let Some(model) = &self.model {
            let dim = 2 * self.steering.len();
            let score = |chunk: &[Trial]| -> Result<Vec<f64>> {
                let mut x = Array2::zeros((chunk.len(), dim));
                for (mut row, t) in x.rows_mut().into_iter().zip(chunk) {
                    row.assign(&ndarray::ArrayView1::from(&embed_real(&t.y)));
                }
                Ok(model.scores(x.view())?)
            };
            let parts: Vec<Vec<f64>> = if parallel {
                trials.par_chunks(DRFM_CHUNK).map(score).collect::<Result<_>>()?
            } else {
                trials.chunks(DRFM_CHUNK).map(score).collect::<Result<_>>()?
            };
            return Ok(parts.concat());
        }
        map_indices(trials.len(), parallel, |i| {
            self.classical_statistic(&trials[i]).map_err(|source| HarnessError::Detector { detector: self.kind, trial: i, source })
        })
    }

    pub fn statistic(&self, trial: &Trial) -> Result<f64> {
        Ok(self.statistics(std::slice::from_ref(trial), false)?[0])
    }

    pub fn decide(&self, statistic: f64) -> Result<Hypothesis> {
        Ok(self.threshold.ok_or(HarnessError::Uncalibrated(self.kind))?.decide(statistic))
    }
}

/// Handles for `kinds` at bin `d`. D-RFM requires `model`.
pub fn build_handles(
    kinds: &[DetectorKind],
    scenario: &Scenario,
    model: Option<Arc<DrfmDetector>>,
    d: f64,
    tyler: TylerOptions,
) -> Result<Vec<DetectorHandle>> {
    kinds
        .iter()
        .map(|&k| match k {
            DetectorKind::Drfm => model.clone().map(|m| DetectorHandle::drfm(m, scenario, d)).ok_or(HarnessError::MissingModel),
            _ => DetectorHandle::classical(k, scenario, d, tyler),
        })
        .collect()
}

/// λ = the `⌈(1 − pfa)·M⌉`-th smallest H0 statistic.
pub fn calibrate(handle: &mut DetectorHandle, h0_validation: &[Trial], pfa: f64, parallel: bool) -> Result<Threshold> {
    if h0_validation.is_empty() {
        return Err(HarnessError::EmptyValidation);
    }
    let stats = handle.statistics(h0_validation, parallel)?;
    let threshold = calibrate_threshold(&stats, pfa)?;
    handle.threshold = Some(threshold);
    Ok(threshold)
}

pub fn calibrate_all(handles: &mut [DetectorHandle], h0_validation: &[Trial], pfa: f64, parallel: bool) -> Result<Vec<Threshold>> {
    handles.iter_mut().map(|h| calibrate(h, h0_validation, pfa, parallel)).collect()
}

/// Fraction of `h0_test` declared H1.
pub fn measure_pfa(handle: &DetectorHandle, h0_test: &[Trial], parallel: bool) -> Result<f64> {
    if h0_test.is_empty() {
        return Err(HarnessError::Invalid("no test trials".into()));
    }
    let threshold = handle.threshold.ok_or(HarnessError::Uncalibrated(handle.kind))?;
    let stats = handle.statistics(h0_test, parallel)?;
    let alarms = stats.iter().filter(|&&s| threshold.decide(s) == Hypothesis::H1).count();
    Ok(alarms as f64 / h0_test.len() as f64)
}

const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score 95% interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let (kf, nf) = (k as f64, n as f64);
    let p = kf / nf;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = Z95 / denom * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    // the bounds are exactly 0 and 1 at the extremes; avoid round-off residue
    let lo = if k == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if k == n { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

pub fn wilson_halfwidth(k: u64, n: u64) -> f64 {
    let (lo, hi) = wilson_interval(k, n);
    0.5 * (hi - lo)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdCurve {
    pub detector: DetectorKind,
    pub scenario: String,
    pub doppler_bin: f64,
    pub snr_grid_db: Vec<f64>,
    pub pd: Vec<f64>,
    pub trials_per_point: usize,
    pub ci95_halfwidth: Vec<f64>,
}

impl PdCurve {
    pub fn from_counts(detector: DetectorKind, scenario: &str, d: f64, snr_grid_db: &[f64], detections: &[u64], trials: usize) -> Self {
        let n = trials as u64;
        Self {
            detector,
            scenario: scenario.to_string(),
            doppler_bin: d,
            snr_grid_db: snr_grid_db.to_vec(),
            pd: detections.iter().map(|&k| k as f64 / trials as f64).collect(),
            trials_per_point: trials,
            ci95_halfwidth: detections.iter().map(|&k| wilson_halfwidth(k, n)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.snr_grid_db.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snr_grid_db.is_empty()
    }

    pub fn detections(&self, i: usize) -> u64 {
        (self.pd[i] * self.trials_per_point as f64).round() as u64
    }

    pub fn wilson_interval(&self, i: usize) -> (f64, f64) {
        wilson_interval(self.detections(i), self.trials_per_point as u64)
    }

    /// Pd at a grid SNR, if present.
    pub fn pd_at(&self, snr_db: f64) -> Option<f64> {
        self.snr_grid_db.iter().position(|&s| s == snr_db).map(|i| self.pd[i])
    }
}

fn check_sweep(handles: &[DetectorHandle], trials: usize) -> Result<f64> {
    let first = handles.first().ok_or_else(|| HarnessError::Invalid("no detectors".into()))?;
    if trials == 0 {
        return Err(HarnessError::Invalid("trials must be positive".into()));
    }
    if handles.iter().any(|h| h.doppler_bin.to_bits() != first.doppler_bin.to_bits()) {
        return Err(HarnessError::Invalid("handles are matched to different Doppler bins".into()));
    }
    for h in handles {
        h.threshold.ok_or(HarnessError::Uncalibrated(h.kind))?;
    }
    Ok(first.doppler_bin)
}

/// Pd curves for several handles sharing one Doppler bin. All handles see
/// the same trials at each SNR point.
pub fn pd_sweep_many(handles: &[DetectorHandle], scenario: &Scenario, snr_grid_db: &[f64], trials: usize, cfg: &EvalConfig) -> Result<Vec<PdCurve>> {
    let d = check_sweep(handles, trials)?;
    let source = SecondarySource::resolve(scenario, cfg, handles.iter().any(|h| h.kind.needs_secondary()))?;
    let mut counts = vec![Vec::with_capacity(snr_grid_db.len()); handles.len()];
    for &snr in snr_grid_db {
        let batch = h1_trials_for(scenario, Purpose::Sweep, SCOPE_SWEEP, snr, d, trials, &source, cfg.parallel)?;
        for (h, c) in handles.iter().zip(counts.iter_mut()) {
            let lambda = h.threshold.expect("checked").lambda;
            let stats = h.statistics(&batch, cfg.parallel)?;
            c.push(stats.iter().filter(|&&s| s > lambda).count() as u64);
        }
    }
    let name = scenario.config().clutter.short_name();
    Ok(handles.iter().zip(&counts).map(|(h, c)| PdCurve::from_counts(h.kind, name, d, snr_grid_db, c, trials)).collect())
}

pub fn pd_sweep(handle: &DetectorHandle, scenario: &Scenario, snr_grid_db: &[f64], trials: usize, cfg: &EvalConfig) -> Result<PdCurve> {
    Ok(pd_sweep_many(std::slice::from_ref(handle), scenario, snr_grid_db, trials, cfg)?.remove(0))
}

/// Pd over Doppler bins × SNR; one [`PdCurve`] per bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DopplerMap {
    pub detector: DetectorKind,
    pub scenario: String,
    pub rows: Vec<PdCurve>,
}

impl DopplerMap {
    pub fn bins(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.doppler_bin).collect()
    }

    pub fn snr_grid_db(&self) -> &[f64] {
        self.rows.first().map(|r| r.snr_grid_db.as_slice()).unwrap_or(&[])
    }

    pub fn min_pd_at(&self, snr_db: f64) -> Option<f64> {
        self.rows.iter().map(|r| r.pd_at(snr_db)).collect::<Option<Vec<_>>>()?.into_iter().reduce(f64::min)
    }
}

/// Sweeps every handle at each bin in `bins`. Doppler-dependent detectors
/// are recalibrated per bin on `h0_validation`; D-RFM keeps its threshold.
#[allow(clippy::too_many_arguments)]
pub fn doppler_maps(
    handles: &[DetectorHandle],
    scenario: &Scenario,
    bins: &[f64],
    snr_grid_db: &[f64],
    trials: usize,
    pfa: f64,
    h0_validation: &[Trial],
    cfg: &EvalConfig,
) -> Result<Vec<DopplerMap>> {
    let name = scenario.config().clutter.short_name();
    let mut maps: Vec<DopplerMap> =
        handles.iter().map(|h| DopplerMap { detector: h.kind, scenario: name.to_string(), rows: Vec::with_capacity(bins.len()) }).collect();
    for &d in bins {
        let mut at_bin = handles.iter().map(|h| h.at_doppler(scenario, d)).collect::<Result<Vec<_>>>()?;
        for h in at_bin.iter_mut().filter(|h| h.threshold.is_none()) {
            calibrate(h, h0_validation, pfa, cfg.parallel)?;
        }
        for (map, curve) in maps.iter_mut().zip(pd_sweep_many(&at_bin, scenario, snr_grid_db, trials, cfg)?) {
            map.rows.push(curve);
        }
    }
    Ok(maps)
}

pub fn doppler_map(
    handle: &DetectorHandle,
    scenario: &Scenario,
    bins: &[f64],
    snr_grid_db: &[f64],
    trials: usize,
    pfa: f64,
    h0_validation: &[Trial],
    cfg: &EvalConfig,
) -> Result<DopplerMap> {
    Ok(doppler_maps(std::slice::from_ref(handle), scenario, bins, snr_grid_db, trials, pfa, h0_validation, cfg)?.remove(0))
}

/// Integer grid `lo, lo + 1, …, hi`.
pub fn integer_grid(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(f64::from).collect()
}

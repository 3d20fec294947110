//! Per-sample detection timing.
//!
//! For each SNR point `i` of `S`, `N` observations are generated untimed,
//! then the statistics and threshold decisions for all of them are timed as
//! `T_i`. The reported figure is `t̄ = (1/S) Σ T_i / N`.

use std::hint::black_box;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{h1_trials_for, integer_grid, DetectorHandle, DetectorKind, EvalConfig, HarnessError, Result, SecondaryMode, SecondarySource, Trial, SCOPE_BENCH};
use crate::detectors::{scm, tyler_fp, WhitenedSteering};
use crate::linalg::ComplexVector;
use crate::scenario::Scenario;
use crate::streams::{real_key, stream, Purpose};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchMode {
    /// Adaptive detectors estimate the covariance once per SNR point.
    Amortized,
    /// Adaptive detectors estimate the covariance for every sample.
    PerSample,
}

impl BenchMode {
    pub fn name(self) -> &'static str {
        match self {
            BenchMode::Amortized => "amortized",
            BenchMode::PerSample => "per_sample",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "amortized" => Some(BenchMode::Amortized),
            "per_sample" => Some(BenchMode::PerSample),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub samples_per_snr: usize,
    pub snr_grid_db: Vec<f64>,
    pub doppler_bin: f64,
    /// Untimed samples run once per detector before measuring.
    pub warmup: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self { samples_per_snr: 1000, snr_grid_db: integer_grid(0, 20), doppler_bin: 0.0, warmup: 32 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchEntry {
    pub detector: DetectorKind,
    pub mode: BenchMode,
    /// `T_i` in seconds, one per SNR point.
    pub per_snr_secs: Vec<f64>,
    /// `t̄` in milliseconds.
    pub mean_ms: f64,
    pub samples_per_snr: usize,
    pub snr_points: usize,
    pub reference_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub entries: Vec<BenchEntry>,
    pub cpu_context: String,
}

impl BenchResult {
    pub fn get(&self, detector: DetectorKind, mode: BenchMode) -> Option<&BenchEntry> {
        self.entries.iter().find(|e| e.detector == detector && e.mode == mode)
    }
}

/// `t̄ = (1/S) Σ_i T_i / N`, in milliseconds.
pub fn mean_per_sample_ms(per_snr_secs: &[f64], samples_per_snr: usize) -> f64 {
    if per_snr_secs.is_empty() || samples_per_snr == 0 {
        return 0.0;
    }
    let s = per_snr_secs.len() as f64;
    1e3 * per_snr_secs.iter().map(|t| t / samples_per_snr as f64).sum::<f64>() / s
}

/// Average per-sample times published alongside the method, in ms.
pub fn published_reference_ms(kind: DetectorKind) -> Option<f64> {
    match kind {
        DetectorKind::Mf => Some(0.0516),
        DetectorKind::Nmf => Some(0.1376),
        DetectorKind::AmfScm => Some(0.0970),
        DetectorKind::AnmfScm => None,
        DetectorKind::AnmfFp => Some(1.9255),
        DetectorKind::Drfm => Some(0.0209),
    }
}

fn cpu_context() -> String {
    let cpus = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    format!("{}-{} logical_cpus={cpus} bench_threads=1", std::env::consts::ARCH, std::env::consts::OS)
}

/// Runs `h` over `trials`, estimating the covariance once from `block` for
/// adaptive detectors. Returns the detection count.
fn run_amortized(h: &DetectorHandle, trials: &[Trial], block: &[ComplexVector]) -> Result<usize> {
    let lambda = h.threshold.ok_or(HarnessError::Uncalibrated(h.kind))?.lambda;
    if !h.kind.needs_secondary() {
        return Ok(h.statistics(trials, false)?.into_iter().filter(|&s| s > lambda).count());
    }
    let wrap = |source| HarnessError::Detector { detector: h.kind, trial: 0, source };
    let estimate = match h.kind {
        DetectorKind::AnmfFp => tyler_fp(block, h.tyler),
        _ => scm(block),
    }
    .map_err(wrap)?;
    let ws = WhitenedSteering::new(&estimate.matrix, &h.steering).map_err(wrap)?;
    let mut hits = 0;
    for (i, t) in trials.iter().enumerate() {
        let s = match h.kind {
            DetectorKind::AmfScm => ws.mf(&t.y),
            _ => ws.nmf(&t.y),
        }
        .map_err(|source| HarnessError::Detector { detector: h.kind, trial: i, source })?;
        hits += usize::from(s > lambda);
    }
    Ok(hits)
}

fn run_per_sample(h: &DetectorHandle, trials: &[Trial]) -> Result<usize> {
    let lambda = h.threshold.ok_or(HarnessError::Uncalibrated(h.kind))?.lambda;
    Ok(h.statistics(trials, false)?.into_iter().filter(|&s| s > lambda).count())
}

/// Times every handle in both modes. Runs on the calling thread only.
pub fn bench(handles: &[DetectorHandle], scenario: &Scenario, cfg: &BenchConfig, eval: &EvalConfig) -> Result<BenchResult> {
    if cfg.samples_per_snr == 0 || cfg.snr_grid_db.is_empty() {
        return Err(HarnessError::Invalid("benchmark needs samples and SNR points".into()));
    }
    for h in handles {
        h.threshold.ok_or(HarnessError::Uncalibrated(h.kind))?;
    }
    let d = cfg.doppler_bin;
    let adaptive = handles.iter().any(|h| h.kind.needs_secondary());
    let per_trial = EvalConfig { secondary_mode: SecondaryMode::PerTrial, parallel: false, ..*eval };
    let source = SecondarySource::resolve(scenario, &per_trial, adaptive)?;
    let modes = [BenchMode::Amortized, BenchMode::PerSample];
    let mut totals = vec![vec![Vec::with_capacity(cfg.snr_grid_db.len()); modes.len()]; handles.len()];

    let warm = h1_trials_for(scenario, Purpose::Bench, SCOPE_BENCH, cfg.snr_grid_db[0], d, cfg.warmup.max(1), &source, false)?;
    let warm_block = warm.first().and_then(|t| t.secondary.clone());
    for h in handles {
        black_box(run_per_sample(h, &warm)?);
        if let Some(b) = &warm_block {
            black_box(run_amortized(h, &warm, b)?);
        }
    }

    for &snr in &cfg.snr_grid_db {
        let trials = h1_trials_for(scenario, Purpose::Bench, SCOPE_BENCH, snr, d, cfg.samples_per_snr, &source, false)?;
        let block = if adaptive {
            let mut rng = stream(scenario.config().seed, Purpose::Secondary, &[SCOPE_BENCH, real_key(snr), real_key(d), u64::MAX]);
            scenario.sample_secondary(eval.secondary_size, &mut rng)?.z
        } else {
            Vec::new()
        };
        for (h, per_mode) in handles.iter().zip(totals.iter_mut()) {
            for (mode, out) in modes.iter().zip(per_mode.iter_mut()) {
                let start = Instant::now();
                let hits = match mode {
                    BenchMode::Amortized => run_amortized(h, &trials, &block)?,
                    BenchMode::PerSample => run_per_sample(h, &trials)?,
                };
                out.push(start.elapsed().as_secs_f64());
                black_box(hits);
            }
        }
    }

    let mut entries = Vec::with_capacity(handles.len() * modes.len());
    for (mi, &mode) in modes.iter().enumerate() {
        for (h, per_mode) in handles.iter().zip(&totals) {
            let per_snr_secs = per_mode[mi].clone();
            entries.push(BenchEntry {
                detector: h.kind,
                mode,
                mean_ms: mean_per_sample_ms(&per_snr_secs, cfg.samples_per_snr),
                per_snr_secs,
                samples_per_snr: cfg.samples_per_snr,
                snr_points: cfg.snr_grid_db.len(),
                reference_ms: published_reference_ms(h.kind),
            });
        }
    }
    Ok(BenchResult { entries, cpu_context: cpu_context() })
}

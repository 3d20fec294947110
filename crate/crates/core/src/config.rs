//! Run configuration: one JSON document covering every pipeline stage.
//!
//! Every key is optional and defaults to the published experimental
//! setup, so `{}` reproduces the reference pipeline. Unknown keys are
//! rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::drfm::IntegrationConfig;
use crate::flow::{NetArchitecture, TrainConfig};
use crate::harness::{integer_grid, SecondaryMode};
use crate::scenario::{ClutterKind, ScenarioConfig, SplitCounts};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config {path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationConfig {
    /// Integer SNR grid `snr_min_db..=snr_max_db` for Pd curves and maps.
    pub snr_min_db: i32,
    pub snr_max_db: i32,
    pub trials: usize,
    pub pfa: f64,
    /// Doppler bins for maps; `null` means `0..N`.
    pub doppler_bins: Option<Vec<f64>>,
    /// Bin used by `evaluate` and `bench`.
    pub doppler_bin: f64,
    pub secondary_mode: SecondaryMode,
    /// K; `null` means `2N`.
    pub secondary_size: Option<usize>,
    pub bench_samples: usize,
    pub bench_snr_min_db: i32,
    pub bench_snr_max_db: i32,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        Self {
            snr_min_db: -20,
            snr_max_db: 19,
            trials: 5000,
            pfa: 0.01,
            doppler_bins: None,
            doppler_bin: 0.0,
            secondary_mode: SecondaryMode::PerTrial,
            secondary_size: None,
            bench_samples: 1000,
            bench_snr_min_db: 0,
            bench_snr_max_db: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    pub data_dir: PathBuf,
    pub checkpoint_dir: PathBuf,
    pub out_dir: PathBuf,
}

impl Default for PathsConfig {
    fn default() -> Self {
        Self { data_dir: "data".into(), checkpoint_dir: "checkpoints".into(), out_dir: "results".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    pub splits: SplitCounts,
    pub train: TrainConfig,
    pub arch: NetArchitecture,
    pub integration: IntegrationConfig,
    pub evaluation: EvaluationConfig,
    pub paths: PathsConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        let scenario = ScenarioConfig::default();
        Self {
            arch: NetArchitecture::default_for(scenario.embedded_dim()),
            scenario,
            splits: SplitCounts::default(),
            train: TrainConfig::default(),
            integration: IntegrationConfig::default(),
            evaluation: EvaluationConfig::default(),
            paths: PathsConfig::default(),
        }
    }
}

impl RunConfig {
    /// Reads and validates a config file.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        let text = if text.trim().is_empty() { "{}" } else { text.as_str() };
        let cfg: Self = serde_json::from_str(text).map_err(|source| ConfigError::Parse { path: path.to_path_buf(), source })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        self.scenario.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.train.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.arch.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let n = self.scenario.n_pulses;
        if self.arch.data_dim() != self.scenario.embedded_dim() {
            return bad(format!("arch data dimension {} does not match 2N = {}", self.arch.data_dim(), self.scenario.embedded_dim()));
        }
        if self.splits.train == 0 || self.splits.validation == 0 || self.splits.test == 0 {
            return bad("split sizes must be positive".into());
        }
        if self.integration.steps == 0 {
            return bad("integration.steps must be positive".into());
        }
        let e = &self.evaluation;
        if e.snr_min_db > e.snr_max_db || e.bench_snr_min_db > e.bench_snr_max_db {
            return bad("SNR ranges must have min <= max".into());
        }
        if e.trials == 0 || e.bench_samples == 0 {
            return bad("trial counts must be positive".into());
        }
        if !(e.pfa > 0.0 && e.pfa < 1.0) {
            return bad(format!("pfa must lie in (0, 1), got {}", e.pfa));
        }
        let in_range = |d: f64| d.is_finite() && (0.0..n as f64).contains(&d);
        if !in_range(e.doppler_bin) || e.doppler_bins.as_ref().is_some_and(|b| b.is_empty() || !b.iter().all(|&d| in_range(d))) {
            return bad(format!("Doppler bins must lie in [0, {n})"));
        }
        if self.secondary_size() < n {
            return bad(format!("secondary_size {} is below N = {n}", self.secondary_size()));
        }
        Ok(())
    }

    pub fn secondary_size(&self) -> usize {
        self.evaluation.secondary_size.unwrap_or_else(|| self.scenario.default_secondary_size())
    }

    pub fn snr_grid(&self) -> Vec<f64> {
        integer_grid(self.evaluation.snr_min_db, self.evaluation.snr_max_db)
    }

    pub fn bench_snr_grid(&self) -> Vec<f64> {
        integer_grid(self.evaluation.bench_snr_min_db, self.evaluation.bench_snr_max_db)
    }

    pub fn doppler_bins(&self) -> Vec<f64> {
        self.evaluation.doppler_bins.clone().unwrap_or_else(|| (0..self.scenario.n_pulses).map(|d| d as f64).collect())
    }

    /// Short directory name for the clutter family.
    pub fn scenario_slug(&self) -> &'static str {
        match self.scenario.clutter {
            ClutterKind::GaussianHomogeneous => "gaussian",
            ClutterKind::CompoundGaussian { .. } => "compound",
        }
    }

    pub fn data_dir(&self) -> PathBuf {
        self.paths.data_dir.join(self.scenario_slug())
    }

    pub fn checkpoint_path(&self) -> PathBuf {
        self.paths.checkpoint_dir.join(self.scenario_slug()).join("drfm.rfn")
    }

    pub fn out_dir(&self) -> PathBuf {
        self.paths.out_dir.join(self.scenario_slug())
    }

    /// Pretty JSON of the defaults, for help output.
    pub fn defaults_json() -> String {
        serde_json::to_string_pretty(&Self::default()).expect("config serialises")
    }
}

//! `RFN1` checkpoint files.
//!
//! Layout (little endian): magic `RFN1`, u32 version, u64 header length,
//! UTF-8 JSON header, the parameters as raw f64 in layer order (each
//! layer's `(out, in)` weights row-major, then its bias), and finally a u64
//! checksum: the first eight bytes of SHA-256 over the parameter payload.

use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::mlp::{MlpParams, NetArchitecture};
use super::train::{losses_digest, TrainConfig, TrainReport};
use crate::fsutil::atomic_write;
use crate::scenario::ScenarioConfig;

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"RFN1";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("malformed checkpoint: {0}")]
    Format(String),
    #[error("unsupported checkpoint version {0}")]
    Version(u32),
    #[error("parameter checksum mismatch (stored {stored:016x}, computed {computed:016x})")]
    Digest { stored: u64, computed: u64 },
    #[error("checkpoint architecture {found:?} does not match requested {expected:?}")]
    ArchitectureMismatch { expected: NetArchitecture, found: NetArchitecture },
    #[error("bad checkpoint header: {0}")]
    Header(#[from] serde_json::Error),
}

/// Calibrated CFAR threshold as stored in a checkpoint header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdRecord {
    pub lambda: f64,
    pub pfa_target: f64,
    pub calibration_size: usize,
    pub scenario_digest: String,
    /// Euler steps the scores were computed with.
    pub integration_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointHeader {
    pub architecture: NetArchitecture,
    pub train_config: TrainConfig,
    pub seed: u64,
    pub epoch_losses: Vec<f64>,
    pub epoch_losses_digest: String,
    pub params_digest: String,
    #[serde(default)]
    pub scenario: Option<ScenarioConfig>,
    #[serde(default)]
    pub threshold: Option<ThresholdRecord>,
}

impl CheckpointHeader {
    pub fn new(arch: &NetArchitecture, cfg: &TrainConfig, report: &TrainReport, scenario: Option<ScenarioConfig>) -> Self {
        Self {
            architecture: arch.clone(),
            train_config: cfg.clone(),
            seed: cfg.seed,
            epoch_losses: report.epoch_losses.clone(),
            epoch_losses_digest: losses_digest(&report.epoch_losses),
            params_digest: report.params_digest.clone(),
            scenario,
            threshold: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub header: CheckpointHeader,
    pub params: MlpParams,
}

fn payload_checksum(payload: &[u8]) -> u64 {
    let digest = Sha256::digest(payload);
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Result<Vec<u8>, CheckpointError> {
        if !self.params.matches(&self.header.architecture) {
            return Err(CheckpointError::ArchitectureMismatch {
                expected: self.header.architecture.clone(),
                found: self.params.architecture(),
            });
        }
        let header = serde_json::to_vec(&self.header)?;
        let payload: Vec<u8> = self.params.to_flat().iter().flat_map(|v| v.to_le_bytes()).collect();
        let mut out = Vec::with_capacity(16 + header.len() + payload.len() + 8);
        out.extend_from_slice(CHECKPOINT_MAGIC);
        out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        out.extend_from_slice(&(header.len() as u64).to_le_bytes());
        out.extend_from_slice(&header);
        out.extend_from_slice(&payload);
        out.extend_from_slice(&payload_checksum(&payload).to_le_bytes());
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CheckpointError> {
        let truncated = || CheckpointError::Format("truncated file".into());
        if bytes.len() < 16 {
            return Err(truncated());
        }
        if &bytes[..4] != CHECKPOINT_MAGIC {
            return Err(CheckpointError::Format("bad magic".into()));
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
        if version != CHECKPOINT_VERSION {
            return Err(CheckpointError::Version(version));
        }
        let header_len = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
        let header_end = 16usize.checked_add(usize::try_from(header_len).map_err(|_| truncated())?).ok_or_else(truncated)?;
        if bytes.len() < header_end {
            return Err(truncated());
        }
        let header: CheckpointHeader = serde_json::from_slice(&bytes[16..header_end])?;
        header.architecture.validate().map_err(|e| CheckpointError::Format(e.to_string()))?;
        let payload_len = header.architecture.parameter_count() * 8;
        if bytes.len() != header_end + payload_len + 8 {
            return Err(truncated());
        }
        let payload = &bytes[header_end..header_end + payload_len];
        let stored = u64::from_le_bytes(bytes[header_end + payload_len..].try_into().unwrap());
        let computed = payload_checksum(payload);
        if stored != computed {
            return Err(CheckpointError::Digest { stored, computed });
        }
        let flat: Vec<f64> = payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        let params = MlpParams::from_flat(&header.architecture, &flat).map_err(|e| CheckpointError::Format(e.to_string()))?;
        Ok(Self { header, params })
    }
}

pub fn save_checkpoint(checkpoint: &Checkpoint, path: &Path) -> Result<(), CheckpointError> {
    let bytes = checkpoint.to_bytes()?;
    atomic_write(path, &bytes).map_err(|source| CheckpointError::Io { path: path.to_path_buf(), source })
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint, CheckpointError> {
    let bytes = std::fs::read(path).map_err(|source| CheckpointError::Io { path: path.to_path_buf(), source })?;
    Checkpoint::from_bytes(&bytes)
}

/// Loads and insists on a particular architecture.
pub fn load_checkpoint_expecting(path: &Path, arch: &NetArchitecture) -> Result<Checkpoint, CheckpointError> {
    let ck = load_checkpoint(path)?;
    if &ck.header.architecture != arch {
        return Err(CheckpointError::ArchitectureMismatch { expected: arch.clone(), found: ck.header.architecture });
    }
    Ok(ck)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::train::params_digest;
    use crate::streams::{stream, Purpose};
    use rand::Rng;

    fn sample(hidden: Vec<usize>) -> Checkpoint {
        let arch = NetArchitecture::for_data_dim(6, hidden);
        let params = MlpParams::init(&arch, &mut stream(3, Purpose::Misc, &[]));
        let report = TrainReport { epoch_losses: vec![12.5, 3.25, 1.0 / 3.0], wall_time_secs: 0.5, params_digest: params_digest(&params) };
        Checkpoint { header: CheckpointHeader::new(&arch, &TrainConfig::default(), &report, None), params }
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.rfn");
        let ck = sample(vec![16, 16]);
        save_checkpoint(&ck, &path).unwrap();
        let back = load_checkpoint(&path).unwrap();
        assert_eq!(back, ck);
        let mut r = stream(9, Purpose::Misc, &[]);
        for _ in 0..20 {
            let x: Vec<f64> = (0..6).map(|_| r.random::<f64>() * 4.0 - 2.0).collect();
            let t = r.random::<f64>();
            let a = ck.params.forward(&x, t).unwrap();
            let b = back.params.forward(&x, t).unwrap();
            assert!(a.iter().zip(&b).all(|(u, v)| u.to_bits() == v.to_bits()));
        }
    }

    #[test]
    fn truncated_file_is_an_error() {
        let bytes = sample(vec![8]).to_bytes().unwrap();
        for cut in [3, 15, 40, bytes.len() - 9, bytes.len() - 1] {
            assert!(Checkpoint::from_bytes(&bytes[..cut]).is_err(), "cut at {cut}");
        }
    }

    #[test]
    fn corrupted_payload_fails_checksum() {
        let mut bytes = sample(vec![8]).to_bytes().unwrap();
        let n = bytes.len();
        bytes[n - 20] ^= 0x40;
        assert!(matches!(Checkpoint::from_bytes(&bytes), Err(CheckpointError::Digest { .. })));
    }

    #[test]
    fn version_checked() {
        let mut bytes = sample(vec![8]).to_bytes().unwrap();
        bytes[4] = 9;
        assert!(matches!(Checkpoint::from_bytes(&bytes), Err(CheckpointError::Version(9))));
    }

    #[test]
    fn architecture_mismatch_detected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("big.rfn");
        let arch = NetArchitecture::for_data_dim(32, vec![256, 256]);
        let params = MlpParams::zeros(&arch);
        let report = TrainReport { epoch_losses: vec![], wall_time_secs: 0.0, params_digest: params_digest(&params) };
        save_checkpoint(&Checkpoint { header: CheckpointHeader::new(&arch, &TrainConfig::default(), &report, None), params }, &path).unwrap();
        let want = NetArchitecture::for_data_dim(32, vec![128, 128]);
        assert!(matches!(load_checkpoint_expecting(&path, &want), Err(CheckpointError::ArchitectureMismatch { .. })));
        assert!(load_checkpoint_expecting(&path, &arch).is_ok());
    }
}

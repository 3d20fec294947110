//! Real-embedded observation matrices and their on-disk formats.
//!
//! Binary layout (`RFD1`, little endian):
//!
//! | bytes | field |
//! |-------|-------|
//! | 4     | magic `RFD1` |
//! | 4     | u32 version (1) |
//! | 4     | u32 N |
//! | 4     | u32 D |
//! | 8     | u64 row count |
//! | 8     | u64 seed |
//! | 1     | u8 split tag (0 train, 1 validation, 2 test) |
//! | rows·D·4 | row-major f32 payload |
//!
//! The scenario configuration lives next to the file in `<stem>.meta.json`.

use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fsutil::atomic_write;
use crate::scenario::ScenarioConfig;
use crate::streams::Purpose;

pub const DATASET_MAGIC: &[u8; 4] = b"RFD1";
pub const DATASET_VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 4 + 4 + 8 + 8 + 1;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("bad dataset file: {0}")]
    Format(String),
    #[error("bad metadata sidecar: {0}")]
    Meta(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, DatasetError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Validation,
    Test,
    /// Target-free secondary data for adaptive detectors.
    Secondary,
}

impl Split {
    pub fn tag(self) -> u8 {
        match self {
            Split::Train => 0,
            Split::Validation => 1,
            Split::Test => 2,
            Split::Secondary => 3,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Split::Train),
            1 => Some(Split::Validation),
            2 => Some(Split::Test),
            3 => Some(Split::Secondary),
            _ => None,
        }
    }

    /// Stream purpose whose `[i]` stream produces row `i` of this split.
    pub fn purpose(self) -> Purpose {
        match self {
            Split::Train => Purpose::TrainSplit,
            Split::Validation => Purpose::ValidationSplit,
            Split::Test => Purpose::TestSplit,
            Split::Secondary => Purpose::Secondary,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
            Split::Secondary => "secondary",
        }
    }
}

/// Rows are samples, columns are `[Re{y}; Im{y}]`, `D = 2N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Array2<f64>,
    pub split: Split,
    pub config_snapshot: ScenarioConfig,
    pub creation_seed: u64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Sidecar {
    config: ScenarioConfig,
    split: Split,
    rows: u64,
    creation_seed: u64,
}

impl Dataset {
    pub fn new(x: Array2<f64>, split: Split, config_snapshot: ScenarioConfig, creation_seed: u64) -> Self {
        debug_assert_eq!(x.ncols(), config_snapshot.embedded_dim());
        Self { x, split, config_snapshot, creation_seed }
    }

    pub fn rows(&self) -> usize {
        self.x.nrows()
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    pub fn n_pulses(&self) -> usize {
        self.dim() / 2
    }

    /// Path of the JSON sidecar that accompanies a dataset file.
    pub fn sidecar_path(path: &Path) -> PathBuf {
        path.with_extension("meta.json")
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.x.len() * 4);
        out.extend_from_slice(DATASET_MAGIC);
        out.extend_from_slice(&DATASET_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.n_pulses() as u32).to_le_bytes());
        out.extend_from_slice(&(self.dim() as u32).to_le_bytes());
        out.extend_from_slice(&(self.rows() as u64).to_le_bytes());
        out.extend_from_slice(&self.creation_seed.to_le_bytes());
        out.push(self.split.tag());
        for v in self.x.iter() {
            out.extend_from_slice(&(*v as f32).to_le_bytes());
        }
        out
    }

    /// Parses the binary body; the configuration comes from elsewhere.
    pub fn from_bytes(bytes: &[u8], config: ScenarioConfig) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(DatasetError::Format("truncated header".into()));
        }
        if &bytes[..4] != DATASET_MAGIC {
            return Err(DatasetError::Format("bad magic".into()));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let version = u32_at(4);
        if version != DATASET_VERSION {
            return Err(DatasetError::Format(format!("unsupported version {version}")));
        }
        let n = u32_at(8) as usize;
        let d = u32_at(12) as usize;
        let rows = u64_at(16) as usize;
        let seed = u64_at(24);
        let split = Split::from_tag(bytes[32]).ok_or_else(|| DatasetError::Format(format!("bad split tag {}", bytes[32])))?;
        if d != 2 * n {
            return Err(DatasetError::Format(format!("D = {d} is not 2N for N = {n}")));
        }
        if n != config.n_pulses {
            return Err(DatasetError::Format(format!("file N = {n} disagrees with metadata N = {}", config.n_pulses)));
        }
        let expected = rows
            .checked_mul(d)
            .and_then(|c| c.checked_mul(4))
            .ok_or_else(|| DatasetError::Format("row count overflow".into()))?;
        let payload = &bytes[HEADER_LEN..];
        if payload.len() != expected {
            return Err(DatasetError::Format(format!("payload is {} bytes, expected {expected}", payload.len())));
        }
        let values: Vec<f64> = payload
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
            .collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(DatasetError::Format("non-finite value in payload".into()));
        }
        let x = Array2::from_shape_vec((rows, d), values).expect("length checked");
        Ok(Self { x, split, config_snapshot: config, creation_seed: seed })
    }

    /// Writes the binary file and its sidecar, each atomically.
    pub fn save(&self, path: &Path) -> Result<()> {
        let io_err = |p: &Path| {
            let p = p.to_path_buf();
            move |source| DatasetError::Io { path: p, source }
        };
        atomic_write(path, &self.to_bytes()).map_err(io_err(path))?;
        let sidecar = Sidecar {
            config: self.config_snapshot.clone(),
            split: self.split,
            rows: self.rows() as u64,
            creation_seed: self.creation_seed,
        };
        let meta = Self::sidecar_path(path);
        let mut json = serde_json::to_vec_pretty(&sidecar)?;
        json.push(b'\n');
        atomic_write(&meta, &json).map_err(io_err(&meta))?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let meta = Self::sidecar_path(path);
        let sidecar: Sidecar = serde_json::from_slice(
            &std::fs::read(&meta).map_err(|source| DatasetError::Io { path: meta.clone(), source })?,
        )?;
        let mut bytes = Vec::new();
        std::fs::File::open(path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|source| DatasetError::Io { path: path.to_path_buf(), source })?;
        let ds = Self::from_bytes(&bytes, sidecar.config)?;
        if ds.split != sidecar.split || ds.rows() as u64 != sidecar.rows || ds.creation_seed != sidecar.creation_seed {
            return Err(DatasetError::Format("sidecar disagrees with file header".into()));
        }
        Ok(ds)
    }

    /// CSV with header `re_0..re_{N-1},im_0..im_{N-1}`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let n = self.n_pulses();
        let mut w = csv::Writer::from_writer(writer);
        let header: Vec<String> = (0..n).map(|i| format!("re_{i}")).chain((0..n).map(|i| format!("im_{i}"))).collect();
        w.write_record(&header)?;
        for row in self.x.rows() {
            w.write_record(row.iter().map(|v| v.to_string()))?;
        }
        w.flush().map_err(|source| DatasetError::Io { path: PathBuf::from("<csv>"), source })?;
        Ok(())
    }
}

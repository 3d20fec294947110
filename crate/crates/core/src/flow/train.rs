use std::time::Instant;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::adam::{adam_step, AdamState};
use super::mlp::{gradients, FlowBatch, MlpParams, NetArchitecture};
use super::{FlowError, Result};
use crate::dataset::Dataset;
use crate::streams::{stream, Purpose};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { learning_rate: 1e-3, batch_size: 128, epochs: 170, seed: 7 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) || self.batch_size == 0 || self.epochs == 0 {
            return Err(FlowError::Config(format!(
                "learning rate, batch size and epochs must be positive (got {}, {}, {})",
                self.learning_rate, self.batch_size, self.epochs
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Sample-weighted mean loss of each epoch.
    pub epoch_losses: Vec<f64>,
    pub wall_time_secs: f64,
    /// Hex SHA-256 of the flattened final parameters.
    pub params_digest: String,
}

/// Hex SHA-256 over the little-endian bytes of the flattened parameters.
pub fn params_digest(params: &MlpParams) -> String {
    let mut h = Sha256::new();
    for v in params.to_flat() {
        h.update(v.to_le_bytes());
    }
    hex_string(&h.finalize())
}

pub(crate) fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Hex SHA-256 of a loss history.
pub fn losses_digest(losses: &[f64]) -> String {
    let mut h = Sha256::new();
    for v in losses {
        h.update(v.to_le_bytes());
    }
    hex_string(&h.finalize())
}

pub fn train(data: &Dataset, arch: &NetArchitecture, cfg: &TrainConfig) -> Result<(MlpParams, TrainReport)> {
    train_matrix(data.x.view(), arch, cfg, |_, _| {})
}

/// Trains on the rows of `data`. `on_epoch` receives `(epoch, mean loss)`.
///
/// Each epoch shuffles the rows, then for every minibatch draws fresh
/// latent points `x₀ ~ N(0, I)` and per-sample times `t ~ U[0, 1]`.
pub fn train_matrix(
    data: ArrayView2<f64>,
    arch: &NetArchitecture,
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(usize, f64),
) -> Result<(MlpParams, TrainReport)> {
    arch.validate()?;
    cfg.validate()?;
    let (rows, d) = data.dim();
    if rows == 0 {
        return Err(FlowError::Config("training set is empty".into()));
    }
    if d != arch.data_dim() {
        return Err(FlowError::Shape(format!("dataset has {d} columns, architecture expects {}", arch.data_dim())));
    }
    let start = Instant::now();
    let mut params = MlpParams::init(arch, &mut stream(cfg.seed, Purpose::WeightInit, &[]));
    let mut state = AdamState::new(&params);
    let mut order: Vec<usize> = (0..rows).collect();
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut stream(cfg.seed, Purpose::Shuffle, &[epoch as u64]));
        let mut noise = stream(cfg.seed, Purpose::FlowNoise, &[epoch as u64]);
        let mut total = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let b = chunk.len();
            let x1 = data.select(Axis(0), chunk);
            let x0 = Array2::from_shape_simple_fn((b, d), || noise.sample::<f64, _>(StandardNormal));
            let t = Array1::from_shape_simple_fn(b, || noise.random::<f64>());
            let batch = FlowBatch::new(x0, x1, t)?;
            let (loss, grads) = gradients(&params, &batch)?;
            adam_step(&mut params, &grads, &mut state, cfg.learning_rate)?;
            total += loss * b as f64;
        }
        let mean = total / rows as f64;
        if !mean.is_finite() {
            return Err(FlowError::Diverged { epoch });
        }
        on_epoch(epoch, mean);
        epoch_losses.push(mean);
    }

    let report = TrainReport {
        epoch_losses,
        wall_time_secs: start.elapsed().as_secs_f64(),
        params_digest: params_digest(&params),
    };
    Ok((params, report))
}

//! The rectified-flow velocity network: model, loss, gradients, optimizer,
//! training loop and checkpoints.

pub mod adam;
pub mod checkpoint;
pub mod mlp;
pub mod train;

use thiserror::Error;

pub use adam::{adam_step, AdamState};
pub use checkpoint::{load_checkpoint, load_checkpoint_expecting, save_checkpoint, Checkpoint, CheckpointError, CheckpointHeader, ThresholdRecord};
pub use mlp::{gradients, interpolate, rfm_loss, FlowBatch, MlpParams, NetArchitecture};
pub use train::{train, train_matrix, TrainConfig, TrainReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("empty batch")]
    EmptyBatch,
    #[error("invalid architecture: {0}")]
    Architecture(String),
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error("training diverged at epoch {epoch}")]
    Diverged { epoch: usize },
}

pub type Result<T> = std::result::Result<T, FlowError>;

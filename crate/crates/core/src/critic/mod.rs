//! Ensemble cost critic: network, training, tabular oracle and checkpoints.

use thiserror::Error;

pub mod checkpoint;
pub mod ensemble;
pub mod network;
pub mod tabular;
pub mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use ensemble::{CriticEnsemble, Prediction};
pub use network::{Adam, QNetwork};
pub use tabular::{exact_cost_q, TabularCmdp};
pub use train::{td_target, train, LossTrace, TargetSync, TrainConfig, TransitionDataset, TransitionSample};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CriticError {
    #[error("invalid critic config: {0}")]
    Config(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("training dataset is empty")]
    EmptyDataset,
    #[error("non-finite loss {loss} in member {member} at epoch {epoch}")]
    NonFinite { member: usize, epoch: usize, loss: f64 },
    #[error("not a critic checkpoint (bad magic)")]
    BadMagic,
    #[error("checkpoint version {found}, expected {expected}")]
    Version { found: u32, expected: u32 },
    #[error("checkpoint is truncated")]
    Truncated,
    #[error("i/o error: {0}")]
    Io(String),
}

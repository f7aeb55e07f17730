//! Multi-task aesthetic scoring: network, loss, datasets, training and metrics.

mod config;
pub mod dataset;
mod loss;
pub mod metrics;
mod network;
mod scores;
pub mod train;

pub use config::{BlockSpec, HeadsMode, NetworkConfig, STEM_STRIDE};
pub use dataset::{DatasetManifest, DatasetRecord};
pub use loss::{loss_gradient, multi_task_loss};
pub use metrics::{average_ranks, metrics_from_predictions, spearman, EvalReport, MetricError};
pub use network::{image_tensor, AestheticNet, ForwardCache, ModelInput};
pub use scores::{display_score, AestheticScores, Attribute};
pub use train::{evaluate, evaluate_samples, train, train_on_samples, Sample, TrainingReport};

use thiserror::Error;

use crate::image::ImageError;
use crate::nn::NnError;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("invalid scores: {0}")]
    InvalidScores(String),
    #[error("empty dataset: {0}")]
    EmptyDataset(String),
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

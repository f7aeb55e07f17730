//! f64 tensor stack with explicit forward and backward passes.
//!
//! There is no autodiff graph: every layer exposes a forward function and a
//! backward function that takes the cached forward input plus the upstream
//! gradient. All arithmetic is f64 so finite-difference checks stay tight.

mod activation;
pub mod checkpoint;
mod conv;
mod dense;
pub mod gradcheck;
mod optim;
mod residual;
pub mod spp;
mod tensor;

pub use activation::{logistic, logistic_backward, relu, relu_backward, sigmoid};
pub use checkpoint::Checkpoint;
pub use conv::{conv2d, conv2d_backward, ConvGrad, ConvParams};
pub use dense::{dense, dense_backward, DenseGrad, DenseParams};
pub use optim::{GradientStore, Sgd};
pub use residual::{residual_block, ResidualBlock, ResidualCache, ResidualGrad};
pub use spp::{spp_backward, spp_pool};
pub use tensor::Tensor;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NnError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("input too small: {0}")]
    TooSmall(String),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("training diverged: non-finite gradient")]
    Diverged,
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

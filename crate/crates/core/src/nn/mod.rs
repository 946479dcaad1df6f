//! Minimal reverse-mode differentiable layer stack with Adam.

mod adam;
pub mod gradcheck;
mod layer;
mod network;
mod tensor;

use thiserror::Error;

pub use adam::{adam_step, AdamState};
pub use layer::{
    Activation, ActivationKind, BatchNorm, BilinearUpsample, Conv2d, Dense, Layer, BATCHNORM_EPS,
    LEAKY_RELU_SLOPE,
};
pub use network::{init_network, LayerSpec, Network, NetworkSpec};
pub use tensor::Tensor;

#[derive(Debug, Error)]
pub enum NnError {
    #[error("invalid network spec: {0}")]
    InvalidSpec(String),
    #[error("layer {layer}: expected {expected}, got shape {got:?}")]
    ShapeMismatch {
        layer: usize,
        expected: String,
        got: Vec<usize>,
    },
    #[error("output gradient has {got} values, expected {expected}")]
    GradShape { expected: usize, got: usize },
    #[error("layer {layer} produced a non-finite value")]
    NonFinite { layer: usize },
    #[error("backward called without a preceding forward")]
    NoForward,
    #[error("tensor data length {len} does not match shape {shape:?}")]
    BadTensor { shape: Vec<usize>, len: usize },
}

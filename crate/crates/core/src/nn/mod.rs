//! Dense double-precision networks with hand-written reverse passes.

mod adam;
pub mod gradcheck;
mod matrix;
mod mlp;
mod params;

use thiserror::Error;

pub use adam::{AdamConfig, AdamState, Parameters};
pub use matrix::Matrix;
pub use mlp::{Linear, Mlp, MlpCache};
pub use params::{NetKey, ParamStore, HIDDEN_WIDTH, UPDATE_INPUT_DIM};

#[derive(Debug, Error)]
pub enum NnError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("parameter and gradient shapes differ: {0:?} vs {1:?}")]
    ShapeMismatch((usize, usize), (usize, usize)),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

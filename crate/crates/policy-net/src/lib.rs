//! Minimal neural stack for scale-constrained multi-agent actors.
//!
//! Four pieces: dense 2-D [`Tensor`]s with shared arithmetic kernels, a
//! reverse-mode autodiff [`Tape`], small tanh [`Mlp`]s with orthogonal
//! initialization, and the [`DlbcActor`] — a trunk network shared across
//! agents plus per-agent deviation heads whose contribution is multiplied by
//! a diversity scale. Gaussian policy densities, Adam, and versioned JSON
//! checkpoints round it out.

mod actor;
mod checkpoint;
pub mod dist;
mod mlp;
mod optim;
mod tape;
pub mod tensor;

pub use actor::{ActorVars, Critic, DlbcActor, GaussianBatch};
pub use checkpoint::{
    LayerCheckpoint, MlpCheckpoint, PolicyCheckpoint, POLICY_CHECKPOINT_VERSION,
};
pub use mlp::{orthogonal, Linear, Mlp, MlpSpec, MlpVars};
pub use optim::{clip_global_norm, Adam};
pub use tape::{Tape, Var};
pub use tensor::Tensor;

use thiserror::Error;

/// Errors raised by the neural stack.
#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("{context}: expected shape {expected:?}, got {actual:?}")]
    ShapeMismatch {
        context: &'static str,
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("expected a scalar (1 x 1) tensor, got {rows} x {cols}")]
    NonScalar { rows: usize, cols: usize },

    #[error("unknown agent index {agent}, actor has {num_agents} agents")]
    UnknownAgent { agent: usize, num_agents: usize },

    #[error("checkpoint version {stored} is not supported (expected {expected})")]
    CheckpointVersion { stored: u32, expected: u32 },

    #[error("{0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Diversity(#[from] diversity_core::DiversityError),
}

pub type Result<T> = std::result::Result<T, PolicyError>;

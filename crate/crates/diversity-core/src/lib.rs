//! Numerical core for dual-level behavioral diversity control.
//!
//! Policies are diagonal Gaussians over a continuous action space. This crate
//! measures how far apart a set of such policies are — the Wasserstein-2
//! distance between pairs, averaged within groups of agents ([`snd_intra`])
//! and across groups ([`snd_inter`]) over a shared observation batch — and
//! turns those measurements into a single multiplicative scale factor
//! ([`compute_scale`]) that pins the mixed diversity level to a desired
//! target.
//!
//! Everything here is a pure function of its inputs; there is no interior
//! mutability and no global state, so concurrent use needs no coordination.

mod gaussian;
mod partition;
mod snapshot;
mod snd;

pub use gaussian::{w2_diag, w2_full, DiagGaussian};
pub use partition::GroupPartition;
pub use snapshot::{mean_pairwise_w2, AgentRow, PolicySnapshot};
pub use snd::{
    aggregate_inter, compute_scale, measure_snd, snd_inter, snd_intra, DlbcParams, SndReport,
};

use thiserror::Error;

/// Errors raised by the diversity metrics.
#[derive(Debug, Error)]
pub enum DiversityError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("standard deviation must be strictly positive and finite, got {value} at index {index}")]
    InvalidStd { index: usize, value: f64 },

    #[error("observation batch is empty")]
    EmptyBatch,

    #[error("agent group is empty")]
    EmptyGroup,

    #[error("agent {agent} appears in both groups; groups must be disjoint")]
    OverlappingGroups { agent: usize },

    #[error("agent {agent} listed more than once in a group")]
    DuplicateAgent { agent: usize },

    #[error("agent index {agent} out of range for {num_agents} agents")]
    AgentOutOfRange { agent: usize, num_agents: usize },

    #[error("matrix is not symmetric: |a[{row}][{col}] - a[{col}][{row}]| = {delta}")]
    NotSymmetric { row: usize, col: usize, delta: f64 },

    #[error("matrix is not positive semidefinite: eigenvalue {eigenvalue}")]
    NotPositiveSemidefinite { eigenvalue: f64 },

    #[error("need at least {required} groups, got {actual}")]
    TooFewGroups { required: usize, actual: usize },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, DiversityError>;

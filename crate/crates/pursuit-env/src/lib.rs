//! Continuous 2-D pursuit-evasion in a bounded square arena.
//!
//! `N` learning pursuers chase `M` heuristic evaders under double-integrator
//! physics: acceleration commands in `[-1, 1]^2`, damped velocities capped at
//! a per-role max speed, positions clamped at the walls (no bounce). Evaders
//! flee along the normalized sum of inverse-square repulsions from every
//! pursuer and from the four walls. Pursuers score a collision bonus for
//! every evader they overlap each step, minus dense shaping proportional to
//! the distance to their nearest evader.
//!
//! Every trajectory is a pure function of `(config, seed, action sequence)`.

mod config;
mod env;
mod trajectory;
mod world;

pub use config::EnvConfig;
pub use env::{compute_rewards, evader_policy, PursuitEnv, StepResult};
pub use trajectory::{read_trajectory, write_trajectory, TrajectoryRecord};
pub use world::{Vec2, WorldState};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("invalid environment config: {0}")]
    InvalidConfig(String),

    #[error("could not place {entity} without overlap after {attempts} attempts; arena too small")]
    PlacementFailed { entity: String, attempts: usize },

    #[error("expected {expected} pursuer actions, got {actual}")]
    ActionCount { expected: usize, actual: usize },

    #[error("non-finite action component for pursuer {agent}")]
    NonFiniteAction { agent: usize },

    #[error("trajectory I/O: {0}")]
    Io(#[from] std::io::Error),

    #[error("trajectory parse: {0}")]
    Parse(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, EnvError>;

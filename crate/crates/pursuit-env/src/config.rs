//! Environment configuration and validation.

use serde::{Deserialize, Serialize};

use crate::{EnvError, Result};

/// Full description of one pursuit-evasion scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnvConfig {
    pub num_pursuers: usize,
    pub num_evaders: usize,
    /// Arena spans `[-arena_half_width, arena_half_width]` on each axis.
    pub arena_half_width: f64,
    pub dt: f64,
    /// Per-step velocity retention, in (0, 1).
    pub damping: f64,
    pub pursuer_max_speed: f64,
    pub evader_max_speed: f64,
    pub pursuer_radius: f64,
    pub evader_radius: f64,
    /// Episode length; `done` turns true exactly when this many steps have
    /// elapsed since the last reset.
    pub max_steps: usize,
    /// Bonus per evader a pursuer overlaps in a step.
    pub collision_reward: f64,
    /// Dense shaping: each pursuer loses `shaping_coeff * distance to its
    /// nearest evader` every step.
    pub shaping_coeff: f64,
    /// Base seed used by [`crate::PursuitEnv::new`]'s initial reset.
    pub seed: u64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            num_pursuers: 5,
            num_evaders: 2,
            arena_half_width: 1.0,
            dt: 0.1,
            damping: 0.75,
            pursuer_max_speed: 1.0,
            evader_max_speed: 1.3,
            pursuer_radius: 0.075,
            evader_radius: 0.05,
            max_steps: 100,
            collision_reward: 10.0,
            shaping_coeff: 0.1,
            seed: 0,
        }
    }
}

impl EnvConfig {
    /// Default config for an `N` pursuers vs 2 evaders tier.
    pub fn tier(num_pursuers: usize) -> Self {
        Self {
            num_pursuers,
            ..Self::default()
        }
    }

    /// Observation length per pursuer: own position and velocity, relative
    /// position of every other pursuer, relative position and velocity of
    /// every evader.
    pub fn obs_dim(&self) -> usize {
        4 + 2 * (self.num_pursuers - 1) + 4 * self.num_evaders
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(EnvError::InvalidConfig(msg));
        if self.num_pursuers == 0 || self.num_evaders == 0 {
            return fail("need at least one pursuer and one evader".into());
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return fail(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return fail(format!("damping must lie in (0, 1), got {}", self.damping));
        }
        if !(self.arena_half_width > 0.0 && self.arena_half_width.is_finite()) {
            return fail(format!(
                "arena_half_width must be positive, got {}",
                self.arena_half_width
            ));
        }
        if !(self.pursuer_max_speed > 0.0) || !(self.evader_max_speed > 0.0) {
            return fail("max speeds must be positive".into());
        }
        if self.evader_max_speed <= self.pursuer_max_speed {
            return fail(format!(
                "evaders must be faster than pursuers for flee viability ({} vs {})",
                self.evader_max_speed, self.pursuer_max_speed
            ));
        }
        if !(self.pursuer_radius > 0.0) || !(self.evader_radius > 0.0) {
            return fail("radii must be positive".into());
        }
        if self.max_steps == 0 {
            return fail("max_steps must be at least 1".into());
        }
        if !self.collision_reward.is_finite() {
            return fail("collision_reward must be finite".into());
        }
        if !(self.shaping_coeff >= 0.0 && self.shaping_coeff.is_finite()) {
            return fail(format!(
                "shaping_coeff must be finite and nonnegative, got {}",
                self.shaping_coeff
            ));
        }
        Ok(())
    }
}

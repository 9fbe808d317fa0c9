//! World state and observation construction.

use serde::{Deserialize, Serialize};

use crate::EnvConfig;

/// A 2-D vector with just the arithmetic the simulator needs.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn add(self, other: Vec2) -> Vec2 {
        Vec2::new(self.x + other.x, self.y + other.y)
    }

    pub fn sub(self, other: Vec2) -> Vec2 {
        Vec2::new(self.x - other.x, self.y - other.y)
    }

    pub fn scale(self, factor: f64) -> Vec2 {
        Vec2::new(self.x * factor, self.y * factor)
    }

    pub fn div(self, divisor: f64) -> Vec2 {
        Vec2::new(self.x / divisor, self.y / divisor)
    }

    pub fn norm(self) -> f64 {
        (self.x * self.x + self.y * self.y).sqrt()
    }

    pub fn distance(self, other: Vec2) -> f64 {
        self.sub(other).norm()
    }

    /// Rescale to `max` if the norm exceeds it.
    pub fn clamp_norm(self, max: f64) -> Vec2 {
        let n = self.norm();
        if n > max {
            self.scale(max / n)
        } else {
            self
        }
    }

    pub fn clamp_components(self, lo: f64, hi: f64) -> Vec2 {
        Vec2::new(self.x.clamp(lo, hi), self.y.clamp(lo, hi))
    }
}

/// Positions and velocities of every entity plus the step counter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub pursuer_pos: Vec<Vec2>,
    pub pursuer_vel: Vec<Vec2>,
    pub evader_pos: Vec<Vec2>,
    pub evader_vel: Vec<Vec2>,
    pub step_count: usize,
}

impl WorldState {
    /// Observation for one pursuer: own position (2), own velocity (2),
    /// relative position of every other pursuer in ascending index order
    /// (2 each), then relative position and relative velocity of every
    /// evader (4 each).
    pub fn observation(&self, config: &EnvConfig, pursuer: usize) -> Vec<f64> {
        let mut obs = Vec::with_capacity(config.obs_dim());
        let own_pos = self.pursuer_pos[pursuer];
        let own_vel = self.pursuer_vel[pursuer];
        obs.extend([own_pos.x, own_pos.y, own_vel.x, own_vel.y]);
        for (other, pos) in self.pursuer_pos.iter().enumerate() {
            if other == pursuer {
                continue;
            }
            let rel = pos.sub(own_pos);
            obs.extend([rel.x, rel.y]);
        }
        for (pos, vel) in self.evader_pos.iter().zip(&self.evader_vel) {
            let rel_pos = pos.sub(own_pos);
            let rel_vel = vel.sub(own_vel);
            obs.extend([rel_pos.x, rel_pos.y, rel_vel.x, rel_vel.y]);
        }
        obs
    }

    pub fn observations(&self, config: &EnvConfig) -> Vec<Vec<f64>> {
        (0..self.pursuer_pos.len())
            .map(|i| self.observation(config, i))
            .collect()
    }
}

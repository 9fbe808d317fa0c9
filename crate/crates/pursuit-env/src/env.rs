//! Reset, step, evader heuristic, and rewards.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::world::{Vec2, WorldState};
use crate::{EnvConfig, EnvError, Result};

/// Guard against division by zero in inverse-square repulsions.
const MIN_DISTANCE: f64 = 1e-6;

/// Placement attempts per entity before reset gives up.
const MAX_PLACEMENT_ATTEMPTS: usize = 1000;

/// Outcome of one simulation step.
#[derive(Debug, Clone)]
pub struct StepResult {
    /// One observation vector per pursuer.
    pub observations: Vec<Vec<f64>>,
    /// One individual reward per pursuer.
    pub rewards: Vec<f64>,
    /// True exactly when the episode has run `max_steps` steps.
    pub done: bool,
    /// Number of overlapping (pursuer, evader) pairs this step.
    pub collisions: usize,
}

/// A single environment instance. Owns its state; many instances can run
/// side by side with no shared data.
#[derive(Debug, Clone)]
pub struct PursuitEnv {
    config: EnvConfig,
    state: WorldState,
}

impl PursuitEnv {
    /// Validate the config and perform an initial reset with `config.seed`.
    pub fn new(config: EnvConfig) -> Result<Self> {
        config.validate()?;
        let state = place_entities(&config, config.seed)?;
        Ok(Self { config, state })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn state(&self) -> &WorldState {
        &self.state
    }

    pub fn observations(&self) -> Vec<Vec<f64>> {
        self.state.observations(&self.config)
    }

    /// Re-place all entities uniformly at random without overlap, zero all
    /// velocities, reset the step counter. The same seed always produces the
    /// same state.
    pub fn reset(&mut self, seed: u64) -> Result<Vec<Vec<f64>>> {
        self.state = place_entities(&self.config, seed)?;
        Ok(self.observations())
    }

    /// Advance one time step.
    ///
    /// Pursuer accelerations are clamped componentwise to `[-1, 1]`; evader
    /// accelerations come from [`evader_policy`] on the pre-step state. Each
    /// entity then integrates `v <- damping * v + dt * a` (speed-capped) and
    /// `p <- p + dt * v` (position clamped to the arena). Collisions affect
    /// rewards only; there is no bounce.
    pub fn step(&mut self, actions: &[[f64; 2]]) -> Result<StepResult> {
        if actions.len() != self.config.num_pursuers {
            return Err(EnvError::ActionCount {
                expected: self.config.num_pursuers,
                actual: actions.len(),
            });
        }
        for (agent, a) in actions.iter().enumerate() {
            if !a[0].is_finite() || !a[1].is_finite() {
                return Err(EnvError::NonFiniteAction { agent });
            }
        }

        let evader_actions: Vec<Vec2> = (0..self.config.num_evaders)
            .map(|e| {
                let a = evader_policy(&self.config, &self.state, e);
                Vec2::new(a[0], a[1])
            })
            .collect();

        let cfg = &self.config;
        for (i, raw) in actions.iter().enumerate() {
            let accel = Vec2::new(raw[0], raw[1]).clamp_components(-1.0, 1.0);
            integrate(
                &mut self.state.pursuer_pos[i],
                &mut self.state.pursuer_vel[i],
                accel,
                cfg.pursuer_max_speed,
                cfg,
            );
        }
        for (e, accel) in evader_actions.into_iter().enumerate() {
            integrate(
                &mut self.state.evader_pos[e],
                &mut self.state.evader_vel[e],
                accel,
                cfg.evader_max_speed,
                cfg,
            );
        }
        self.state.step_count += 1;

        let rewards = compute_rewards(&self.config, &self.state);
        let collisions = count_collisions(&self.config, &self.state);
        Ok(StepResult {
            observations: self.observations(),
            rewards,
            done: self.state.step_count >= self.config.max_steps,
            collisions,
        })
    }
}

fn integrate(pos: &mut Vec2, vel: &mut Vec2, accel: Vec2, max_speed: f64, cfg: &EnvConfig) {
    *vel = vel.scale(cfg.damping).add(accel.scale(cfg.dt));
    *vel = vel.clamp_norm(max_speed);
    *pos = pos.add(vel.scale(cfg.dt));
    *pos = pos.clamp_components(-cfg.arena_half_width, cfg.arena_half_width);
}

fn place_entities(config: &EnvConfig, seed: u64) -> Result<WorldState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut positions: Vec<(Vec2, f64)> = Vec::new();

    let mut place = |radius: f64, label: &str, rng: &mut ChaCha8Rng| -> Result<Vec2> {
        let span = (config.arena_half_width - radius).max(0.0);
        for _ in 0..MAX_PLACEMENT_ATTEMPTS {
            let candidate = Vec2::new(rng.random_range(-span..=span), rng.random_range(-span..=span));
            let clear = positions
                .iter()
                .all(|&(other, other_r)| candidate.distance(other) >= radius + other_r);
            if clear {
                positions.push((candidate, radius));
                return Ok(candidate);
            }
        }
        Err(EnvError::PlacementFailed {
            entity: label.to_string(),
            attempts: MAX_PLACEMENT_ATTEMPTS,
        })
    };

    let mut pursuer_pos = Vec::with_capacity(config.num_pursuers);
    for i in 0..config.num_pursuers {
        pursuer_pos.push(place(config.pursuer_radius, &format!("pursuer {i}"), &mut rng)?);
    }
    let mut evader_pos = Vec::with_capacity(config.num_evaders);
    for e in 0..config.num_evaders {
        evader_pos.push(place(config.evader_radius, &format!("evader {e}"), &mut rng)?);
    }

    Ok(WorldState {
        pursuer_vel: vec![Vec2::ZERO; config.num_pursuers],
        evader_vel: vec![Vec2::ZERO; config.num_evaders],
        pursuer_pos,
        evader_pos,
        step_count: 0,
    })
}

/// Deterministic flee heuristic for one evader: the normalized sum of
/// inverse-square repulsions from every pursuer and from each of the four
/// walls, clipped to `[-1, 1]^2`.
pub fn evader_policy(config: &EnvConfig, state: &WorldState, evader: usize) -> [f64; 2] {
    let pos = state.evader_pos[evader];
    let mut total = Vec2::ZERO;

    for &p in &state.pursuer_pos {
        let away = pos.sub(p);
        let dist = away.norm().max(MIN_DISTANCE);
        // Unit direction away from the pursuer, inverse-square magnitude.
        total = total.add(away.div(dist * dist * dist));
    }

    let w = config.arena_half_width;
    let wall_terms = [
        (w - pos.x, Vec2::new(-1.0, 0.0)), // right wall pushes left
        (pos.x + w, Vec2::new(1.0, 0.0)),  // left wall pushes right
        (w - pos.y, Vec2::new(0.0, -1.0)), // top wall pushes down
        (pos.y + w, Vec2::new(0.0, 1.0)),  // bottom wall pushes up
    ];
    for (dist, inward) in wall_terms {
        let d = dist.max(MIN_DISTANCE);
        total = total.add(inward.div(d * d));
    }

    let norm = total.norm();
    let action = if norm > 1e-12 {
        total.div(norm)
    } else {
        Vec2::ZERO
    };
    let action = action.clamp_components(-1.0, 1.0);
    [action.x, action.y]
}

/// Individual pursuer rewards on a state: `+collision_reward` for every
/// evader the pursuer currently overlaps, minus
/// `shaping_coeff * distance to its nearest evader`.
pub fn compute_rewards(config: &EnvConfig, state: &WorldState) -> Vec<f64> {
    let touch = config.pursuer_radius + config.evader_radius;
    state
        .pursuer_pos
        .iter()
        .map(|&p| {
            let mut reward = 0.0;
            let mut nearest = f64::INFINITY;
            for &e in &state.evader_pos {
                let dist = p.distance(e);
                if dist < touch {
                    reward += config.collision_reward;
                }
                nearest = nearest.min(dist);
            }
            reward - config.shaping_coeff * nearest
        })
        .collect()
}

fn count_collisions(config: &EnvConfig, state: &WorldState) -> usize {
    let touch = config.pursuer_radius + config.evader_radius;
    state
        .pursuer_pos
        .iter()
        .map(|&p| {
            state
                .evader_pos
                .iter()
                .filter(|&&e| p.distance(e) < touch)
                .count()
        })
        .sum()
}

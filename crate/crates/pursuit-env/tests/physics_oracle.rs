//! Cross-check of the simulator against an independent scalar-by-scalar
//! reimplementation of the physics and the evader heuristic: plain `f64`
//! variables, no vector types, no shared helpers.

use pursuit_env::{EnvConfig, PursuitEnv};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct ScalarWorld {
    px: Vec<f64>,
    py: Vec<f64>,
    pvx: Vec<f64>,
    pvy: Vec<f64>,
    ex: Vec<f64>,
    ey: Vec<f64>,
    evx: Vec<f64>,
    evy: Vec<f64>,
}

fn scalar_evader_action(world: &ScalarWorld, cfg: &EnvConfig, e: usize) -> (f64, f64) {
    let (x, y) = (world.ex[e], world.ey[e]);
    let mut tx = 0.0;
    let mut ty = 0.0;
    for i in 0..cfg.num_pursuers {
        let dx = x - world.px[i];
        let dy = y - world.py[i];
        let dist = (dx * dx + dy * dy).sqrt().max(1e-6);
        tx += dx / (dist * dist * dist);
        ty += dy / (dist * dist * dist);
    }
    let w = cfg.arena_half_width;
    let d_right = (w - x).max(1e-6);
    tx += -1.0 / (d_right * d_right);
    let d_left = (x + w).max(1e-6);
    tx += 1.0 / (d_left * d_left);
    let d_top = (w - y).max(1e-6);
    ty += -1.0 / (d_top * d_top);
    let d_bottom = (y + w).max(1e-6);
    ty += 1.0 / (d_bottom * d_bottom);

    let norm = (tx * tx + ty * ty).sqrt();
    if norm > 1e-12 {
        tx /= norm;
        ty /= norm;
    } else {
        tx = 0.0;
        ty = 0.0;
    }
    (tx.clamp(-1.0, 1.0), ty.clamp(-1.0, 1.0))
}

fn scalar_integrate(
    x: &mut f64,
    y: &mut f64,
    vx: &mut f64,
    vy: &mut f64,
    ax: f64,
    ay: f64,
    max_speed: f64,
    cfg: &EnvConfig,
) {
    *vx = *vx * cfg.damping + ax * cfg.dt;
    *vy = *vy * cfg.damping + ay * cfg.dt;
    let speed = (*vx * *vx + *vy * *vy).sqrt();
    if speed > max_speed {
        *vx *= max_speed / speed;
        *vy *= max_speed / speed;
    }
    *x += *vx * cfg.dt;
    *y += *vy * cfg.dt;
    *x = x.clamp(-cfg.arena_half_width, cfg.arena_half_width);
    *y = y.clamp(-cfg.arena_half_width, cfg.arena_half_width);
}

fn scalar_rewards(world: &ScalarWorld, cfg: &EnvConfig) -> Vec<f64> {
    let touch = cfg.pursuer_radius + cfg.evader_radius;
    (0..cfg.num_pursuers)
        .map(|i| {
            let mut reward = 0.0;
            let mut nearest = f64::INFINITY;
            for e in 0..cfg.num_evaders {
                let dx = world.px[i] - world.ex[e];
                let dy = world.py[i] - world.ey[e];
                let dist = (dx * dx + dy * dy).sqrt();
                if dist < touch {
                    reward += cfg.collision_reward;
                }
                if dist < nearest {
                    nearest = dist;
                }
            }
            reward - cfg.shaping_coeff * nearest
        })
        .collect()
}

#[test]
fn hundred_step_trajectory_matches_scalar_reimplementation() {
    let cfg = EnvConfig {
        num_pursuers: 4,
        num_evaders: 2,
        ..EnvConfig::default()
    };
    let mut env = PursuitEnv::new(cfg.clone()).unwrap();
    env.reset(2024).unwrap();

    // Mirror the initial state into the scalar world.
    let state = env.state();
    let mut world = ScalarWorld {
        px: state.pursuer_pos.iter().map(|p| p.x).collect(),
        py: state.pursuer_pos.iter().map(|p| p.y).collect(),
        pvx: vec![0.0; cfg.num_pursuers],
        pvy: vec![0.0; cfg.num_pursuers],
        ex: state.evader_pos.iter().map(|p| p.x).collect(),
        ey: state.evader_pos.iter().map(|p| p.y).collect(),
        evx: vec![0.0; cfg.num_evaders],
        evy: vec![0.0; cfg.num_evaders],
    };

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for step in 0..100 {
        let actions: Vec<[f64; 2]> = (0..cfg.num_pursuers)
            .map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
            .collect();

        // Scalar world first (so it cannot peek at the env's new state).
        let evader_acts: Vec<(f64, f64)> = (0..cfg.num_evaders)
            .map(|e| scalar_evader_action(&world, &cfg, e))
            .collect();
        for i in 0..cfg.num_pursuers {
            let (mut x, mut y, mut vx, mut vy) = (world.px[i], world.py[i], world.pvx[i], world.pvy[i]);
            scalar_integrate(
                &mut x,
                &mut y,
                &mut vx,
                &mut vy,
                actions[i][0].clamp(-1.0, 1.0),
                actions[i][1].clamp(-1.0, 1.0),
                cfg.pursuer_max_speed,
                &cfg,
            );
            world.px[i] = x;
            world.py[i] = y;
            world.pvx[i] = vx;
            world.pvy[i] = vy;
        }
        for e in 0..cfg.num_evaders {
            let (mut x, mut y, mut vx, mut vy) = (world.ex[e], world.ey[e], world.evx[e], world.evy[e]);
            scalar_integrate(
                &mut x,
                &mut y,
                &mut vx,
                &mut vy,
                evader_acts[e].0,
                evader_acts[e].1,
                cfg.evader_max_speed,
                &cfg,
            );
            world.ex[e] = x;
            world.ey[e] = y;
            world.evx[e] = vx;
            world.evy[e] = vy;
        }
        let expected_rewards = scalar_rewards(&world, &cfg);

        let result = env.step(&actions).unwrap();
        let got = env.state();
        for i in 0..cfg.num_pursuers {
            assert!(
                (got.pursuer_pos[i].x - world.px[i]).abs() <= 1e-12,
                "step {step} pursuer {i} x"
            );
            assert!((got.pursuer_pos[i].y - world.py[i]).abs() <= 1e-12);
            assert!((got.pursuer_vel[i].x - world.pvx[i]).abs() <= 1e-12);
            assert!((got.pursuer_vel[i].y - world.pvy[i]).abs() <= 1e-12);
        }
        for e in 0..cfg.num_evaders {
            assert!(
                (got.evader_pos[e].x - world.ex[e]).abs() <= 1e-12,
                "step {step} evader {e} x"
            );
            assert!((got.evader_pos[e].y - world.ey[e]).abs() <= 1e-12);
        }
        for (a, b) in result.rewards.iter().zip(&expected_rewards) {
            assert!((a - b).abs() <= 1e-12, "step {step} rewards {a} vs {b}");
        }
    }
}

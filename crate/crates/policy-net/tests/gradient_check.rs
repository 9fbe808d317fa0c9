//! Central finite-difference validation of the autodiff path through a
//! realistic actor-critic style loss: Gaussian log-probs of sampled actions,
//! a clipped importance-ratio surrogate, a value MSE term, and an entropy
//! bonus, all on a two-hidden-layer network.

use policy_net::dist::{taped_entropy, taped_log_prob};
use policy_net::{Critic, DlbcActor, Tape, Tensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Fixture {
    actor: DlbcActor,
    critic: Critic,
    obs: Tensor,
    actions: Tensor,
    old_log_probs: Tensor,
    advantages: Tensor,
    returns: Tensor,
}

fn fixture(seed: u64) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let obs_dim = 4;
    let act_dim = 2;
    let batch = 6;

    let mut actor = DlbcActor::new(2, obs_dim, act_dim, &[5, 5], &[4], -0.4, &mut rng).unwrap();
    // Give the zero-initialized head output layers some mass so every
    // parameter participates in the loss.
    for p in actor.parameters_mut() {
        for v in p.data_mut() {
            *v += rng.random_range(-0.05..0.05);
        }
    }
    actor.set_scale(0.8);
    let critic = Critic::new(obs_dim, &[5, 5], &mut rng).unwrap();

    let mk = |rows: usize, cols: usize, rng: &mut ChaCha8Rng| {
        Tensor::from_vec(
            rows,
            cols,
            (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect(),
        )
        .unwrap()
    };
    let obs = mk(batch, obs_dim, &mut rng);
    let actions = mk(batch, act_dim, &mut rng);
    let old_log_probs = mk(batch, 1, &mut rng);
    let advantages = mk(batch, 1, &mut rng);
    let returns = mk(batch, 1, &mut rng);

    Fixture {
        actor,
        critic,
        obs,
        actions,
        old_log_probs,
        advantages,
        returns,
    }
}

/// Build the loss on a fresh tape; returns (loss value, per-parameter grads
/// flattened) with parameters ordered actor-then-critic.
fn loss_and_grads(fx: &Fixture, compute_grads: bool) -> (f64, Vec<f64>) {
    let mut tape = Tape::new();
    let actor_vars = fx.actor.bind(&mut tape);
    let critic_vars = fx.critic.bind(&mut tape);

    let obs = tape.constant(fx.obs.clone());
    let actions = tape.constant(fx.actions.clone());
    let old_lp = tape.constant(fx.old_log_probs.clone());
    let adv = tape.constant(fx.advantages.clone());
    let ret = tape.constant(fx.returns.clone());

    let mean = fx.actor.taped_mean(&mut tape, &actor_vars, 1, obs).unwrap();
    let log_prob = taped_log_prob(&mut tape, mean, actor_vars.log_std(), actions).unwrap();

    let diff = tape.sub(log_prob, old_lp).unwrap();
    let ratio = tape.exp(diff);
    let surr1 = tape.mul(ratio, adv).unwrap();
    let clipped = tape.clamp(ratio, 0.8, 1.2).unwrap();
    let surr2 = tape.mul(clipped, adv).unwrap();
    let surrogate = tape.min(surr1, surr2).unwrap();
    let mean_surr = tape.mean(surrogate);
    let policy_loss = tape.neg(mean_surr);

    let values = fx.critic.forward_taped(&mut tape, &critic_vars, obs).unwrap();
    let v_err = tape.sub(values, ret).unwrap();
    let v_sq = tape.mul(v_err, v_err).unwrap();
    let value_loss = tape.mean(v_sq);

    let entropy = taped_entropy(&mut tape, actor_vars.log_std());

    let v_term = tape.scale(value_loss, 0.5);
    let e_term = tape.scale(entropy, -0.01);
    let partial = tape.add(policy_loss, v_term).unwrap();
    let loss = tape.add(partial, e_term).unwrap();

    let loss_value = tape.value(loss).item().unwrap();
    if !compute_grads {
        return (loss_value, Vec::new());
    }
    tape.backward(loss).unwrap();

    let mut flat = Vec::new();
    for var in actor_vars.vars().into_iter().chain(critic_vars.vars()) {
        // Unused agents' heads never reach the loss; their gradient is zero.
        match tape.grad(var) {
            Some(grad) => flat.extend_from_slice(grad.data()),
            None => flat.extend(std::iter::repeat(0.0).take(tape.value(var).len())),
        }
    }
    (loss_value, flat)
}

fn flatten_params(fx: &Fixture) -> Vec<f64> {
    fx.actor
        .parameters()
        .into_iter()
        .chain(fx.critic.parameters())
        .flat_map(|t| t.data().to_vec())
        .collect()
}

fn write_params(fx: &mut Fixture, flat: &[f64]) {
    let mut offset = 0;
    for p in fx
        .actor
        .parameters_mut()
        .into_iter()
        .chain(fx.critic.parameters_mut())
    {
        let n = p.len();
        p.data_mut().copy_from_slice(&flat[offset..offset + n]);
        offset += n;
    }
    assert_eq!(offset, flat.len());
}

#[test]
fn analytic_gradients_match_central_finite_differences() {
    let mut fx = fixture(17);
    let (_, analytic) = loss_and_grads(&fx, true);
    let theta = flatten_params(&fx);
    assert_eq!(analytic.len(), theta.len());

    let h = 1e-5;
    let mut checked = 0;
    for i in 0..theta.len() {
        let mut plus = theta.clone();
        plus[i] += h;
        write_params(&mut fx, &plus);
        let (lp, _) = loss_and_grads(&fx, false);

        let mut minus = theta.clone();
        minus[i] -= h;
        write_params(&mut fx, &minus);
        let (lm, _) = loss_and_grads(&fx, false);

        let fd = (lp - lm) / (2.0 * h);
        let a = analytic[i];
        if a.abs() < 1e-8 && fd.abs() < 1e-8 {
            continue;
        }
        let rel = (a - fd).abs() / a.abs().max(fd.abs());
        assert!(
            rel <= 1e-4,
            "param {i}: analytic {a} vs finite-difference {fd} (rel {rel})"
        );
        checked += 1;
    }
    write_params(&mut fx, &theta);
    assert!(checked > 50, "too few informative entries: {checked}");
}

#[test]
fn gradients_are_deterministic_across_rebuilds() {
    let fx = fixture(99);
    let (l1, g1) = loss_and_grads(&fx, true);
    let (l2, g2) = loss_and_grads(&fx, true);
    assert_eq!(l1, l2);
    assert_eq!(g1, g2);
}

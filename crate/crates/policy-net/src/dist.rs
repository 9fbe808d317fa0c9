//! Diagonal-Gaussian densities: log-probability, entropy, and sampling, in
//! both plain and taped form.

use diversity_core::DiagGaussian;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

use crate::tape::{Tape, Var};
use crate::{PolicyError, Result};

fn ln_2pi() -> f64 {
    (2.0 * PI).ln()
}

/// Log density of `action` under a diagonal Gaussian:
/// `sum_d [-0.5 ln(2 pi) - ln sigma_d - 0.5 ((a_d - mu_d) / sigma_d)^2]`.
pub fn log_prob(dist: &DiagGaussian, action: &[f64]) -> Result<f64> {
    if action.len() != dist.dim() {
        return Err(PolicyError::ShapeMismatch {
            context: "log_prob",
            expected: (1, dist.dim()),
            actual: (1, action.len()),
        });
    }
    let mut total = 0.0;
    for ((a, mu), sigma) in action.iter().zip(dist.mean()).zip(dist.std()) {
        let z = (a - mu) / sigma;
        total += -0.5 * ln_2pi() - sigma.ln() - 0.5 * z * z;
    }
    Ok(total)
}

/// Differential entropy: `sum_d (0.5 + 0.5 ln(2 pi) + ln sigma_d)`.
pub fn entropy(dist: &DiagGaussian) -> f64 {
    dist.std()
        .iter()
        .map(|sigma| 0.5 + 0.5 * ln_2pi() + sigma.ln())
        .sum()
}

/// Draw `mu + sigma * eps` with `eps ~ N(0, I)`.
pub fn sample(dist: &DiagGaussian, rng: &mut impl Rng) -> Vec<f64> {
    dist.mean()
        .iter()
        .zip(dist.std())
        .map(|(mu, sigma)| {
            let eps: f64 = rng.sample(StandardNormal);
            mu + sigma * eps
        })
        .collect()
}

/// Taped per-sample log densities: `mean` is `B x d`, `log_std` is `1 x d`,
/// `actions` is a `B x d` constant. Returns a `B x 1` column, differentiable
/// w.r.t. the mean and the log-std.
pub fn taped_log_prob(tape: &mut Tape, mean: Var, log_std: Var, actions: Var) -> Result<Var> {
    let (batch, dim) = tape.value(mean).shape();
    if tape.value(actions).shape() != (batch, dim) {
        return Err(PolicyError::ShapeMismatch {
            context: "taped_log_prob",
            expected: (batch, dim),
            actual: tape.value(actions).shape(),
        });
    }
    if tape.value(log_std).shape() != (1, dim) {
        return Err(PolicyError::ShapeMismatch {
            context: "taped_log_prob",
            expected: (1, dim),
            actual: tape.value(log_std).shape(),
        });
    }
    let diff = tape.sub(actions, mean)?;
    let neg_log_std = tape.neg(log_std);
    let inv_std = tape.exp(neg_log_std);
    let z = tape.mul_row(diff, inv_std)?;
    let z_sq = tape.mul(z, z)?;
    let quad = tape.scale(z_sq, -0.5);
    let with_log_std = tape.add_row(quad, neg_log_std)?;
    let terms = tape.add_const(with_log_std, -0.5 * ln_2pi());
    Ok(tape.row_sum(terms))
}

/// Taped entropy of the shared distribution defined by `log_std (1 x d)`;
/// a `1 x 1` scalar.
pub fn taped_entropy(tape: &mut Tape, log_std: Var) -> Var {
    let dim = tape.value(log_std).cols() as f64;
    let total = tape.sum(log_std);
    tape.add_const(total, dim * (0.5 + 0.5 * ln_2pi()))
}

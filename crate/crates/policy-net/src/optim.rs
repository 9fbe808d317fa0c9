//! Adam and global gradient-norm clipping for the hand-rolled parameter
//! tensors.

use crate::tensor::Tensor;
use crate::{PolicyError, Result};

/// Adam with bias correction. Parameter identity is positional: the slice
/// passed to [`Adam::step`] must always list the same tensors in the same
/// order.
#[derive(Debug, Clone)]
pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    step_count: u64,
    first_moment: Vec<Vec<f64>>,
    second_moment: Vec<Vec<f64>>,
}

impl Adam {
    pub fn new(lr: f64, param_sizes: &[usize]) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step_count: 0,
            first_moment: param_sizes.iter().map(|&n| vec![0.0; n]).collect(),
            second_moment: param_sizes.iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    pub fn set_lr(&mut self, lr: f64) {
        self.lr = lr;
    }

    /// Apply one update. `grads[i]` of `None` is treated as a zero gradient
    /// for parameter `i` (moments still decay).
    pub fn step(&mut self, params: &mut [&mut Tensor], grads: &[Option<&Tensor>]) -> Result<()> {
        if params.len() != self.first_moment.len() || grads.len() != params.len() {
            return Err(PolicyError::InvalidArgument(format!(
                "optimizer tracks {} parameters, got {} params / {} grads",
                self.first_moment.len(),
                params.len(),
                grads.len()
            )));
        }
        self.step_count += 1;
        let bc1 = 1.0 - self.beta1.powi(self.step_count as i32);
        let bc2 = 1.0 - self.beta2.powi(self.step_count as i32);

        for ((param, grad), (m, v)) in params
            .iter_mut()
            .zip(grads)
            .zip(self.first_moment.iter_mut().zip(&mut self.second_moment))
        {
            if param.len() != m.len() {
                return Err(PolicyError::InvalidArgument(format!(
                    "parameter size changed: {} vs {}",
                    param.len(),
                    m.len()
                )));
            }
            for i in 0..m.len() {
                let g = grad.map_or(0.0, |t| t.data()[i]);
                m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * g;
                v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * g * g;
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                param.data_mut()[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
            }
        }
        Ok(())
    }
}

/// Scale `grads` in place so their joint L2 norm is at most `max_norm`
/// (no-op when `max_norm <= 0`). Returns the pre-clip norm.
pub fn clip_global_norm(grads: &mut [Tensor], max_norm: f64) -> f64 {
    let sum_sq: f64 = grads
        .iter()
        .map(|g| g.iter().map(|v| v * v).sum::<f64>())
        .sum();
    let norm = sum_sq.sqrt();
    if max_norm > 0.0 && norm > max_norm {
        let scale = max_norm / (norm + 1e-6);
        for g in grads.iter_mut() {
            for v in g.data_mut() {
                *v *= scale;
            }
        }
    }
    norm
}

//! Per-agent policy outputs over a shared observation batch.

use crate::gaussian::w2_diag_unchecked;
use crate::{DiversityError, Result};

/// The action distributions every agent produces on a common batch of
/// observations: for each agent, a `batch x act_dim` matrix of means and a
/// matching matrix of standard deviations.
///
/// All diversity metrics consume snapshots, so validation happens once here:
/// consistent shapes across agents and strictly positive stds.
#[derive(Debug, Clone)]
pub struct PolicySnapshot {
    num_agents: usize,
    batch: usize,
    act_dim: usize,
    /// Flattened `[agent][obs][dim]`.
    means: Vec<f64>,
    /// Flattened `[agent][obs][dim]`.
    stds: Vec<f64>,
}

impl PolicySnapshot {
    pub fn new(
        num_agents: usize,
        batch: usize,
        act_dim: usize,
        means: Vec<f64>,
        stds: Vec<f64>,
    ) -> Result<Self> {
        if num_agents == 0 {
            return Err(DiversityError::InvalidParameter {
                name: "num_agents",
                reason: "snapshot needs at least one agent".into(),
            });
        }
        if batch == 0 {
            return Err(DiversityError::EmptyBatch);
        }
        if act_dim == 0 {
            return Err(DiversityError::InvalidParameter {
                name: "act_dim",
                reason: "action space must have at least one dimension".into(),
            });
        }
        let expected = num_agents * batch * act_dim;
        if means.len() != expected {
            return Err(DiversityError::DimensionMismatch {
                left: means.len(),
                right: expected,
            });
        }
        if stds.len() != expected {
            return Err(DiversityError::DimensionMismatch {
                left: stds.len(),
                right: expected,
            });
        }
        for (index, &value) in stds.iter().enumerate() {
            if !(value > 0.0 && value.is_finite()) {
                return Err(DiversityError::InvalidStd { index, value });
            }
        }
        Ok(Self {
            num_agents,
            batch,
            act_dim,
            means,
            stds,
        })
    }

    /// Convenience constructor from per-agent row-major matrices.
    pub fn from_agents(
        batch: usize,
        act_dim: usize,
        agents: &[(Vec<f64>, Vec<f64>)],
    ) -> Result<Self> {
        let mut means = Vec::with_capacity(agents.len() * batch * act_dim);
        let mut stds = Vec::with_capacity(agents.len() * batch * act_dim);
        for (m, s) in agents {
            means.extend_from_slice(m);
            stds.extend_from_slice(s);
        }
        Self::new(agents.len(), batch, act_dim, means, stds)
    }

    pub fn num_agents(&self) -> usize {
        self.num_agents
    }

    pub fn batch(&self) -> usize {
        self.batch
    }

    pub fn act_dim(&self) -> usize {
        self.act_dim
    }

    /// All distributions one agent produced, one per observation.
    pub fn agent_row(&self, agent: usize) -> Result<AgentRow<'_>> {
        if agent >= self.num_agents {
            return Err(DiversityError::AgentOutOfRange {
                agent,
                num_agents: self.num_agents,
            });
        }
        let stride = self.batch * self.act_dim;
        let start = agent * stride;
        Ok(AgentRow {
            batch: self.batch,
            act_dim: self.act_dim,
            means: &self.means[start..start + stride],
            stds: &self.stds[start..start + stride],
        })
    }
}

/// One agent's slice of a [`PolicySnapshot`].
#[derive(Debug, Clone, Copy)]
pub struct AgentRow<'a> {
    batch: usize,
    act_dim: usize,
    means: &'a [f64],
    stds: &'a [f64],
}

impl<'a> AgentRow<'a> {
    pub fn batch(&self) -> usize {
        self.batch
    }

    fn slice_at(&self, obs: usize) -> (&'a [f64], &'a [f64]) {
        let start = obs * self.act_dim;
        (
            &self.means[start..start + self.act_dim],
            &self.stds[start..start + self.act_dim],
        )
    }
}

/// Mean Wasserstein-2 distance between two agents' policies, averaged
/// uniformly over the shared observation batch:
/// `(1/B) * sum_b W2(a(o_b), b(o_b))`.
pub fn mean_pairwise_w2(a: AgentRow<'_>, b: AgentRow<'_>) -> Result<f64> {
    if a.batch != b.batch {
        return Err(DiversityError::DimensionMismatch {
            left: a.batch,
            right: b.batch,
        });
    }
    if a.act_dim != b.act_dim {
        return Err(DiversityError::DimensionMismatch {
            left: a.act_dim,
            right: b.act_dim,
        });
    }
    if a.batch == 0 {
        return Err(DiversityError::EmptyBatch);
    }
    let mut total = 0.0;
    for obs in 0..a.batch {
        let (ma, sa) = a.slice_at(obs);
        let (mb, sb) = b.slice_at(obs);
        total += w2_diag_unchecked(ma, sa, mb, sb);
    }
    Ok(total / a.batch as f64)
}

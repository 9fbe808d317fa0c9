//! Versioned JSON snapshots of the actor, its critics, the diversity
//! parameters, and the training step counter.

use diversity_core::DlbcParams;
use serde::{Deserialize, Serialize};

use crate::actor::{Critic, DlbcActor};
use crate::mlp::{Linear, Mlp, MlpSpec};
use crate::tensor::Tensor;
use crate::{PolicyError, Result};

pub const POLICY_CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LayerCheckpoint {
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MlpCheckpoint {
    pub spec: MlpSpec,
    pub layers: Vec<LayerCheckpoint>,
}

impl MlpCheckpoint {
    pub fn capture(net: &Mlp) -> Self {
        Self {
            spec: net.spec().clone(),
            layers: net
                .layers()
                .iter()
                .map(|l| LayerCheckpoint {
                    weight: l.weight.data().to_vec(),
                    bias: l.bias.data().to_vec(),
                })
                .collect(),
        }
    }

    pub fn restore(&self) -> Result<Mlp> {
        let layers = self
            .spec
            .widths
            .windows(2)
            .zip(&self.layers)
            .map(|(pair, l)| {
                Ok(Linear {
                    weight: Tensor::from_vec(pair[0], pair[1], l.weight.clone())?,
                    bias: Tensor::from_vec(1, pair[1], l.bias.clone())?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Mlp::from_layers(self.spec.clone(), layers)
    }
}

/// Everything needed to resume or evaluate a policy: topology, flat
/// parameter arrays, shared log-std, diversity parameters, and the step
/// counter.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolicyCheckpoint {
    pub version: u32,
    pub num_agents: usize,
    pub obs_dim: usize,
    pub act_dim: usize,
    pub trunk: MlpCheckpoint,
    pub heads: Vec<MlpCheckpoint>,
    pub critics: Vec<MlpCheckpoint>,
    pub log_std: Vec<f64>,
    pub scale: f64,
    pub dlbc: DlbcParams,
    pub env_steps: u64,
}

impl PolicyCheckpoint {
    pub fn capture(
        actor: &DlbcActor,
        critics: &[Critic],
        dlbc: &DlbcParams,
        env_steps: u64,
    ) -> Self {
        Self {
            version: POLICY_CHECKPOINT_VERSION,
            num_agents: actor.num_agents(),
            obs_dim: actor.obs_dim(),
            act_dim: actor.act_dim(),
            trunk: MlpCheckpoint::capture(actor.trunk()),
            heads: actor.heads().iter().map(MlpCheckpoint::capture).collect(),
            critics: critics.iter().map(|c| MlpCheckpoint::capture(c.net())).collect(),
            log_std: actor.log_std().data().to_vec(),
            scale: actor.scale(),
            dlbc: *dlbc,
            env_steps,
        }
    }

    pub fn restore(&self) -> Result<(DlbcActor, Vec<Critic>)> {
        if self.version != POLICY_CHECKPOINT_VERSION {
            return Err(PolicyError::CheckpointVersion {
                stored: self.version,
                expected: POLICY_CHECKPOINT_VERSION,
            });
        }
        let trunk = self.trunk.restore()?;
        let heads = self
            .heads
            .iter()
            .map(|h| h.restore())
            .collect::<Result<Vec<_>>>()?;
        let log_std = Tensor::from_vec(1, self.act_dim, self.log_std.clone())?;
        let actor = DlbcActor::from_parts(trunk, heads, log_std, self.scale)?;
        let critics = self
            .critics
            .iter()
            .map(|c| Critic::from_net(c.restore()?))
            .collect::<Result<Vec<_>>>()?;
        Ok((actor, critics))
    }
}

//! The scale-constrained actor: a trunk network shared by every agent plus
//! one deviation head per agent, composed as
//! `mean_i(o) = trunk(o) + scale * head_i(o)` with a single learnable
//! log-std vector shared across agents.
//!
//! Because deviations enter only through the mean and the std is shared,
//! every pairwise policy W2 distance is exactly linear in `scale`, which is
//! what lets a closed-form scale pin measured diversity to a target.

use diversity_core::{DiagGaussian, PolicySnapshot};
use rand::Rng;

use crate::mlp::{Mlp, MlpSpec, MlpVars};
use crate::tape::{Tape, Var};
use crate::tensor::{self, Tensor};
use crate::{PolicyError, Result};

/// Shared trunk, per-agent deviation heads, shared log-std, current scale.
#[derive(Debug, Clone)]
pub struct DlbcActor {
    trunk: Mlp,
    heads: Vec<Mlp>,
    /// `1 x act_dim`, learnable, shared by all agents.
    log_std: Tensor,
    scale: f64,
}

/// Action distributions for one agent over an observation batch: per-row
/// means plus the shared std vector.
#[derive(Debug, Clone)]
pub struct GaussianBatch {
    means: Tensor,
    std: Vec<f64>,
}

impl GaussianBatch {
    pub fn batch(&self) -> usize {
        self.means.rows()
    }

    pub fn means(&self) -> &Tensor {
        &self.means
    }

    pub fn std(&self) -> &[f64] {
        &self.std
    }

    pub fn dist(&self, row: usize) -> DiagGaussian {
        DiagGaussian::new(self.means.row(row).to_vec(), self.std.clone())
            .expect("std validated at construction")
    }
}

/// Tape handles for every actor parameter.
pub struct ActorVars {
    trunk: MlpVars,
    heads: Vec<MlpVars>,
    log_std: Var,
}

impl ActorVars {
    pub fn log_std(&self) -> Var {
        self.log_std
    }

    /// All parameter handles in [`DlbcActor::parameters`] order.
    pub fn vars(&self) -> Vec<Var> {
        let mut out = self.trunk.vars();
        for head in &self.heads {
            out.extend(head.vars());
        }
        out.push(self.log_std);
        out
    }
}

impl DlbcActor {
    /// Initialize for `num_agents` agents. The trunk output layer gets a
    /// small orthogonal gain; deviation-head output layers start at exactly
    /// zero, so at step 0 every agent's policy equals the trunk.
    pub fn new(
        num_agents: usize,
        obs_dim: usize,
        act_dim: usize,
        trunk_hidden: &[usize],
        head_hidden: &[usize],
        init_log_std: f64,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        if num_agents == 0 {
            return Err(PolicyError::InvalidArgument(
                "actor needs at least one agent".into(),
            ));
        }
        let mut trunk_widths = vec![obs_dim];
        trunk_widths.extend_from_slice(trunk_hidden);
        trunk_widths.push(act_dim);
        let trunk = Mlp::init(
            MlpSpec::with_gains(trunk_widths, 2.0f64.sqrt(), 0.01)?,
            rng,
        );

        let mut head_widths = vec![obs_dim];
        head_widths.extend_from_slice(head_hidden);
        head_widths.push(act_dim);
        let heads = (0..num_agents)
            .map(|_| {
                Ok(Mlp::init(
                    MlpSpec::with_gains(head_widths.clone(), 2.0f64.sqrt(), 0.0)?,
                    rng,
                ))
            })
            .collect::<Result<Vec<_>>>()?;

        Ok(Self {
            trunk,
            heads,
            log_std: Tensor::from_vec(1, act_dim, vec![init_log_std; act_dim])?,
            scale: 1.0,
        })
    }

    pub fn from_parts(trunk: Mlp, heads: Vec<Mlp>, log_std: Tensor, scale: f64) -> Result<Self> {
        if heads.is_empty() {
            return Err(PolicyError::InvalidArgument("no deviation heads".into()));
        }
        let act_dim = trunk.spec().output_dim();
        for head in &heads {
            if head.spec().input_dim() != trunk.spec().input_dim()
                || head.spec().output_dim() != act_dim
            {
                return Err(PolicyError::InvalidArgument(
                    "deviation heads must share the trunk's input/output dims".into(),
                ));
            }
        }
        if log_std.shape() != (1, act_dim) {
            return Err(PolicyError::ShapeMismatch {
                context: "DlbcActor::from_parts",
                expected: (1, act_dim),
                actual: log_std.shape(),
            });
        }
        if log_std.iter().any(|v| !v.is_finite()) {
            return Err(PolicyError::InvalidArgument("log_std must be finite".into()));
        }
        Ok(Self {
            trunk,
            heads,
            log_std,
            scale,
        })
    }

    pub fn num_agents(&self) -> usize {
        self.heads.len()
    }

    pub fn obs_dim(&self) -> usize {
        self.trunk.spec().input_dim()
    }

    pub fn act_dim(&self) -> usize {
        self.trunk.spec().output_dim()
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Install a new diversity scale. The scale is a plain constant: no
    /// gradient ever flows through it.
    pub fn set_scale(&mut self, scale: f64) {
        self.scale = scale;
    }

    pub fn trunk(&self) -> &Mlp {
        &self.trunk
    }

    pub fn heads(&self) -> &[Mlp] {
        &self.heads
    }

    pub fn log_std(&self) -> &Tensor {
        &self.log_std
    }

    pub fn std(&self) -> Vec<f64> {
        self.log_std.iter().map(|v| v.exp()).collect()
    }

    fn check_agent(&self, agent: usize) -> Result<()> {
        if agent >= self.heads.len() {
            return Err(PolicyError::UnknownAgent {
                agent,
                num_agents: self.heads.len(),
            });
        }
        Ok(())
    }

    /// Action distributions for `agent` on a batch of observations, at the
    /// currently installed scale.
    pub fn forward(&self, agent: usize, obs: &Tensor) -> Result<GaussianBatch> {
        self.check_agent(agent)?;
        let trunk_out = self.trunk.forward(obs)?;
        let head_out = self.heads[agent].forward(obs)?;
        let scale = self.scale;
        let means = tensor::zip(&trunk_out, &head_out, |t, h| t + scale * h);
        Ok(GaussianBatch {
            means,
            std: self.std(),
        })
    }

    /// Single-observation convenience around [`DlbcActor::forward`].
    pub fn dist(&self, agent: usize, obs: &[f64]) -> Result<DiagGaussian> {
        let batch = Tensor::from_rows(&[obs.to_vec()])?;
        Ok(self.forward(agent, &batch)?.dist(0))
    }

    /// Every agent's distributions over a shared observation batch, with the
    /// deviation heads scaled by `scale` instead of the installed value.
    /// The trunk is evaluated once and reused across agents.
    pub fn snapshot_at_scale(&self, obs: &Tensor, scale: f64) -> Result<PolicySnapshot> {
        let batch = obs.rows();
        let act_dim = self.act_dim();
        let trunk_out = self.trunk.forward(obs)?;
        let std = self.std();

        let mut means = Vec::with_capacity(self.heads.len() * batch * act_dim);
        let mut stds = Vec::with_capacity(self.heads.len() * batch * act_dim);
        for head in &self.heads {
            let head_out = head.forward(obs)?;
            for (t, h) in trunk_out.iter().zip(head_out.iter()) {
                means.push(t + scale * h);
            }
            for _ in 0..batch {
                stds.extend_from_slice(&std);
            }
        }
        Ok(PolicySnapshot::new(
            self.heads.len(),
            batch,
            act_dim,
            means,
            stds,
        )?)
    }

    /// Snapshot at the installed scale.
    pub fn snapshot(&self, obs: &Tensor) -> Result<PolicySnapshot> {
        self.snapshot_at_scale(obs, self.scale)
    }

    /// Register all parameters on a tape.
    pub fn bind(&self, tape: &mut Tape) -> ActorVars {
        ActorVars {
            trunk: self.trunk.bind(tape),
            heads: self.heads.iter().map(|h| h.bind(tape)).collect(),
            log_std: tape.param(self.log_std.clone()),
        }
    }

    /// Taped mean for one agent: `trunk(obs) + scale * head_agent(obs)`.
    pub fn taped_mean(
        &self,
        tape: &mut Tape,
        vars: &ActorVars,
        agent: usize,
        obs: Var,
    ) -> Result<Var> {
        self.check_agent(agent)?;
        let trunk_out = self.trunk.forward_taped(tape, &vars.trunk, obs)?;
        let head_out = self.heads[agent].forward_taped(tape, &vars.heads[agent], obs)?;
        let scaled = tape.scale(head_out, self.scale);
        tape.add(trunk_out, scaled)
    }

    /// Parameters in a fixed order: trunk layers, then each agent's head
    /// layers, then the shared log-std. Matches [`ActorVars::vars`].
    pub fn parameters(&self) -> Vec<&Tensor> {
        let mut out = self.trunk.parameters();
        for head in &self.heads {
            out.extend(head.parameters());
        }
        out.push(&self.log_std);
        out
    }

    pub fn parameters_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out = self.trunk.parameters_mut();
        for head in &mut self.heads {
            out.extend(head.parameters_mut());
        }
        out.push(&mut self.log_std);
        out
    }
}

/// Per-agent state-value network.
#[derive(Debug, Clone)]
pub struct Critic {
    net: Mlp,
}

impl Critic {
    pub fn new(obs_dim: usize, hidden: &[usize], rng: &mut impl Rng) -> Result<Self> {
        let mut widths = vec![obs_dim];
        widths.extend_from_slice(hidden);
        widths.push(1);
        Ok(Self {
            net: Mlp::init(MlpSpec::with_gains(widths, 2.0f64.sqrt(), 1.0)?, rng),
        })
    }

    pub fn from_net(net: Mlp) -> Result<Self> {
        if net.spec().output_dim() != 1 {
            return Err(PolicyError::InvalidArgument(
                "critic output must be scalar".into(),
            ));
        }
        Ok(Self { net })
    }

    pub fn net(&self) -> &Mlp {
        &self.net
    }

    /// One value estimate per observation row.
    pub fn values(&self, obs: &Tensor) -> Result<Vec<f64>> {
        Ok(self.net.forward(obs)?.data().to_vec())
    }

    pub fn bind(&self, tape: &mut Tape) -> MlpVars {
        self.net.bind(tape)
    }

    /// Taped values, a `B x 1` column.
    pub fn forward_taped(&self, tape: &mut Tape, vars: &MlpVars, obs: Var) -> Result<Var> {
        self.net.forward_taped(tape, vars, obs)
    }

    pub fn parameters(&self) -> Vec<&Tensor> {
        self.net.parameters()
    }

    pub fn parameters_mut(&mut self) -> Vec<&mut Tensor> {
        self.net.parameters_mut()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use diversity_core::{aggregate_inter, snd_intra, GroupPartition};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn test_actor(num_agents: usize, seed: u64) -> DlbcActor {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DlbcActor::new(num_agents, 6, 2, &[16, 16], &[8], -0.5, &mut rng).unwrap()
    }

    fn random_obs(batch: usize, dim: usize, seed: u64) -> Tensor {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Tensor::from_vec(
            batch,
            dim,
            (0..batch * dim).map(|_| rng.random_range(-1.0..1.0)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn zero_initialized_heads_match_trunk_exactly() {
        let actor = test_actor(3, 0);
        let obs = random_obs(5, 6, 1);
        let trunk_out = actor.trunk().forward(&obs).unwrap();
        for agent in 0..3 {
            let batch = actor.forward(agent, &obs).unwrap();
            assert_eq!(batch.means(), &trunk_out);
        }
    }

    #[test]
    fn scale_zero_collapses_all_agents_to_shared_policy() {
        let mut actor = test_actor(4, 2);
        perturb_heads(&mut actor);
        actor.set_scale(0.0);
        let obs = random_obs(8, 6, 3);
        let snap = actor.snapshot(&obs).unwrap();
        let partition = GroupPartition::new(vec![0, 0, 1, 1], 2).unwrap();
        for g in 0..2 {
            assert_eq!(snd_intra(&partition.members(g), &snap).unwrap(), 0.0);
        }
        assert_eq!(aggregate_inter(&partition, &snap).unwrap(), 0.0);
    }

    #[test]
    fn scale_one_with_zero_trunk_returns_head_output() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut actor = DlbcActor::new(2, 4, 2, &[8], &[8], -0.5, &mut rng).unwrap();
        perturb_heads(&mut actor);
        // Zero out the trunk entirely.
        for layer_param in actor.trunk.parameters_mut() {
            for v in layer_param.data_mut() {
                *v = 0.0;
            }
        }
        actor.set_scale(1.0);
        let obs = random_obs(3, 4, 5);
        let head_out = actor.heads()[1].forward(&obs).unwrap();
        let batch = actor.forward(1, &obs).unwrap();
        assert_eq!(batch.means(), &head_out);
    }

    /// Give the deviation heads nonzero output layers so diversity is
    /// nondegenerate.
    fn perturb_heads(actor: &mut DlbcActor) {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        use rand::Rng;
        let num_params = actor.parameters().len();
        let trunk_params = actor.trunk.parameters().len();
        for (idx, param) in actor.parameters_mut().into_iter().enumerate() {
            // Skip trunk and log_std; touch only head layers.
            if idx < trunk_params || idx == num_params - 1 {
                continue;
            }
            for v in param.data_mut() {
                *v += rng.random_range(-0.5..0.5);
            }
        }
    }

    #[test]
    fn doubling_scale_doubles_every_snd() {
        let mut actor = test_actor(5, 6);
        perturb_heads(&mut actor);
        let obs = random_obs(10, 6, 7);
        let partition = GroupPartition::new(vec![0, 0, 0, 1, 1], 2).unwrap();

        let snap1 = actor.snapshot_at_scale(&obs, 1.0).unwrap();
        let snap2 = actor.snapshot_at_scale(&obs, 2.0).unwrap();

        for g in 0..2 {
            let members = partition.members(g);
            let a = snd_intra(&members, &snap1).unwrap();
            let b = snd_intra(&members, &snap2).unwrap();
            assert_abs_diff_eq!(b, 2.0 * a, epsilon = 1e-9 * a.max(1.0));
        }
        let i1 = aggregate_inter(&partition, &snap1).unwrap();
        let i2 = aggregate_inter(&partition, &snap2).unwrap();
        assert_abs_diff_eq!(i2, 2.0 * i1, epsilon = 1e-9 * i1.max(1.0));
    }

    #[test]
    fn unknown_agent_is_an_error() {
        let actor = test_actor(2, 8);
        let obs = random_obs(1, 6, 9);
        assert!(matches!(
            actor.forward(2, &obs),
            Err(PolicyError::UnknownAgent { .. })
        ));
    }

    #[test]
    fn taped_mean_matches_plain_forward() {
        let mut actor = test_actor(3, 10);
        perturb_heads(&mut actor);
        actor.set_scale(0.37);
        let obs = random_obs(4, 6, 11);

        let plain = actor.forward(1, &obs).unwrap();

        let mut tape = Tape::new();
        let vars = actor.bind(&mut tape);
        let obs_var = tape.constant(obs);
        let mean = actor.taped_mean(&mut tape, &vars, 1, obs_var).unwrap();
        assert_eq!(tape.value(mean), plain.means());
    }

    #[test]
    fn critic_outputs_scalar_per_row() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let critic = Critic::new(6, &[16, 16], &mut rng).unwrap();
        let obs = random_obs(7, 6, 13);
        assert_eq!(critic.values(&obs).unwrap().len(), 7);
    }
}

//! System neural diversity (SND) metrics and the dynamic diversity scale.
//!
//! Intra-group SND averages pairwise policy W2 distances within one group;
//! inter-group SND averages them across two groups. The scale factor divides
//! a desired diversity target by the alpha-mixed measurement, so installing
//! it on a policy whose pairwise distances are linear in the scale pins the
//! mixed diversity exactly to the target.

use serde::{Deserialize, Serialize};

use crate::snapshot::{mean_pairwise_w2, PolicySnapshot};
use crate::{DiversityError, GroupPartition, Result};

/// Intra-group SND: the average pairwise policy distance inside one group,
/// `(2 / (n(n-1))) * sum_{i<j} mean_pairwise_w2(i, j)`.
///
/// A singleton group has no pairs and scores 0; an empty group is an error.
pub fn snd_intra(group: &[usize], snapshot: &PolicySnapshot) -> Result<f64> {
    validate_group(group, snapshot)?;
    let n = group.len();
    if n == 1 {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    for (k, &i) in group.iter().enumerate() {
        for &j in &group[k + 1..] {
            sum += mean_pairwise_w2(snapshot.agent_row(i)?, snapshot.agent_row(j)?)?;
        }
    }
    let norm = 2.0 / (n as f64 * (n as f64 - 1.0));
    Ok(norm * sum)
}

/// Inter-group SND: the average pairwise policy distance across two disjoint
/// groups, `(1 / (n1 * n2)) * sum_{i in A} sum_{j in B} mean_pairwise_w2(i, j)`.
pub fn snd_inter(group_a: &[usize], group_b: &[usize], snapshot: &PolicySnapshot) -> Result<f64> {
    validate_group(group_a, snapshot)?;
    validate_group(group_b, snapshot)?;
    for &agent in group_a {
        if group_b.contains(&agent) {
            return Err(DiversityError::OverlappingGroups { agent });
        }
    }
    let mut sum = 0.0;
    for &i in group_a {
        for &j in group_b {
            sum += mean_pairwise_w2(snapshot.agent_row(i)?, snapshot.agent_row(j)?)?;
        }
    }
    let norm = 1.0 / (group_a.len() as f64 * group_b.len() as f64);
    Ok(norm * sum)
}

/// Inter-group SND aggregated over a whole partition: the unweighted mean of
/// [`snd_inter`] over all `K(K-1)/2` unordered group pairs. For `K = 2` this
/// is exactly `snd_inter` of the two groups.
pub fn aggregate_inter(partition: &GroupPartition, snapshot: &PolicySnapshot) -> Result<f64> {
    let k = partition.num_groups();
    if k < 2 {
        return Err(DiversityError::TooFewGroups {
            required: 2,
            actual: k,
        });
    }
    let groups: Vec<Vec<usize>> = (0..k).map(|g| partition.members(g)).collect();
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for a in 0..k {
        for b in a + 1..k {
            sum += snd_inter(&groups[a], &groups[b], snapshot)?;
            pairs += 1;
        }
    }
    Ok(sum / pairs as f64)
}

fn validate_group(group: &[usize], snapshot: &PolicySnapshot) -> Result<()> {
    if group.is_empty() {
        return Err(DiversityError::EmptyGroup);
    }
    for (k, &agent) in group.iter().enumerate() {
        if agent >= snapshot.num_agents() {
            return Err(DiversityError::AgentOutOfRange {
                agent,
                num_agents: snapshot.num_agents(),
            });
        }
        if group[k + 1..].contains(&agent) {
            return Err(DiversityError::DuplicateAgent { agent });
        }
    }
    Ok(())
}

/// Parameters of the dynamic diversity constraint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DlbcParams {
    /// Desired diversity level the scale factor enforces.
    pub snd_des: f64,
    /// Mixing weight in `[0, 1]`: 1 emphasizes inter-group diversity,
    /// 0 intra-group consistency.
    pub alpha: f64,
    /// Lower bound on the scale denominator, guarding the division when all
    /// policies coincide.
    #[serde(default = "default_denom_floor")]
    pub denom_floor: f64,
    /// Upper clamp on the resulting scale.
    #[serde(default = "default_scale_max")]
    pub scale_max: f64,
}

fn default_denom_floor() -> f64 {
    1e-8
}

fn default_scale_max() -> f64 {
    1e3
}

impl Default for DlbcParams {
    fn default() -> Self {
        Self {
            snd_des: 0.5,
            alpha: 0.5,
            denom_floor: default_denom_floor(),
            scale_max: default_scale_max(),
        }
    }
}

impl DlbcParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.snd_des >= 0.0 && self.snd_des.is_finite()) {
            return Err(DiversityError::InvalidParameter {
                name: "snd_des",
                reason: format!("must be finite and nonnegative, got {}", self.snd_des),
            });
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(DiversityError::InvalidParameter {
                name: "alpha",
                reason: format!("must lie in [0, 1], got {}", self.alpha),
            });
        }
        if !(self.denom_floor > 0.0 && self.denom_floor.is_finite()) {
            return Err(DiversityError::InvalidParameter {
                name: "denom_floor",
                reason: format!("must be strictly positive, got {}", self.denom_floor),
            });
        }
        if !(self.scale_max > 0.0 && self.scale_max.is_finite()) {
            return Err(DiversityError::InvalidParameter {
                name: "scale_max",
                reason: format!("must be strictly positive, got {}", self.scale_max),
            });
        }
        Ok(())
    }
}

/// Dynamic scale: `snd_des / max(alpha * inter + (1 - alpha) * intra, floor)`,
/// clamped to `scale_max`.
///
/// `intra_combined` is the unweighted mean of the per-group intra SNDs. The
/// floor replaces division by zero at the start of training when all policies
/// coincide, so the result is always finite and nonnegative.
pub fn compute_scale(params: &DlbcParams, intra_combined: f64, inter: f64) -> f64 {
    let denom = params.alpha * inter + (1.0 - params.alpha) * intra_combined;
    (params.snd_des / denom.max(params.denom_floor)).min(params.scale_max)
}

/// One round of diversity measurement plus the scale it implies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SndReport {
    /// Intra-group SND per group, measured before scaling.
    pub intra_per_group: Vec<f64>,
    /// Aggregated inter-group SND, measured before scaling (0 when the
    /// partition has a single group).
    pub inter: f64,
    /// `alpha * inter + (1 - alpha) * mean(intra_per_group)`.
    pub combined: f64,
    /// Scale produced by [`compute_scale`] from the measurements above.
    pub scale: f64,
}

impl SndReport {
    /// Assemble a report from raw measurements, computing the combined value
    /// and scale so the invariant between the fields holds by construction.
    pub fn from_measurements(params: &DlbcParams, intra_per_group: Vec<f64>, inter: f64) -> Self {
        let intra_mean = mean(&intra_per_group);
        let combined = params.alpha * inter + (1.0 - params.alpha) * intra_mean;
        let scale = compute_scale(params, intra_mean, inter);
        Self {
            intra_per_group,
            inter,
            combined,
            scale,
        }
    }

    pub fn intra_mean(&self) -> f64 {
        mean(&self.intra_per_group)
    }
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

/// Measure every group's intra SND and the aggregated inter SND for a
/// partition with at least two groups, and fold them into a report.
pub fn measure_snd(
    params: &DlbcParams,
    partition: &GroupPartition,
    snapshot: &PolicySnapshot,
) -> Result<SndReport> {
    if partition.num_agents() != snapshot.num_agents() {
        return Err(DiversityError::DimensionMismatch {
            left: partition.num_agents(),
            right: snapshot.num_agents(),
        });
    }
    let intra = (0..partition.num_groups())
        .map(|g| snd_intra(&partition.members(g), snapshot))
        .collect::<Result<Vec<f64>>>()?;
    let inter = if partition.num_groups() >= 2 {
        aggregate_inter(partition, snapshot)?
    } else {
        0.0
    };
    Ok(SndReport::from_measurements(params, intra, inter))
}

//! Disjoint, covering assignment of agents to groups.

use serde::{Deserialize, Serialize};

use crate::{DiversityError, Result};

/// Assignment of `N` agents to `K` groups such that every agent belongs to
/// exactly one group and no group is empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupPartition {
    /// `assignment[agent] = group index in [0, K)`.
    assignment: Vec<usize>,
    num_groups: usize,
}

impl GroupPartition {
    /// Build from an explicit assignment vector; `num_groups` fixes `K` and
    /// every group index in `[0, K)` must occur at least once.
    pub fn new(assignment: Vec<usize>, num_groups: usize) -> Result<Self> {
        if assignment.is_empty() {
            return Err(DiversityError::InvalidPartition(
                "no agents to partition".into(),
            ));
        }
        if num_groups == 0 {
            return Err(DiversityError::InvalidPartition("zero groups".into()));
        }
        let mut counts = vec![0usize; num_groups];
        for (agent, &group) in assignment.iter().enumerate() {
            if group >= num_groups {
                return Err(DiversityError::InvalidPartition(format!(
                    "agent {agent} assigned to group {group}, but K = {num_groups}"
                )));
            }
            counts[group] += 1;
        }
        if let Some(empty) = counts.iter().position(|&c| c == 0) {
            return Err(DiversityError::InvalidPartition(format!(
                "group {empty} has no agents"
            )));
        }
        Ok(Self {
            assignment,
            num_groups,
        })
    }

    /// Everybody in one group.
    pub fn single_group(num_agents: usize) -> Result<Self> {
        Self::new(vec![0; num_agents], 1)
    }

    pub fn num_agents(&self) -> usize {
        self.assignment.len()
    }

    pub fn num_groups(&self) -> usize {
        self.num_groups
    }

    pub fn group_of(&self, agent: usize) -> Result<usize> {
        self.assignment
            .get(agent)
            .copied()
            .ok_or(DiversityError::AgentOutOfRange {
                agent,
                num_agents: self.assignment.len(),
            })
    }

    /// Agent indices belonging to `group`, in ascending order.
    pub fn members(&self, group: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter_map(|(agent, &g)| (g == group).then_some(agent))
            .collect()
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valid_partition_roundtrips() {
        let p = GroupPartition::new(vec![0, 0, 1, 1, 0], 2).unwrap();
        assert_eq!(p.num_agents(), 5);
        assert_eq!(p.num_groups(), 2);
        assert_eq!(p.members(0), vec![0, 1, 4]);
        assert_eq!(p.members(1), vec![2, 3]);
        assert_eq!(p.group_of(2).unwrap(), 1);
    }

    #[test]
    fn rejects_empty_group() {
        assert!(GroupPartition::new(vec![0, 0, 0], 2).is_err());
    }

    #[test]
    fn rejects_out_of_range_group() {
        assert!(GroupPartition::new(vec![0, 2], 2).is_err());
    }

    #[test]
    fn rejects_degenerate_inputs() {
        assert!(GroupPartition::new(vec![], 1).is_err());
        assert!(GroupPartition::new(vec![0], 0).is_err());
    }
}

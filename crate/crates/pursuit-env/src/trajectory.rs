//! JSON-lines trajectory dumps, one record per step, consumed by the
//! renderer and by cross-check tests.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::world::WorldState;
use crate::Result;

/// Snapshot of one step: record 0 is the post-reset state (zero rewards),
/// every following record is the state after one action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub step: usize,
    pub pursuer_pos: Vec<[f64; 2]>,
    pub pursuer_vel: Vec<[f64; 2]>,
    pub evader_pos: Vec<[f64; 2]>,
    pub evader_vel: Vec<[f64; 2]>,
    pub rewards: Vec<f64>,
    pub collisions: usize,
}

impl TrajectoryRecord {
    pub fn from_state(state: &WorldState, rewards: Vec<f64>, collisions: usize) -> Self {
        let pack = |vs: &[crate::Vec2]| vs.iter().map(|v| [v.x, v.y]).collect();
        Self {
            step: state.step_count,
            pursuer_pos: pack(&state.pursuer_pos),
            pursuer_vel: pack(&state.pursuer_vel),
            evader_pos: pack(&state.evader_pos),
            evader_vel: pack(&state.evader_vel),
            rewards,
            collisions,
        }
    }
}

/// Write records as JSON lines.
pub fn write_trajectory(records: &[TrajectoryRecord], mut writer: impl Write) -> Result<()> {
    for record in records {
        serde_json::to_writer(&mut writer, record)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

/// Read records back from JSON lines, skipping blank lines.
pub fn read_trajectory(reader: impl BufRead) -> Result<Vec<TrajectoryRecord>> {
    let mut records = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(serde_json::from_str(&line)?);
    }
    Ok(records)
}

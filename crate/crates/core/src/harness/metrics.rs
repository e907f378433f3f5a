use serde::{Deserialize, Serialize};

use crate::engine::SimResult;
use crate::entities::count_moves;

/// Route and safety figures for one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// Mean moves per drone; hovers are not moves.
    pub arl: f64,
    /// Most moves made by any single drone.
    pub llr: u32,
    /// Ground-truth collisions.
    pub nc: u32,
    /// Algorithm wall-clock time, milliseconds.
    pub t_ms: f64,
}

pub fn compute_metrics(result: &SimResult, wall_ms: f64) -> Metrics {
    let moves: Vec<usize> = result.routes.iter().map(|(_, r)| count_moves(r)).collect();
    let arl = if moves.is_empty() { 0.0 } else { moves.iter().sum::<usize>() as f64 / moves.len() as f64 };
    Metrics {
        arl,
        llr: moves.iter().copied().max().unwrap_or(0) as u32,
        nc: result.collisions.len() as u32,
        t_ms: wall_ms,
    }
}

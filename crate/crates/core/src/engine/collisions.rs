//! Ground-truth collision accounting.
//!
//! Deliberately shares nothing with the prediction rules: it only compares
//! where everything was before a tick with where it is afterwards.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::entities::{DroneId, ObstacleId};
use crate::world::Cell;

/// Positions of everything in the area at one instant.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Occupancy {
    pub drones: Vec<(DroneId, Cell)>,
    pub obstacles: Vec<(ObstacleId, Cell)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CollisionRecord {
    /// Two or more drones in one cell.
    CoLocation { tick: u64, cell: Cell, drones: Vec<DroneId> },
    /// A drone sharing a cell with an obstacle.
    Obstacle { tick: u64, cell: Cell, drone: DroneId, obstacle: ObstacleId },
    /// Two drones that traded cells, meeting on the edge between them.
    EdgeSwap { tick: u64, a: DroneId, b: DroneId, cells: (Cell, Cell) },
}

impl CollisionRecord {
    pub fn tick(&self) -> u64 {
        match self {
            CollisionRecord::CoLocation { tick, .. }
            | CollisionRecord::Obstacle { tick, .. }
            | CollisionRecord::EdgeSwap { tick, .. } => *tick,
        }
    }
}

/// Collisions that happen during the tick from `before` to `after`.
///
/// A co-location that already existed in `before` with the same participants
/// in the same cell is a continuing contact and is not recorded again.
pub fn detect_collisions_ground_truth(before: &Occupancy, after: &Occupancy, tick: u64) -> Vec<CollisionRecord> {
    let mut out = Vec::new();
    let prev: BTreeMap<DroneId, Cell> = before.drones.iter().copied().collect();

    let mut by_cell: BTreeMap<Cell, Vec<DroneId>> = BTreeMap::new();
    for &(d, c) in &after.drones {
        by_cell.entry(c).or_default().push(d);
    }
    for (cell, mut drones) in by_cell.iter().map(|(c, v)| (*c, v.clone())) {
        if drones.len() < 2 {
            continue;
        }
        drones.sort();
        if drones.iter().all(|d| prev.get(d) == Some(&cell)) {
            continue;
        }
        out.push(CollisionRecord::CoLocation { tick, cell, drones });
    }

    let prev_obstacles: BTreeMap<ObstacleId, Cell> = before.obstacles.iter().copied().collect();
    for &(o, oc) in &after.obstacles {
        if let Some(drones) = by_cell.get(&oc) {
            for &d in drones {
                if prev.get(&d) == Some(&oc) && prev_obstacles.get(&o) == Some(&oc) {
                    continue;
                }
                out.push(CollisionRecord::Obstacle { tick, cell: oc, drone: d, obstacle: o });
            }
        }
    }

    let now: BTreeMap<DroneId, Cell> = after.drones.iter().copied().collect();
    let mut moved_from: BTreeMap<(Cell, Cell), DroneId> = BTreeMap::new();
    for (&d, &to) in &now {
        if let Some(&from) = prev.get(&d) {
            if from != to {
                moved_from.insert((from, to), d);
            }
        }
    }
    for (&(from, to), &a) in &moved_from {
        if from < to {
            if let Some(&b) = moved_from.get(&(to, from)) {
                let (a, b) = if a < b { (a, b) } else { (b, a) };
                out.push(CollisionRecord::EdgeSwap { tick, a, b, cells: (from, to) });
            }
        }
    }
    out
}

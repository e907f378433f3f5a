//! Collision prediction rules.
//!
//! A drone-to-drone collision is predicted when a drone's desired next cell is
//! the current or desired next cell of another drone, or when the other drone
//! wants the first one's current cell. Obstacle collisions are predicted when
//! the desired next cell holds a static obstacle or the current cell of a
//! moving obstacle.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::cep::{MatchKind, ProximityMatch};
use crate::entities::{DroneId, ObstacleId};
use crate::world::Cell;

pub type PredictionKind = MatchKind;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PredictionError {
    #[error("drone {0} already declared an intent this tick")]
    DuplicateIntent(DroneId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub struct Prediction {
    pub kind: PredictionKind,
    pub drone: DroneId,
    /// Drone id for drone/drone predictions, obstacle id otherwise.
    pub conflicting: u32,
    pub cell: Cell,
}

/// Desired next cell per drone for the current tick.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IntentTable {
    intents: BTreeMap<DroneId, Cell>,
}

impl IntentTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare(&mut self, drone: DroneId, next: Cell) -> Result<(), PredictionError> {
        if self.intents.contains_key(&drone) {
            return Err(PredictionError::DuplicateIntent(drone));
        }
        self.intents.insert(drone, next);
        Ok(())
    }

    pub fn get(&self, drone: DroneId) -> Option<Cell> {
        self.intents.get(&drone).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (DroneId, Cell)> + '_ {
        self.intents.iter().map(|(d, c)| (*d, *c))
    }

    pub fn len(&self) -> usize {
        self.intents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intents.is_empty()
    }
}

impl FromIterator<(DroneId, Cell)> for IntentTable {
    fn from_iter<T: IntoIterator<Item = (DroneId, Cell)>>(iter: T) -> Self {
        IntentTable { intents: iter.into_iter().collect() }
    }
}

/// Current positions the rules are evaluated against.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WorldSnapshot {
    pub drones: BTreeMap<DroneId, Cell>,
    pub statics: BTreeMap<ObstacleId, Cell>,
    /// Moving obstacles currently inside the area.
    pub moving: BTreeMap<ObstacleId, Cell>,
}

/// Drone/drone rule for the ordered pair (i, j).
pub fn rule1(
    i: DroneId,
    cur_i: Cell,
    next_i: Cell,
    j: DroneId,
    cur_j: Cell,
    next_j: Cell,
) -> Option<Prediction> {
    debug_assert_ne!(i, j);
    let cell = if next_i == cur_j {
        cur_j
    } else if next_i == next_j {
        next_i
    } else if next_j == cur_i {
        cur_i
    } else {
        return None;
    };
    Some(Prediction { kind: MatchKind::DroneDrone, drone: i, conflicting: j.0, cell })
}

pub fn rule2(drone: DroneId, next: Cell, obstacle: ObstacleId, static_cell: Cell) -> Option<Prediction> {
    (next == static_cell).then_some(Prediction {
        kind: MatchKind::DroneStatic,
        drone,
        conflicting: obstacle.0,
        cell: static_cell,
    })
}

pub fn rule3(drone: DroneId, next: Cell, obstacle: ObstacleId, moving_cell: Cell) -> Option<Prediction> {
    (next == moving_cell).then_some(Prediction {
        kind: MatchKind::DroneMoving,
        drone,
        conflicting: obstacle.0,
        cell: moving_cell,
    })
}

/// Applies the three rules to every proximity match, and the drone/drone rule
/// to every pair of drones regardless of matches. A drone without a declared
/// intent is treated as staying where it is.
///
/// The drone/drone rule fires symmetrically, so each conflicting pair yields a
/// single prediction attributed to the lower drone id. The result is sorted
/// and free of duplicates.
pub fn predict_all(matches: &[ProximityMatch], intents: &IntentTable, world: &WorldSnapshot) -> Vec<Prediction> {
    let mut out = BTreeSet::new();
    let next_of = |d: DroneId, cur: Cell| intents.get(d).unwrap_or(cur);

    for m in matches {
        let Some(&cur) = world.drones.get(&m.subject) else { continue };
        let next = next_of(m.subject, cur);
        match m.kind {
            MatchKind::DroneDrone => {
                let other = DroneId(m.other);
                if let Some(&cur_o) = world.drones.get(&other) {
                    let next_o = next_of(other, cur_o);
                    let (a, b) = if m.subject < other {
                        ((m.subject, cur, next), (other, cur_o, next_o))
                    } else {
                        ((other, cur_o, next_o), (m.subject, cur, next))
                    };
                    out.extend(rule1(a.0, a.1, a.2, b.0, b.1, b.2));
                }
            }
            MatchKind::DroneStatic => {
                let id = ObstacleId(m.other);
                let cell = world.statics.get(&id).copied().unwrap_or(m.other_cell);
                out.extend(rule2(m.subject, next, id, cell));
            }
            MatchKind::DroneMoving => {
                let id = ObstacleId(m.other);
                if let Some(&cell) = world.moving.get(&id) {
                    out.extend(rule3(m.subject, next, id, cell));
                }
            }
        }
    }

    let drones: Vec<(DroneId, Cell, Cell)> =
        world.drones.iter().map(|(&d, &cur)| (d, cur, next_of(d, cur))).collect();
    for (a, &(i, cur_i, next_i)) in drones.iter().enumerate() {
        for &(j, cur_j, next_j) in &drones[a + 1..] {
            out.extend(rule1(i, cur_i, next_i, j, cur_j, next_j));
        }
    }
    out.into_iter().collect()
}

/// What one drone knows while choosing its move: who else is where, who has
/// already committed to which cell, and the obstacles its proximity queries
/// reported.
#[derive(Debug, Clone, Copy)]
pub struct DroneView<'a> {
    pub drone: DroneId,
    pub current: Cell,
    /// Current cells of every drone, including this one.
    pub drone_cells: &'a BTreeMap<DroneId, Cell>,
    /// Next cells already committed by drones processed earlier this tick.
    pub committed: &'a BTreeMap<DroneId, Cell>,
    pub known_statics: &'a [(ObstacleId, Cell)],
    pub known_moving: &'a [(ObstacleId, Cell)],
}

impl DroneView<'_> {
    /// Every prediction that moving to `next` would raise for this drone.
    /// Drones that have not decided yet are assumed to stay put.
    pub fn predict(&self, next: Cell) -> Vec<Prediction> {
        let mut out = Vec::new();
        for (&j, &cur_j) in self.drone_cells {
            if j == self.drone {
                continue;
            }
            let next_j = self.committed.get(&j).copied().unwrap_or(cur_j);
            out.extend(rule1(self.drone, self.current, next, j, cur_j, next_j));
        }
        for &(id, cell) in self.known_statics {
            out.extend(rule2(self.drone, next, id, cell));
        }
        for &(id, cell) in self.known_moving {
            out.extend(rule3(self.drone, next, id, cell));
        }
        out
    }

    pub fn is_safe(&self, next: Cell) -> bool {
        self.predict(next).is_empty()
    }

    /// Cells occupied by a drone or a known obstacle.
    pub fn is_occupied(&self, c: Cell) -> bool {
        self.drone_cells.values().any(|&d| d == c)
            || self.known_statics.iter().any(|&(_, s)| s == c)
            || self.known_moving.iter().any(|&(_, m)| m == c)
    }
}

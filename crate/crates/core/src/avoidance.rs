//! Collision avoidance: redirect, then hover, then backtrack.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coordination::LockTable;
use crate::entities::{BacktrackState, Drone, FlightMode};
use crate::prediction::{DroneView, Prediction};
use crate::world::{manhattan, Area, Axis, Cell};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("backtrack setting `{0}` must be positive")]
pub struct ConfigError(pub &'static str);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct BacktrackConfig {
    /// Successful away-steps that end a backtrack episode.
    pub required_steps: u32,
    /// Attempts (moves or hovers) after which an episode ends regardless.
    pub max_attempts: u32,
    /// Consecutive hovers before a blocked drone starts backtracking.
    pub hover_threshold: u32,
    /// Ticks without getting closer to the destination before backtracking.
    pub stall_threshold: u32,
}

impl Default for BacktrackConfig {
    fn default() -> Self {
        BacktrackConfig { required_steps: 3, max_attempts: 10, hover_threshold: 5, stall_threshold: 15 }
    }
}

impl BacktrackConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let fields = [
            ("required_steps", self.required_steps),
            ("max_attempts", self.max_attempts),
            ("hover_threshold", self.hover_threshold),
            ("stall_threshold", self.stall_threshold),
        ];
        match fields.iter().find(|(_, v)| *v == 0) {
            Some((name, _)) => Err(ConfigError(name)),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "action", content = "cell")]
pub enum AvoidanceAction {
    Redirect(Cell),
    Hover,
    EnterBacktrack,
}

/// Why avoidance was invoked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trigger {
    /// The intended cell raised a prediction.
    Predicted(Prediction),
    /// No free cell brings the drone closer to its destination.
    Blocked,
    /// The lock on the intended cell went to another drone.
    LockLost(Cell),
}

impl Trigger {
    fn excluded(&self) -> Option<Cell> {
        match self {
            Trigger::Predicted(p) => Some(p.cell),
            Trigger::LockLost(c) => Some(*c),
            Trigger::Blocked => None,
        }
    }
}

/// Neighbours a drone may move into right now: in bounds, prediction-free and
/// not locked by someone else.
pub fn safe_neighbors(area: &Area, view: &DroneView<'_>, locks: &LockTable, exclude: Option<Cell>) -> Vec<Cell> {
    area.neighbors_unchecked(view.current)
        .into_iter()
        .filter(|&n| Some(n) != exclude)
        .filter(|&n| !locks.is_locked_by_other(n, view.drone))
        .filter(|&n| view.is_safe(n))
        .collect()
}

/// A move along an axis on which `from` is already level with `dest`: a
/// change of flying direction that neither approaches nor retreats along the
/// axes still to be covered. Every grid move changes the Manhattan distance by
/// one, so this is the closest thing to a distance-keeping move.
pub fn is_sidestep(from: Cell, to: Cell, dest: Cell) -> bool {
    Axis::ALL.into_iter().any(|a| from.coord(a) != to.coord(a) && from.coord(a) == dest.coord(a))
}

/// Picks the avoidance action for `drone`.
///
/// A drone that has gone `stall_threshold` ticks without getting closer
/// switches to backtracking straight away. Otherwise a redirect goes to a
/// uniformly random safe neighbour, preferring those that reduce the distance
/// to the destination over sidesteps. Without a redirect the drone hovers,
/// unless it has already hovered past its threshold.
pub fn avoid<R: Rng + ?Sized>(
    drone: &Drone,
    trigger: &Trigger,
    view: &DroneView<'_>,
    area: &Area,
    locks: &LockTable,
    cfg: &BacktrackConfig,
    rng: &mut R,
) -> AvoidanceAction {
    if drone.stall_ticks >= cfg.stall_threshold {
        return AvoidanceAction::EnterBacktrack;
    }
    let here = manhattan(view.current, drone.dest);
    let candidates = safe_neighbors(area, view, locks, trigger.excluded());
    let closer: Vec<Cell> = candidates.iter().copied().filter(|&n| manhattan(n, drone.dest) < here).collect();
    let sidesteps: Vec<Cell> =
        candidates.iter().copied().filter(|&n| is_sidestep(view.current, n, drone.dest)).collect();
    for pool in [closer, sidesteps] {
        if !pool.is_empty() {
            return AvoidanceAction::Redirect(pool[rng.gen_range(0..pool.len())]);
        }
    }
    if drone.hover_streak >= cfg.hover_threshold {
        AvoidanceAction::EnterBacktrack
    } else {
        AvoidanceAction::Hover
    }
}

/// The cell one step further from `dest` along `axis`, if there is an away
/// direction at all.
pub fn away_cell(current: Cell, dest: Cell, axis: Axis) -> Option<Cell> {
    let (c, d) = (current.coord(axis), dest.coord(axis));
    match c.cmp(&d) {
        std::cmp::Ordering::Less => Some(current.step(axis, -1)),
        std::cmp::Ordering::Greater => Some(current.step(axis, 1)),
        std::cmp::Ordering::Equal => None,
    }
}

/// One backtracking attempt: choose an axis at random and try to step away
/// from the destination along it. Returns the target cell, or `None` to hover
/// when the step leaves the area, raises a prediction, is locked, or the
/// drone is already level with its destination on that axis.
pub fn backtrack_step<R: Rng + ?Sized>(
    drone: &mut Drone,
    view: &DroneView<'_>,
    area: &Area,
    locks: &LockTable,
    rng: &mut R,
) -> Option<Cell> {
    debug_assert_eq!(drone.mode, FlightMode::Backtrack);
    let axis = Axis::ALL[rng.gen_range(0..3)];
    drone.backtrack.attempts += 1;
    let target = away_cell(view.current, drone.dest, axis)
        .filter(|&c| area.contains(c))
        .filter(|&c| !locks.is_locked_by_other(c, drone.id))
        .filter(|&c| view.is_safe(c))?;
    drone.backtrack.steps_done += 1;
    Some(target)
}

/// Ends the episode once enough steps were taken or attempts spent. On exit the
/// drone returns to normal flight with fresh progress tracking.
pub fn backtrack_exit_check(drone: &mut Drone, cfg: &BacktrackConfig) -> bool {
    let b = drone.backtrack;
    if b.steps_done >= cfg.required_steps || b.attempts >= cfg.max_attempts {
        drone.backtrack = BacktrackState::default();
        drone.mode = FlightMode::Normal;
        drone.best_distance = drone.distance_to_dest();
        drone.stall_ticks = 0;
        true
    } else {
        false
    }
}

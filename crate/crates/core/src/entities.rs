//! Drones, obstacles and the moving-obstacle random walk.

use std::collections::HashSet;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::world::{manhattan, Area, Axis, Cell};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EntityError {
    #[error("drone {drone} cannot move from {from} to {to}: not adjacent")]
    IllegalMove { drone: DroneId, from: Cell, to: Cell },
    #[error("duplicate drone id {0}")]
    DuplicateId(DroneId),
    #[error("drones {0} and {1} share cell {2}")]
    SharedCell(DroneId, DroneId, Cell),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DroneId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObstacleId(pub u32);

impl fmt::Display for DroneId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d{}", self.0)
    }
}

impl fmt::Display for ObstacleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "o{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlightMode {
    Normal,
    Hover,
    Backtrack,
}

/// Progress counters for one backtracking episode.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BacktrackState {
    pub steps_done: u32,
    pub attempts: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Drone {
    pub id: DroneId,
    pub start: Cell,
    pub dest: Cell,
    pub mode: FlightMode,
    route: Vec<Cell>,
    pub hover_streak: u32,
    pub backtrack: BacktrackState,
    /// Closest distance to `dest` reached since the last reset.
    pub best_distance: u32,
    /// Consecutive normal-mode ticks without improving `best_distance`.
    pub stall_ticks: u32,
}

impl Drone {
    pub fn new(id: DroneId, start: Cell, dest: Cell) -> Self {
        Drone {
            id,
            start,
            dest,
            mode: FlightMode::Normal,
            route: vec![start],
            hover_streak: 0,
            backtrack: BacktrackState::default(),
            best_distance: manhattan(start, dest),
            stall_ticks: 0,
        }
    }

    pub fn current(&self) -> Cell {
        *self.route.last().expect("route is never empty")
    }

    pub fn route(&self) -> &[Cell] {
        &self.route
    }

    pub fn into_route(self) -> Vec<Cell> {
        self.route
    }

    pub fn distance_to_dest(&self) -> u32 {
        manhattan(self.current(), self.dest)
    }

    pub fn arrived(&self) -> bool {
        self.current() == self.dest
    }

    /// Appends `next` to the route. Staying put is a hover.
    pub fn record_move(&mut self, next: Cell) -> Result<(), EntityError> {
        let cur = self.current();
        if next == cur {
            self.hover_streak += 1;
        } else if cur.is_adjacent(&next) {
            self.hover_streak = 0;
        } else {
            return Err(EntityError::IllegalMove { drone: self.id, from: cur, to: next });
        }
        self.route.push(next);
        Ok(())
    }

    /// Number of non-hover transitions in the route.
    pub fn moves(&self) -> usize {
        count_moves(&self.route)
    }
}

/// Transitions between distinct consecutive cells.
pub fn count_moves(route: &[Cell]) -> usize {
    route.windows(2).filter(|w| w[0] != w[1]).count()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StaticObstacle {
    pub id: ObstacleId,
    pub cell: Cell,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MovingObstacle {
    pub id: ObstacleId,
    pub cell: Cell,
    /// Ticks between consecutive steps.
    pub cadence: u32,
    pub spawn_tick: u64,
    pub alive: bool,
}

impl MovingObstacle {
    pub fn new(id: ObstacleId, cell: Cell, cadence: u32, spawn_tick: u64) -> Self {
        assert!(cadence > 0, "cadence must be positive");
        MovingObstacle { id, cell, cadence, spawn_tick, alive: true }
    }

    /// Present in the flying zone at `tick`.
    pub fn active_at(&self, tick: u64) -> bool {
        self.alive && tick >= self.spawn_tick
    }

    pub fn moves_at(&self, tick: u64) -> bool {
        tick > self.spawn_tick && (tick - self.spawn_tick).is_multiple_of(self.cadence as u64)
    }
}

const DIRECTIONS: [(Axis, i32); 6] = [
    (Axis::X, -1),
    (Axis::X, 1),
    (Axis::Y, -1),
    (Axis::Y, 1),
    (Axis::Z, -1),
    (Axis::Z, 1),
];

/// Advances a moving obstacle by one tick of its random walk.
///
/// Off-cadence ticks leave it untouched. On cadence it takes one uniformly
/// random axis step, which may carry it out of the area (`alive = false`).
/// With `avoid_drones`, a step onto a drone-occupied cell is re-drawn among
/// the directions that are not, and the obstacle stays put if there are none.
pub fn step_moving_obstacle<R: Rng + ?Sized>(
    o: &MovingObstacle,
    tick: u64,
    rng: &mut R,
    area: &Area,
    occupied_drone_cells: &HashSet<Cell>,
    avoid_drones: bool,
) -> MovingObstacle {
    let mut next = *o;
    if !o.active_at(tick) || !o.moves_at(tick) {
        return next;
    }
    let (axis, delta) = DIRECTIONS[rng.gen_range(0..DIRECTIONS.len())];
    let mut target = o.cell.step(axis, delta);
    if avoid_drones && occupied_drone_cells.contains(&target) {
        let free: Vec<Cell> = DIRECTIONS
            .iter()
            .map(|&(a, d)| o.cell.step(a, d))
            .filter(|c| !occupied_drone_cells.contains(c))
            .collect();
        if free.is_empty() {
            return next;
        }
        target = free[rng.gen_range(0..free.len())];
    }
    if area.contains(target) {
        next.cell = target;
    } else {
        next.alive = false;
    }
    next
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Swarm {
    pub drones: Vec<Drone>,
}

impl Swarm {
    pub fn new(drones: Vec<Drone>) -> Result<Self, EntityError> {
        let swarm = Swarm { drones };
        let mut ids = HashSet::new();
        for d in &swarm.drones {
            if !ids.insert(d.id) {
                return Err(EntityError::DuplicateId(d.id));
            }
        }
        swarm.check_distinct_cells()?;
        Ok(swarm)
    }

    pub fn len(&self) -> usize {
        self.drones.len()
    }

    pub fn is_empty(&self) -> bool {
        self.drones.is_empty()
    }

    pub fn check_distinct_cells(&self) -> Result<(), EntityError> {
        let mut seen = std::collections::HashMap::new();
        for d in &self.drones {
            if let Some(other) = seen.insert(d.current(), d.id) {
                return Err(EntityError::SharedCell(other, d.id, d.current()));
            }
        }
        Ok(())
    }

    pub fn occupied(&self) -> HashSet<Cell> {
        self.drones.iter().map(Drone::current).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn obstacle(cell: Cell) -> MovingObstacle {
        MovingObstacle::new(ObstacleId(1), cell, 5, 0)
    }

    #[test]
    fn off_cadence_is_unchanged() {
        let area = Area::cube(10).unwrap();
        let o = obstacle(Cell::new(5, 5, 5));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(step_moving_obstacle(&o, 3, &mut rng, &area, &HashSet::new(), true), o);
        assert_eq!(step_moving_obstacle(&o, 0, &mut rng, &area, &HashSet::new(), true), o);
    }

    #[test]
    fn corner_obstacle_can_exit() {
        let area = Area::cube(10).unwrap();
        let o = obstacle(Cell::new(0, 0, 0));
        // Find a seed whose first draw is -x, then check it exits.
        let seed = (0..1000u64)
            .find(|&s| ChaCha8Rng::seed_from_u64(s).gen_range(0..6usize) == 0)
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let next = step_moving_obstacle(&o, 5, &mut rng, &area, &HashSet::new(), true);
        assert!(!next.alive);
        assert!(!next.active_at(6));
    }

    #[test]
    fn interior_step_is_uniform_over_six() {
        let area = Area::cube(10).unwrap();
        let start = Cell::new(5, 5, 5);
        let o = obstacle(start);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut counts = std::collections::HashMap::new();
        let trials = 100_000;
        for _ in 0..trials {
            let n = step_moving_obstacle(&o, 10, &mut rng, &area, &HashSet::new(), true);
            assert!(n.alive);
            assert!(n.cell.is_adjacent(&start));
            *counts.entry(n.cell).or_insert(0u32) += 1;
        }
        assert_eq!(counts.len(), 6);
        let expected = trials as f64 / 6.0;
        let chi2: f64 = counts.values().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // 5 degrees of freedom, p = 0.001 critical value.
        assert!(chi2 < 20.515, "chi2 = {chi2}");
    }

    #[test]
    fn avoids_drone_cells_or_stays() {
        let area = Area::cube(10).unwrap();
        let start = Cell::new(5, 5, 5);
        let o = obstacle(start);
        let all: HashSet<Cell> = area.neighbors(start).unwrap().into_iter().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            assert_eq!(step_moving_obstacle(&o, 5, &mut rng, &area, &all, true).cell, start);
        }
        let one_free: HashSet<Cell> = all.iter().copied().filter(|c| *c != Cell::new(5, 5, 6)).collect();
        for _ in 0..100 {
            assert_eq!(step_moving_obstacle(&o, 5, &mut rng, &area, &one_free, true).cell, Cell::new(5, 5, 6));
        }
    }

    #[test]
    fn cadence_bounds_steps() {
        let area = Area::cube(10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for cadence in 1..7u32 {
            let mut o = MovingObstacle::new(ObstacleId(0), Cell::new(5, 5, 5), cadence, 0);
            let mut steps = 0;
            let horizon = 200u64;
            for t in 1..=horizon {
                let n = step_moving_obstacle(&o, t, &mut rng, &area, &HashSet::new(), false);
                if n.cell != o.cell || n.alive != o.alive {
                    steps += 1;
                }
                o = n;
                if !o.alive {
                    break;
                }
            }
            assert!(steps <= horizon / cadence as u64);
        }
    }

    #[test]
    fn record_move_examples() {
        let mut d = Drone::new(DroneId(0), Cell::new(1, 1, 1), Cell::new(5, 5, 5));
        d.record_move(Cell::new(1, 1, 2)).unwrap();
        assert_eq!(d.route().len(), 2);
        assert_eq!(d.hover_streak, 0);
        d.record_move(Cell::new(1, 1, 2)).unwrap();
        assert_eq!(d.hover_streak, 1);
        assert_eq!(d.moves(), 1);
        let err = d.record_move(Cell::new(3, 1, 2)).unwrap_err();
        assert!(matches!(err, EntityError::IllegalMove { .. }));
        assert_eq!(d.current(), Cell::new(1, 1, 2));
    }

    #[test]
    fn swarm_rejects_duplicates() {
        let a = Drone::new(DroneId(0), Cell::new(0, 0, 0), Cell::new(1, 0, 0));
        let b = Drone::new(DroneId(0), Cell::new(2, 0, 0), Cell::new(3, 0, 0));
        assert_eq!(Swarm::new(vec![a.clone(), b]), Err(EntityError::DuplicateId(DroneId(0))));
        let c = Drone::new(DroneId(1), Cell::new(0, 0, 0), Cell::new(3, 0, 0));
        assert!(matches!(Swarm::new(vec![a, c]), Err(EntityError::SharedCell(..))));
    }
}

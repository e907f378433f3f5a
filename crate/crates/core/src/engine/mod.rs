//! Tick-synchronous mission engine.
//!
//! Each tick runs a fixed phase sequence:
//!
//! 1. moving obstacles step on their cadence;
//! 2. every drone emits a location event, and every obstacle within the
//!    detection radius of some drone emits a detection event;
//! 3. the events go through the CEP store, producing proximity matches;
//! 4. drones decide one at a time, in a fresh random order: form an intent
//!    (greedy step or backtrack step), check it against the prediction rules
//!    and the lock table, fall back to avoidance if needed, and lock the
//!    chosen cell;
//! 5. moves commit, previous cells are unlocked and routes grow;
//! 6. an independent scanner records any collision that actually happened;
//! 7. the mission ends once every drone has arrived.

mod collisions;
mod config;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use collisions::{detect_collisions_ground_truth, CollisionRecord, Occupancy};
pub use config::{
    Algorithm, AreaSpec, ConfigError, DroneSpec, MovingSpec, SimConfig, DEFAULT_CADENCE, DEFAULT_DETECTION_RADIUS,
    DEFAULT_TICK_MS, MAX_TICKS_PER_EXTENT,
};

use crate::avoidance::{avoid, backtrack_exit_check, backtrack_step, AvoidanceAction, Trigger};
use crate::cep::{DroneLocEvent, Event, MObsEvent, MatchKind, Millis, ProximityMatch, SObsEvent, WindowStore};
use crate::coordination::LockTable;
use crate::entities::{
    step_moving_obstacle, Drone, DroneId, EntityError, FlightMode, MovingObstacle, ObstacleId, StaticObstacle,
};
use crate::prediction::{DroneView, Prediction};
use crate::world::{manhattan, Area, Cell};

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("mission did not finish within {max_ticks} ticks ({unarrived} drones short)")]
    Timeout { max_ticks: u64, unarrived: usize, result: Box<SimResult> },
    #[error("engine invariant violated at tick {tick}: {detail}")]
    EngineInvariantViolation { tick: u64, detail: String },
    #[error(transparent)]
    Entity(#[from] EntityError),
    #[error("algorithm {0} is not supported by this runner")]
    WrongAlgorithm(Algorithm),
    #[error(transparent)]
    Plan(#[from] crate::baselines::PlanFailure),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceAction {
    /// Took the greedy step it planned.
    Advance,
    /// Avoidance moved it somewhere other than planned.
    Redirect,
    Hover,
    /// Stepped away from the destination.
    Backtrack,
    /// At its destination.
    Parked,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceCause {
    Predicted,
    Blocked,
    LockLost,
    HoverLimit,
}

/// One line of the run trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum TraceRecord {
    /// First line of every trace.
    Area { dims: [u32; 3] },
    Drone {
        tick: u64,
        drone: DroneId,
        mode: FlightMode,
        /// Cell at the end of the tick.
        cell: Cell,
        action: TraceAction,
        cause: Option<TraceCause>,
        predictions: Vec<Prediction>,
    },
    Obstacles {
        tick: u64,
        statics: Vec<Cell>,
        moving: Vec<Cell>,
    },
}

impl TraceRecord {
    pub fn tick(&self) -> u64 {
        match self {
            TraceRecord::Area { .. } => 0,
            TraceRecord::Drone { tick, .. } | TraceRecord::Obstacles { tick, .. } => *tick,
        }
    }
}

/// Optional outputs collected while running.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub trace: bool,
    pub record_events: bool,
    pub record_matches: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub algorithm: Algorithm,
    pub routes: Vec<(DroneId, Vec<Cell>)>,
    pub collisions: Vec<CollisionRecord>,
    pub ticks: u64,
    /// Wall-clock time spent running the algorithm, milliseconds.
    pub wall_ms: f64,
    #[serde(skip)]
    pub trace: Vec<TraceRecord>,
    #[serde(skip)]
    pub events: Vec<(u64, Event)>,
    #[serde(skip)]
    pub matches: Vec<(u64, ProximityMatch)>,
}

impl SimResult {
    pub fn collision_count(&self) -> usize {
        self.collisions.len()
    }
}

/// Uniformly random neighbour that gets the drone closer to its destination
/// and is not occupied by a drone or a known obstacle. Returns the current
/// cell when there is none.
pub fn plan_step<R: Rng + ?Sized>(drone: &Drone, view: &DroneView<'_>, area: &Area, rng: &mut R) -> Cell {
    let here = view.current;
    let d = manhattan(here, drone.dest);
    let options: Vec<Cell> = area
        .neighbors_unchecked(here)
        .into_iter()
        .filter(|&n| manhattan(n, drone.dest) < d)
        .filter(|&n| !view.is_occupied(n))
        .collect();
    if options.is_empty() {
        here
    } else {
        options[rng.gen_range(0..options.len())]
    }
}

enum Decision {
    Move(Cell, TraceAction),
    Hover,
}

type Decided = (Decision, Option<TraceCause>, Vec<Prediction>);
type KnownObstacles = BTreeMap<DroneId, Vec<(ObstacleId, Cell)>>;

/// A mission in progress.
#[derive(Debug)]
pub struct Simulation {
    cfg: SimConfig,
    area: Area,
    drones: Vec<Drone>,
    statics: Vec<StaticObstacle>,
    moving: Vec<MovingObstacle>,
    store: WindowStore,
    locks: LockTable,
    rng: ChaCha8Rng,
    tick: u64,
    options: RunOptions,
    collisions: Vec<CollisionRecord>,
    trace: Vec<TraceRecord>,
    events: Vec<(u64, Event)>,
    matches: Vec<(u64, ProximityMatch)>,
}

impl Simulation {
    pub fn new(cfg: SimConfig, options: RunOptions) -> Result<Self, SimError> {
        let area = cfg.validate()?;
        let drones: Vec<Drone> = cfg
            .drones
            .iter()
            .enumerate()
            .map(|(i, d)| Drone::new(DroneId(i as u32), d.start, d.dest))
            .collect();
        // Obstacle ids are shared between static and moving obstacles.
        let statics: Vec<StaticObstacle> = cfg
            .static_obstacles
            .iter()
            .enumerate()
            .map(|(i, &cell)| StaticObstacle { id: ObstacleId(i as u32), cell })
            .collect();
        let offset = statics.len() as u32;
        let moving = cfg
            .moving_obstacles
            .iter()
            .enumerate()
            .map(|(i, m)| MovingObstacle::new(ObstacleId(offset + i as u32), m.cell, m.cadence, m.spawn_tick))
            .collect();
        let mut locks = LockTable::new();
        for d in &drones {
            locks.try_acquire(d.id, d.current());
        }
        let rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let trace = if options.trace { vec![TraceRecord::Area { dims: area.dims() }] } else { vec![] };
        Ok(Simulation {
            cfg,
            area,
            drones,
            statics,
            moving,
            store: WindowStore::default(),
            locks,
            rng,
            tick: 0,
            options,
            collisions: Vec::new(),
            trace,
            events: Vec::new(),
            matches: Vec::new(),
        })
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn area(&self) -> &Area {
        &self.area
    }

    pub fn drones(&self) -> &[Drone] {
        &self.drones
    }

    pub fn moving_obstacles(&self) -> &[MovingObstacle] {
        &self.moving
    }

    pub fn static_obstacles(&self) -> &[StaticObstacle] {
        &self.statics
    }

    pub fn locks(&self) -> &LockTable {
        &self.locks
    }

    pub fn collisions(&self) -> &[CollisionRecord] {
        &self.collisions
    }

    pub fn all_arrived(&self) -> bool {
        self.drones.iter().all(Drone::arrived)
    }

    pub fn event_time(&self) -> Millis {
        self.tick * self.cfg.tick_len_ms
    }

    pub fn occupancy(&self) -> Occupancy {
        let mut obstacles: Vec<(ObstacleId, Cell)> = self.statics.iter().map(|s| (s.id, s.cell)).collect();
        obstacles.extend(self.moving.iter().filter(|m| m.active_at(self.tick)).map(|m| (m.id, m.cell)));
        Occupancy { drones: self.drones.iter().map(|d| (d.id, d.current())).collect(), obstacles }
    }

    /// Advances the mission by one tick.
    pub fn run_tick(&mut self) -> Result<(), SimError> {
        let before = self.occupancy();
        self.tick += 1;
        let tick = self.tick;

        self.move_obstacles();
        let matches = self.sense();
        let (statics_known, moving_known) = self.known_obstacles(&matches);

        // decide
        let drone_cells: BTreeMap<DroneId, Cell> = self.drones.iter().map(|d| (d.id, d.current())).collect();
        let mut committed: BTreeMap<DroneId, Cell> = BTreeMap::new();
        let mut order: Vec<usize> = (0..self.drones.len()).collect();
        order.shuffle(&mut self.rng);
        let mut decisions: Vec<Option<Decided>> =
            (0..self.drones.len()).map(|_| None).collect();
        let empty = Vec::new();
        for i in order {
            if self.drones[i].arrived() {
                committed.insert(self.drones[i].id, self.drones[i].current());
                continue;
            }
            let id = self.drones[i].id;
            let view = DroneView {
                drone: id,
                current: self.drones[i].current(),
                drone_cells: &drone_cells,
                committed: &committed,
                known_statics: statics_known.get(&id).unwrap_or(&empty),
                known_moving: moving_known.get(&id).unwrap_or(&empty),
            };
            let (decision, cause, preds) = decide(
                &mut self.drones[i],
                &view,
                &self.area,
                &self.locks,
                &self.cfg,
                &mut self.rng,
            );
            let target = match decision {
                Decision::Move(c, _) => c,
                Decision::Hover => self.drones[i].current(),
            };
            let decision = if target != self.drones[i].current() && !self.locks.try_acquire(id, target) {
                return Err(SimError::EngineInvariantViolation {
                    tick,
                    detail: format!("{id} chose {target} but could not lock it"),
                });
            } else {
                decision
            };
            committed.insert(id, target);
            decisions[i] = Some((decision, cause, preds));
        }

        // commit
        let mut seen: HashSet<Cell> = HashSet::new();
        for (i, slot) in decisions.into_iter().enumerate() {
            let drone = &mut self.drones[i];
            let prev = drone.current();
            let Some((decision, cause, preds)) = slot else {
                seen.insert(prev);
                if self.options.trace {
                    self.trace.push(TraceRecord::Drone {
                        tick,
                        drone: drone.id,
                        mode: drone.mode,
                        cell: prev,
                        action: TraceAction::Parked,
                        cause: None,
                        predictions: vec![],
                    });
                }
                continue;
            };
            let backtracking = drone.mode == FlightMode::Backtrack;
            let action = match decision {
                Decision::Move(next, action) => {
                    drone.record_move(next)?;
                    self.locks.release(drone.id, prev).map_err(|e| SimError::EngineInvariantViolation {
                        tick,
                        detail: e.to_string(),
                    })?;
                    action
                }
                Decision::Hover => {
                    drone.record_move(prev)?;
                    TraceAction::Hover
                }
            };
            if backtracking {
                backtrack_exit_check(drone, &self.cfg.backtrack);
            } else {
                let d = drone.distance_to_dest();
                if d < drone.best_distance {
                    drone.best_distance = d;
                    drone.stall_ticks = 0;
                } else {
                    drone.stall_ticks += 1;
                }
                drone.mode = if action == TraceAction::Hover { FlightMode::Hover } else { FlightMode::Normal };
            }
            if !seen.insert(drone.current()) {
                return Err(SimError::EngineInvariantViolation {
                    tick,
                    detail: format!("two drones committed to {}", drone.current()),
                });
            }
            if self.options.trace {
                self.trace.push(TraceRecord::Drone {
                    tick,
                    drone: drone.id,
                    mode: drone.mode,
                    cell: drone.current(),
                    action,
                    cause,
                    predictions: preds,
                });
            }
        }
        if self.options.trace {
            self.trace.push(TraceRecord::Obstacles {
                tick,
                statics: self.statics.iter().map(|s| s.cell).collect(),
                moving: self.moving.iter().filter(|m| m.active_at(tick)).map(|m| m.cell).collect(),
            });
        }

        let after = self.occupancy();
        self.collisions.extend(detect_collisions_ground_truth(&before, &after, tick));
        Ok(())
    }

    fn move_obstacles(&mut self) {
        let tick = self.tick;
        let occupied: HashSet<Cell> = self.drones.iter().map(Drone::current).collect();
        for i in 0..self.moving.len() {
            let o = self.moving[i];
            if !o.alive {
                continue;
            }
            // an obstacle due to appear on a drone waits until the cell clears
            if o.spawn_tick == tick && self.cfg.obstacles_avoid_drones && occupied.contains(&o.cell) {
                self.moving[i].spawn_tick += 1;
                continue;
            }
            self.moving[i] =
                step_moving_obstacle(&o, tick, &mut self.rng, &self.area, &occupied, self.cfg.obstacles_avoid_drones);
        }
    }

    /// Emits this tick's events and returns the proximity matches they raise.
    fn sense(&mut self) -> Vec<ProximityMatch> {
        let tick = self.tick;
        let now = self.event_time();
        let radius = self.cfg.detection_radius;
        let mut events: Vec<Event> = self
            .drones
            .iter()
            .map(|d| Event::DroneLoc(DroneLocEvent { drone: d.id, cell: d.current(), t: now }))
            .collect();
        let detected = |c: Cell| self.drones.iter().any(|d| d.current().chebyshev(&c) <= radius);
        events.extend(
            self.statics
                .iter()
                .filter(|s| detected(s.cell))
                .map(|s| Event::StaticObs(SObsEvent { obstacle: s.id, cell: s.cell })),
        );
        events.extend(
            self.moving
                .iter()
                .filter(|m| m.active_at(tick) && detected(m.cell))
                .map(|m| Event::MovingObs(MObsEvent { obstacle: m.id, cell: m.cell, t: now })),
        );
        let mut matches = Vec::new();
        for e in events {
            let found = self.store.ingest(e, now);
            if self.options.record_events {
                self.events.push((tick, e));
            }
            if self.options.record_matches {
                self.matches.extend(found.iter().map(|m| (tick, *m)));
            }
            matches.extend(found);
        }
        matches
    }

    /// Obstacles each drone learned about from this tick's matches, at their
    /// current positions.
    fn known_obstacles(
        &self,
        matches: &[ProximityMatch],
    ) -> (KnownObstacles, KnownObstacles) {
        let tick = self.tick;
        let static_cell: BTreeMap<ObstacleId, Cell> = self.statics.iter().map(|s| (s.id, s.cell)).collect();
        let moving_cell: BTreeMap<ObstacleId, Cell> =
            self.moving.iter().filter(|m| m.active_at(tick)).map(|m| (m.id, m.cell)).collect();
        let mut statics: BTreeMap<DroneId, BTreeSet<(ObstacleId, Cell)>> = BTreeMap::new();
        let mut moving: BTreeMap<DroneId, BTreeSet<(ObstacleId, Cell)>> = BTreeMap::new();
        for m in matches {
            let id = ObstacleId(m.other);
            match m.kind {
                MatchKind::DroneStatic => {
                    if let Some(&c) = static_cell.get(&id) {
                        statics.entry(m.subject).or_default().insert((id, c));
                    }
                }
                MatchKind::DroneMoving => {
                    if let Some(&c) = moving_cell.get(&id) {
                        moving.entry(m.subject).or_default().insert((id, c));
                    }
                }
                MatchKind::DroneDrone => {}
            }
        }
        let flatten = |m: BTreeMap<DroneId, BTreeSet<(ObstacleId, Cell)>>| {
            m.into_iter().map(|(k, v)| (k, v.into_iter().collect())).collect()
        };
        (flatten(statics), flatten(moving))
    }

    pub fn into_result(self, wall_ms: f64) -> SimResult {
        SimResult {
            algorithm: Algorithm::Proposed,
            routes: self.drones.into_iter().map(|d| (d.id, d.into_route())).collect(),
            collisions: self.collisions,
            ticks: self.tick,
            wall_ms,
            trace: self.trace,
            events: self.events,
            matches: self.matches,
        }
    }
}

/// Chooses what one drone does this tick.
fn decide<R: Rng + ?Sized>(
    drone: &mut Drone,
    view: &DroneView<'_>,
    area: &Area,
    locks: &LockTable,
    cfg: &SimConfig,
    rng: &mut R,
) -> (Decision, Option<TraceCause>, Vec<Prediction>) {
    if drone.mode == FlightMode::Backtrack {
        return match backtrack_step(drone, view, area, locks, rng) {
            Some(c) => (Decision::Move(c, TraceAction::Backtrack), None, vec![]),
            None => (Decision::Hover, None, vec![]),
        };
    }

    let intent = plan_step(drone, view, area, rng);
    let (trigger, cause, preds) = if intent == view.current {
        (Trigger::Blocked, TraceCause::Blocked, vec![])
    } else {
        let preds = view.predict(intent);
        if let Some(&p) = preds.first() {
            (Trigger::Predicted(p), TraceCause::Predicted, preds)
        } else if locks.is_locked_by_other(intent, drone.id) {
            (Trigger::LockLost(intent), TraceCause::LockLost, vec![])
        } else {
            return (Decision::Move(intent, TraceAction::Advance), None, vec![]);
        }
    };

    match avoid(drone, &trigger, view, area, locks, &cfg.backtrack, rng) {
        AvoidanceAction::Redirect(c) => (Decision::Move(c, TraceAction::Redirect), Some(cause), preds),
        AvoidanceAction::Hover => (Decision::Hover, Some(cause), preds),
        AvoidanceAction::EnterBacktrack => {
            drone.mode = FlightMode::Backtrack;
            drone.backtrack = Default::default();
            let decision = match backtrack_step(drone, view, area, locks, rng) {
                Some(c) => Decision::Move(c, TraceAction::Backtrack),
                None => Decision::Hover,
            };
            (decision, Some(TraceCause::HoverLimit), preds)
        }
    }
}

/// Runs the online navigator until every drone arrives or `max_ticks` pass.
pub fn run_mission(cfg: &SimConfig) -> Result<SimResult, SimError> {
    run_mission_with(cfg, RunOptions::default())
}

pub fn run_mission_with(cfg: &SimConfig, options: RunOptions) -> Result<SimResult, SimError> {
    match cfg.algorithm {
        Algorithm::Proposed => run_online(cfg, options),
        Algorithm::Rrt | Algorithm::RrtStar => crate::baselines::run_baseline(cfg, options),
    }
}

fn run_online(cfg: &SimConfig, options: RunOptions) -> Result<SimResult, SimError> {
    let started = Instant::now();
    let mut sim = Simulation::new(cfg.clone(), options)?;
    let max_ticks = cfg.effective_max_ticks();
    while !sim.all_arrived() && sim.tick() < max_ticks {
        sim.run_tick()?;
    }
    let unarrived = sim.drones().iter().filter(|d| !d.arrived()).count();
    let wall_ms = started.elapsed().as_secs_f64() * 1e3;
    let result = sim.into_result(wall_ms);
    if unarrived > 0 {
        return Err(SimError::Timeout { max_ticks, unarrived, result: Box::new(result) });
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: i32, y: i32, z: i32) -> Cell {
        Cell::new(x, y, z)
    }

    fn one(start: Cell, dest: Cell) -> DroneSpec {
        DroneSpec { start, dest }
    }

    #[test]
    fn zero_drones_finish_immediately() {
        let cfg = SimConfig::new(AreaSpec::cube(10), vec![]);
        let r = run_mission(&cfg).unwrap();
        assert_eq!(r.ticks, 0);
        assert!(r.routes.is_empty());
        assert!(r.collisions.is_empty());
    }

    #[test]
    fn adjacent_destination_takes_one_tick() {
        let cfg = SimConfig::new(AreaSpec::cube(10), vec![one(c(0, 0, 0), c(0, 0, 1))]);
        let r = run_mission(&cfg).unwrap();
        assert_eq!(r.ticks, 1);
        assert_eq!(r.routes[0].1, vec![c(0, 0, 0), c(0, 0, 1)]);
    }

    #[test]
    fn unobstructed_drones_take_greedy_length() {
        let drones = vec![one(c(0, 0, 0), c(3, 4, 0)), one(c(9, 9, 9), c(5, 9, 6))];
        for seed in 0..20 {
            let mut cfg = SimConfig::new(AreaSpec::cube(10), drones.clone());
            cfg.seed = seed;
            let r = run_mission(&cfg).unwrap();
            assert_eq!(r.routes[0].1.len() - 1, 7);
            assert_eq!(r.routes[1].1.len() - 1, 7);
            assert_eq!(r.ticks, 7);
        }
    }

    #[test]
    fn walled_in_drone_times_out() {
        let start = c(5, 5, 5);
        let mut cfg = SimConfig::new(AreaSpec::cube(10), vec![one(start, c(0, 0, 0))]);
        cfg.static_obstacles = Area::cube(10).unwrap().neighbors(start).unwrap();
        cfg.max_ticks = Some(200);
        match run_mission(&cfg) {
            Err(SimError::Timeout { max_ticks: 200, unarrived: 1, result }) => {
                assert!(result.collisions.is_empty());
                assert!(result.routes[0].1.iter().all(|&x| x == start));
            }
            other => panic!("expected timeout, got {other:?}"),
        }
    }

    #[test]
    fn config_errors_surface() {
        let mut cfg = SimConfig::new(AreaSpec::cube(10), vec![one(c(0, 0, 0), c(1, 0, 0)), one(c(0, 0, 0), c(2, 0, 0))]);
        assert!(matches!(run_mission(&cfg), Err(SimError::Config(ConfigError::DuplicateStart(_)))));
        cfg.drones[1].start = c(5, 5, 5);
        cfg.static_obstacles = vec![c(2, 0, 0)];
        assert!(matches!(run_mission(&cfg), Err(SimError::Config(ConfigError::ObstacleOnEndpoint(_)))));
    }

    #[test]
    fn plan_step_prefers_reducing_free_moves() {
        let area = Area::cube(10).unwrap();
        let d = Drone::new(DroneId(0), c(0, 0, 0), c(3, 0, 0));
        let cells: BTreeMap<_, _> = [(d.id, d.current())].into_iter().collect();
        let committed = BTreeMap::new();
        let view = DroneView {
            drone: d.id,
            current: d.current(),
            drone_cells: &cells,
            committed: &committed,
            known_statics: &[],
            known_moving: &[],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(plan_step(&d, &view, &area, &mut rng), c(1, 0, 0));

        let d = Drone::new(DroneId(0), c(0, 0, 0), c(2, 2, 0));
        let mut x = 0;
        let trials = 10_000;
        for _ in 0..trials {
            let n = plan_step(&d, &view, &area, &mut rng);
            assert!(n == c(1, 0, 0) || n == c(0, 1, 0));
            if n == c(1, 0, 0) {
                x += 1;
            }
        }
        let share = x as f64 / trials as f64;
        assert!((share - 0.5).abs() < 0.02, "share = {share}");

        let statics = [(ObstacleId(0), c(1, 0, 0))];
        let view = DroneView { known_statics: &statics, ..view };
        for _ in 0..100 {
            assert_eq!(plan_step(&d, &view, &area, &mut rng), c(0, 1, 0));
        }
    }
}

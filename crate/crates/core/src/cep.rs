//! A small complex-event-processing engine.
//!
//! Three event streams feed a [`WindowStore`]: drone location updates, static
//! obstacle detections and moving obstacle detections. Each stream keeps a
//! sliding time window. Whenever an event arrives it is joined against the
//! retained events of the other streams with three proximity queries, which
//! are compiled in as the predicates below:
//!
//! | query          | window (left, right) | box  |
//! |----------------|----------------------|------|
//! | drone / drone  | 1 s, 1 s             | ±2   |
//! | drone / static | 1 s, 1 h             | ±1   |
//! | drone / moving | 1 s, 1 s             | ±2   |
//!
//! All three additionally require the two cells to agree on at least one axis,
//! and ranges are closed intervals. Only rows in which the arriving event
//! participates are produced, mirroring on-arrival join evaluation.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::entities::{DroneId, ObstacleId};
use crate::world::Cell;

/// Event time in milliseconds.
pub type Millis = u64;

pub const DRONE_RETENTION_MS: Millis = 1_000;
pub const MOVING_RETENTION_MS: Millis = 1_000;
pub const STATIC_RETENTION_MS: Millis = 3_600_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DroneLocEvent {
    pub drone: DroneId,
    pub cell: Cell,
    pub t: Millis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SObsEvent {
    pub obstacle: ObstacleId,
    pub cell: Cell,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MObsEvent {
    pub obstacle: ObstacleId,
    pub cell: Cell,
    pub t: Millis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Event {
    DroneLoc(DroneLocEvent),
    StaticObs(SObsEvent),
    MovingObs(MObsEvent),
}

impl From<DroneLocEvent> for Event {
    fn from(e: DroneLocEvent) -> Self {
        Event::DroneLoc(e)
    }
}

impl From<SObsEvent> for Event {
    fn from(e: SObsEvent) -> Self {
        Event::StaticObs(e)
    }
}

impl From<MObsEvent> for Event {
    fn from(e: MObsEvent) -> Self {
        Event::MovingObs(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchKind {
    DroneDrone,
    DroneStatic,
    DroneMoving,
}

impl fmt::Display for MatchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatchKind::DroneDrone => "drone_drone",
            MatchKind::DroneStatic => "drone_static",
            MatchKind::DroneMoving => "drone_moving",
        })
    }
}

/// One result row of a proximity query. The subject is always a drone;
/// `other` is a drone id for [`MatchKind::DroneDrone`] and an obstacle id
/// otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProximityMatch {
    pub kind: MatchKind,
    pub subject: DroneId,
    pub other: u32,
    pub subject_cell: Cell,
    pub other_cell: Cell,
}

impl ProximityMatch {
    /// Tab-separated debug line: tick, kind, subject, other, cells.
    pub fn trace_line(&self, tick: u64) -> String {
        let other = match self.kind {
            MatchKind::DroneDrone => DroneId(self.other).to_string(),
            _ => ObstacleId(self.other).to_string(),
        };
        format!(
            "{tick}\t{}\t{}\t{other}\t{};{}",
            self.kind, self.subject, self.subject_cell, self.other_cell
        )
    }
}

fn within(a: Cell, b: Cell, r: i32) -> bool {
    (a.x - b.x).abs() <= r && (a.y - b.y).abs() <= r && (a.z - b.z).abs() <= r
}

fn shares_axis(a: Cell, b: Cell) -> bool {
    a.x == b.x || a.y == b.y || a.z == b.z
}

/// Two distinct drones within a ±2 box that agree on some axis.
pub fn match_drone_drone(a: &DroneLocEvent, b: &DroneLocEvent) -> bool {
    a.drone != b.drone && within(a.cell, b.cell, 2) && shares_axis(a.cell, b.cell)
}

/// A drone within a ±1 box of a static obstacle, agreeing on some axis.
pub fn match_drone_static(a: &DroneLocEvent, o: &SObsEvent) -> bool {
    within(a.cell, o.cell, 1) && shares_axis(a.cell, o.cell)
}

/// A drone within a ±2 box of a moving obstacle, agreeing on some axis.
pub fn match_drone_moving(a: &DroneLocEvent, o: &MObsEvent) -> bool {
    within(a.cell, o.cell, 2) && shares_axis(a.cell, o.cell)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Retention {
    pub drone_ms: Millis,
    pub static_ms: Millis,
    pub moving_ms: Millis,
}

impl Default for Retention {
    fn default() -> Self {
        Retention {
            drone_ms: DRONE_RETENTION_MS,
            static_ms: STATIC_RETENTION_MS,
            moving_ms: MOVING_RETENTION_MS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SinkHandle(u64);

type SinkFn = Box<dyn FnMut(&ProximityMatch)>;

struct Sink {
    handle: SinkHandle,
    kind: MatchKind,
    callback: SinkFn,
}

/// Sliding-window buffers for the three event streams plus registered sinks.
///
/// An event that arrived at `a` is retained at time `now` while
/// `now - a < retention` for its stream.
pub struct WindowStore {
    retention: Retention,
    drones: VecDeque<(DroneLocEvent, Millis)>,
    statics: VecDeque<(SObsEvent, Millis)>,
    moving: VecDeque<(MObsEvent, Millis)>,
    sinks: Vec<Sink>,
    next_handle: u64,
    now: Millis,
}

impl fmt::Debug for WindowStore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WindowStore")
            .field("retention", &self.retention)
            .field("drones", &self.drones.len())
            .field("statics", &self.statics.len())
            .field("moving", &self.moving.len())
            .field("sinks", &self.sinks.len())
            .field("now", &self.now)
            .finish()
    }
}

impl Default for WindowStore {
    fn default() -> Self {
        WindowStore::new(Retention::default())
    }
}

impl WindowStore {
    pub fn new(retention: Retention) -> Self {
        WindowStore {
            retention,
            drones: VecDeque::new(),
            statics: VecDeque::new(),
            moving: VecDeque::new(),
            sinks: Vec::new(),
            next_handle: 0,
            now: 0,
        }
    }

    pub fn retention(&self) -> Retention {
        self.retention
    }

    pub fn register_sink<F>(&mut self, kind: MatchKind, callback: F) -> SinkHandle
    where
        F: FnMut(&ProximityMatch) + 'static,
    {
        let handle = SinkHandle(self.next_handle);
        self.next_handle += 1;
        self.sinks.push(Sink { handle, kind, callback: Box::new(callback) });
        handle
    }

    /// Returns false if the handle was not registered.
    pub fn unregister_sink(&mut self, handle: SinkHandle) -> bool {
        let before = self.sinks.len();
        self.sinks.retain(|s| s.handle != handle);
        before != self.sinks.len()
    }

    /// Drops every event whose window has closed at `now`.
    pub fn evict(&mut self, now: Millis) {
        let r = self.retention;
        evict_front(&mut self.drones, now, r.drone_ms);
        evict_front(&mut self.statics, now, r.static_ms);
        evict_front(&mut self.moving, now, r.moving_ms);
    }

    /// Retained events, oldest first.
    pub fn drone_events(&self) -> impl Iterator<Item = &DroneLocEvent> {
        self.drones.iter().map(|(e, _)| e)
    }

    pub fn static_events(&self) -> impl Iterator<Item = &SObsEvent> {
        self.statics.iter().map(|(e, _)| e)
    }

    pub fn moving_events(&self) -> impl Iterator<Item = &MObsEvent> {
        self.moving.iter().map(|(e, _)| e)
    }

    /// Adds `event` at time `now_ms` and returns the new join rows it takes
    /// part in. Matches are also pushed to the sinks registered for their kind.
    ///
    /// A static detection identical to one still retained is ignored.
    pub fn ingest(&mut self, event: impl Into<Event>, now_ms: Millis) -> Vec<ProximityMatch> {
        let event = event.into();
        debug_assert!(now_ms >= self.now, "time went backwards");
        self.now = self.now.max(now_ms);
        self.evict(now_ms);

        let mut out = Vec::new();
        match event {
            Event::DroneLoc(a) => {
                debug_assert!(a.t <= now_ms);
                for (b, _) in &self.drones {
                    if match_drone_drone(&a, b) {
                        out.push(ProximityMatch {
                            kind: MatchKind::DroneDrone,
                            subject: a.drone,
                            other: b.drone.0,
                            subject_cell: a.cell,
                            other_cell: b.cell,
                        });
                    }
                }
                for (o, _) in &self.statics {
                    if match_drone_static(&a, o) {
                        out.push(static_row(&a, o));
                    }
                }
                for (o, _) in &self.moving {
                    if match_drone_moving(&a, o) {
                        out.push(moving_row(&a, o));
                    }
                }
                self.drones.push_back((a, now_ms));
            }
            Event::StaticObs(o) => {
                if self.statics.iter().any(|(s, _)| *s == o) {
                    return out;
                }
                for (a, _) in &self.drones {
                    if match_drone_static(a, &o) {
                        out.push(static_row(a, &o));
                    }
                }
                self.statics.push_back((o, now_ms));
            }
            Event::MovingObs(o) => {
                debug_assert!(o.t <= now_ms);
                for (a, _) in &self.drones {
                    if match_drone_moving(a, &o) {
                        out.push(moving_row(a, &o));
                    }
                }
                self.moving.push_back((o, now_ms));
            }
        }

        for m in &out {
            for sink in self.sinks.iter_mut().filter(|s| s.kind == m.kind) {
                (sink.callback)(m);
            }
        }
        out
    }
}

fn evict_front<E>(buf: &mut VecDeque<(E, Millis)>, now: Millis, retention: Millis) {
    while let Some((_, arrived)) = buf.front() {
        if now.saturating_sub(*arrived) >= retention {
            buf.pop_front();
        } else {
            break;
        }
    }
}

fn static_row(a: &DroneLocEvent, o: &SObsEvent) -> ProximityMatch {
    ProximityMatch {
        kind: MatchKind::DroneStatic,
        subject: a.drone,
        other: o.obstacle.0,
        subject_cell: a.cell,
        other_cell: o.cell,
    }
}

fn moving_row(a: &DroneLocEvent, o: &MObsEvent) -> ProximityMatch {
    ProximityMatch {
        kind: MatchKind::DroneMoving,
        subject: a.drone,
        other: o.obstacle.0,
        subject_cell: a.cell,
        other_cell: o.cell,
    }
}

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::avoidance::BacktrackConfig;
use crate::world::{Area, Cell, SafetyParams, WorldError};

pub const DEFAULT_TICK_MS: u64 = 50;
pub const DEFAULT_CADENCE: u32 = 5;
pub const DEFAULT_DETECTION_RADIUS: u32 = 2;
/// `max_ticks` defaults to this many ticks per unit of summed area extent.
pub const MAX_TICKS_PER_EXTENT: u64 = 50;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error(transparent)]
    World(#[from] WorldError),
    #[error("{what} {cell} is outside the area")]
    OutOfBounds { what: &'static str, cell: Cell },
    #[error("two drones start at {0}")]
    DuplicateStart(Cell),
    #[error("two drones share destination {0}")]
    DuplicateDest(Cell),
    #[error("an obstacle sits on drone start or destination {0}")]
    ObstacleOnEndpoint(Cell),
    #[error("moving obstacle cadence must be positive")]
    ZeroCadence,
    #[error("tick length must be positive")]
    ZeroTick,
    #[error(transparent)]
    Backtrack(#[from] crate::avoidance::ConfigError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    #[default]
    Proposed,
    Rrt,
    RrtStar,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Proposed, Algorithm::Rrt, Algorithm::RrtStar];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Proposed => "proposed",
            Algorithm::Rrt => "rrt",
            Algorithm::RrtStar => "rrt-star",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "proposed" => Ok(Algorithm::Proposed),
            "rrt" => Ok(Algorithm::Rrt),
            "rrt-star" | "rrt_star" | "rrtstar" => Ok(Algorithm::RrtStar),
            other => Err(format!("unknown algorithm `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaSpec {
    pub dims: [u32; 3],
    /// Spacing between consecutive cells, meters.
    #[serde(default = "default_spacing")]
    pub spacing_m: f64,
    #[serde(default = "default_sensing")]
    pub sensing_range_m: f64,
    #[serde(default)]
    pub safety: SafetyParams,
}

fn default_spacing() -> f64 {
    10.0
}

fn default_sensing() -> f64 {
    30.0
}

impl AreaSpec {
    pub fn cube(n: u32) -> Self {
        AreaSpec::with_dims([n, n, n])
    }

    pub fn with_dims(dims: [u32; 3]) -> Self {
        AreaSpec {
            dims,
            spacing_m: default_spacing(),
            sensing_range_m: default_sensing(),
            safety: SafetyParams::default(),
        }
    }

    pub fn build(&self) -> Result<Area, WorldError> {
        Area::new(self.dims, self.spacing_m, self.sensing_range_m, self.safety)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DroneSpec {
    pub start: Cell,
    pub dest: Cell,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MovingSpec {
    pub cell: Cell,
    #[serde(default = "default_cadence")]
    pub cadence: u32,
    #[serde(default)]
    pub spawn_tick: u64,
}

fn default_cadence() -> u32 {
    DEFAULT_CADENCE
}

fn default_tick() -> u64 {
    DEFAULT_TICK_MS
}

fn default_radius() -> u32 {
    DEFAULT_DETECTION_RADIUS
}

fn yes() -> bool {
    true
}

/// Everything a mission needs. Mirrors the scenario file field for field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub area: AreaSpec,
    #[serde(default = "default_tick")]
    pub tick_len_ms: u64,
    pub drones: Vec<DroneSpec>,
    #[serde(default)]
    pub static_obstacles: Vec<Cell>,
    #[serde(default)]
    pub moving_obstacles: Vec<MovingSpec>,
    #[serde(default)]
    pub seed: u64,
    /// Defaults to 50 times the summed area extents.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_ticks: Option<u64>,
    #[serde(default)]
    pub backtrack: BacktrackConfig,
    #[serde(default = "yes")]
    pub obstacles_avoid_drones: bool,
    /// Chebyshev radius, in cells, within which drones detect obstacles.
    #[serde(default = "default_radius")]
    pub detection_radius: u32,
    #[serde(default)]
    pub algorithm: Algorithm,
}

impl SimConfig {
    pub fn new(area: AreaSpec, drones: Vec<DroneSpec>) -> Self {
        SimConfig {
            area,
            tick_len_ms: DEFAULT_TICK_MS,
            drones,
            static_obstacles: Vec::new(),
            moving_obstacles: Vec::new(),
            seed: 0,
            max_ticks: None,
            backtrack: BacktrackConfig::default(),
            obstacles_avoid_drones: true,
            detection_radius: DEFAULT_DETECTION_RADIUS,
            algorithm: Algorithm::Proposed,
        }
    }

    pub fn effective_max_ticks(&self) -> u64 {
        self.max_ticks
            .unwrap_or_else(|| MAX_TICKS_PER_EXTENT * self.area.dims.iter().map(|&d| d as u64).sum::<u64>())
    }

    /// Checks the config and builds its area.
    pub fn validate(&self) -> Result<Area, ConfigError> {
        let area = self.area.build()?;
        if self.tick_len_ms == 0 {
            return Err(ConfigError::ZeroTick);
        }
        self.backtrack.validate()?;
        let inside = |what, cell: Cell| {
            if area.contains(cell) {
                Ok(())
            } else {
                Err(ConfigError::OutOfBounds { what, cell })
            }
        };
        let mut starts = HashSet::new();
        let mut dests = HashSet::new();
        for d in &self.drones {
            inside("drone start", d.start)?;
            inside("drone destination", d.dest)?;
            if !starts.insert(d.start) {
                return Err(ConfigError::DuplicateStart(d.start));
            }
            if !dests.insert(d.dest) {
                return Err(ConfigError::DuplicateDest(d.dest));
            }
        }
        for &s in &self.static_obstacles {
            inside("static obstacle", s)?;
            if starts.contains(&s) || dests.contains(&s) {
                return Err(ConfigError::ObstacleOnEndpoint(s));
            }
        }
        for m in &self.moving_obstacles {
            inside("moving obstacle", m.cell)?;
            if m.cadence == 0 {
                return Err(ConfigError::ZeroCadence);
            }
            if m.spawn_tick == 0 && (starts.contains(&m.cell) || dests.contains(&m.cell)) {
                return Err(ConfigError::ObstacleOnEndpoint(m.cell));
            }
        }
        Ok(area)
    }
}

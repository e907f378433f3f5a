//! Geometry of the discretized flying zone.
//!
//! Every location is an integer grid cell. Physical meters only show up when
//! an [`Area`] is validated: the uniform spacing between consecutive cells has
//! to sit between the safe distance and the sensing range of the drones.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WorldError {
    #[error("grid spacing {dis} m violates safe distance {dis_s} m <= dis <= sensing range {sen_r} m")]
    SpacingViolation { dis: f64, dis_s: f64, sen_r: f64 },
    #[error("every area extent must be at least 2, got {0:?}")]
    DegenerateExtent([u32; 3]),
    #[error("safety parameters must be non-negative and finite")]
    InvalidSafetyParams,
    #[error("cell {0} is outside the area")]
    OutOfBounds(Cell),
}

/// A grid location. Physical position is `index * dis` meters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub x: i32,
    pub y: i32,
    pub z: i32,
}

impl Cell {
    pub const fn new(x: i32, y: i32, z: i32) -> Self {
        Cell { x, y, z }
    }

    pub fn coord(&self, axis: Axis) -> i32 {
        match axis {
            Axis::X => self.x,
            Axis::Y => self.y,
            Axis::Z => self.z,
        }
    }

    /// The cell one step along `axis` in direction `delta` (+1 or -1).
    pub fn step(&self, axis: Axis, delta: i32) -> Cell {
        let mut c = *self;
        match axis {
            Axis::X => c.x += delta,
            Axis::Y => c.y += delta,
            Axis::Z => c.z += delta,
        }
        c
    }

    /// True if `other` differs in exactly one coordinate by exactly one.
    pub fn is_adjacent(&self, other: &Cell) -> bool {
        manhattan(*self, *other) == 1
    }

    /// Largest per-axis offset.
    pub fn chebyshev(&self, other: &Cell) -> u32 {
        let d = [
            (self.x - other.x).unsigned_abs(),
            (self.y - other.y).unsigned_abs(),
            (self.z - other.z).unsigned_abs(),
        ];
        d.into_iter().max().unwrap_or(0)
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.x, self.y, self.z)
    }
}

impl From<(i32, i32, i32)> for Cell {
    fn from((x, y, z): (i32, i32, i32)) -> Self {
        Cell { x, y, z }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];
}

/// Steps in a city-block (6-connected) grid between two cells.
pub fn manhattan(a: Cell, b: Cell) -> u32 {
    (a.x - b.x).unsigned_abs() + (a.y - b.y).unsigned_abs() + (a.z - b.z).unsigned_abs()
}

/// Speed, latency and processing-time figures the safe distance depends on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SafetyParams {
    /// Maximum UAV speed, m/s.
    speed: f64,
    /// Wireless communication latency, s.
    latency: f64,
    /// Obstacle detection and processing time, s.
    processing: f64,
}

impl SafetyParams {
    pub fn new(speed: f64, latency: f64, processing: f64) -> Result<Self, WorldError> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if !(ok(speed) && ok(latency) && ok(processing)) {
            return Err(WorldError::InvalidSafetyParams);
        }
        Ok(SafetyParams { speed, latency, processing })
    }

    pub fn speed(&self) -> f64 {
        self.speed
    }

    pub fn latency(&self) -> f64 {
        self.latency
    }

    pub fn processing(&self) -> f64 {
        self.processing
    }
}

impl Default for SafetyParams {
    /// 5 m/s, 0.2 s latency, 0.5 s processing; a 9 m safe distance.
    fn default() -> Self {
        SafetyParams { speed: 5.0, latency: 0.2, processing: 0.5 }
    }
}

/// Minimum spacing for two drones closing head-on: `2 * Sp * (2 * Cl + Pt)`.
pub fn safe_distance(p: &SafetyParams) -> f64 {
    2.0 * p.speed * (2.0 * p.latency + p.processing)
}

/// The flying zone: a `dim_x * dim_y * dim_z` grid with uniform spacing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Area {
    dims: [u32; 3],
    dis: f64,
    sen_r: f64,
    dis_s: f64,
}

impl Area {
    pub fn new(dims: [u32; 3], dis: f64, sen_r: f64, params: SafetyParams) -> Result<Self, WorldError> {
        if dims.iter().any(|&d| d < 2) {
            return Err(WorldError::DegenerateExtent(dims));
        }
        let dis_s = safe_distance(&params);
        if !(dis_s <= dis && dis <= sen_r) {
            return Err(WorldError::SpacingViolation { dis, dis_s, sen_r });
        }
        Ok(Area { dims, dis, sen_r, dis_s })
    }

    /// A cube of side `n` with 10 m spacing, 30 m sensing and default safety figures.
    pub fn cube(n: u32) -> Result<Self, WorldError> {
        Area::new([n, n, n], 10.0, 30.0, SafetyParams::default())
    }

    pub fn dims(&self) -> [u32; 3] {
        self.dims
    }

    pub fn spacing(&self) -> f64 {
        self.dis
    }

    pub fn sensing_range(&self) -> f64 {
        self.sen_r
    }

    pub fn safe_distance(&self) -> f64 {
        self.dis_s
    }

    /// Number of cells (M).
    pub fn len(&self) -> usize {
        self.dims.iter().map(|&d| d as usize).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, c: Cell) -> bool {
        c.x >= 0
            && c.y >= 0
            && c.z >= 0
            && (c.x as u32) < self.dims[0]
            && (c.y as u32) < self.dims[1]
            && (c.z as u32) < self.dims[2]
    }

    pub fn check(&self, c: Cell) -> Result<(), WorldError> {
        if self.contains(c) {
            Ok(())
        } else {
            Err(WorldError::OutOfBounds(c))
        }
    }

    /// Dense index of an in-bounds cell, x fastest.
    pub fn index(&self, c: Cell) -> usize {
        debug_assert!(self.contains(c));
        let [dx, dy, _] = self.dims;
        (c.x as usize) + (dx as usize) * ((c.y as usize) + (dy as usize) * (c.z as usize))
    }

    pub fn cell_at(&self, index: usize) -> Cell {
        let [dx, dy, _] = self.dims;
        let (dx, dy) = (dx as usize, dy as usize);
        Cell::new((index % dx) as i32, ((index / dx) % dy) as i32, (index / (dx * dy)) as i32)
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.len()).map(|i| self.cell_at(i))
    }

    /// In-bounds axis neighbours, ordered -x, +x, -y, +y, -z, +z.
    pub fn neighbors(&self, c: Cell) -> Result<Vec<Cell>, WorldError> {
        self.check(c)?;
        Ok(self.neighbors_unchecked(c))
    }

    pub(crate) fn neighbors_unchecked(&self, c: Cell) -> Vec<Cell> {
        let mut out = Vec::with_capacity(6);
        for axis in Axis::ALL {
            for delta in [-1, 1] {
                let n = c.step(axis, delta);
                if self.contains(n) {
                    out.push(n);
                }
            }
        }
        out
    }
}

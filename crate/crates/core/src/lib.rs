//! Deterministic, tick-based simulator for online collision-free navigation of
//! UAV swarms on a 3D grid.
//!
//! Drones fly greedily towards their destinations one cell per tick. Location
//! and obstacle-detection events stream through a small complex-event
//! processing store whose proximity joins feed a set of collision prediction
//! rules; cells are guarded by mutually exclusive locks, and drones that cannot
//! proceed redirect, hover or backtrack. RRT and RRT* planners executed
//! open-loop serve as baselines, and the [`harness`] module runs the standard
//! experiments and writes metrics as CSV.
//!
//! ```
//! use swarmgrid::engine::{run_mission, AreaSpec, DroneSpec, SimConfig};
//! use swarmgrid::world::Cell;
//!
//! let cfg = SimConfig::new(
//!     AreaSpec::cube(10),
//!     vec![DroneSpec { start: Cell::new(0, 0, 0), dest: Cell::new(3, 2, 0) }],
//! );
//! let result = run_mission(&cfg).unwrap();
//! assert_eq!(result.routes[0].1.len(), 6);
//! assert!(result.collisions.is_empty());
//! ```

pub mod avoidance;
pub mod baselines;
pub mod cep;
pub mod coordination;
pub mod engine;
pub mod entities;
pub mod harness;
pub mod prediction;
pub mod world;

pub use engine::{run_mission, Algorithm, SimConfig, SimError, SimResult};
pub use world::{manhattan, safe_distance, Area, Cell, SafetyParams};

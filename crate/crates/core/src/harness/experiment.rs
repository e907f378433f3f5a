use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::engine::{AreaSpec, DroneSpec, MovingSpec, SimConfig};
use crate::world::{Area, WorldError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlacementFailure {
    #[error("{needed} distinct cells needed but the area has {available}")]
    TooCrowded { needed: usize, available: usize },
    #[error(transparent)]
    World(#[from] WorldError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExperimentSpec {
    pub id: u8,
    pub dims: [u32; 3],
    pub drones: usize,
    pub statics: usize,
    pub moving: usize,
}

pub const EXPERIMENTS: [ExperimentSpec; 4] = [
    ExperimentSpec { id: 1, dims: [10, 10, 10], drones: 20, statics: 20, moving: 20 },
    ExperimentSpec { id: 2, dims: [20, 20, 20], drones: 50, statics: 50, moving: 50 },
    ExperimentSpec { id: 3, dims: [10, 10, 10], drones: 20, statics: 40, moving: 40 },
    ExperimentSpec { id: 4, dims: [20, 20, 20], drones: 100, statics: 50, moving: 50 },
];

pub fn experiment(id: u8) -> Option<ExperimentSpec> {
    EXPERIMENTS.iter().copied().find(|e| e.id == id)
}

/// Random placement for one run. Starts, destinations and obstacles all get
/// distinct cells; moving obstacles are present from the first tick.
pub fn build_experiment(spec: &ExperimentSpec, seed: u64) -> Result<SimConfig, PlacementFailure> {
    let area_spec = AreaSpec::with_dims(spec.dims);
    let area: Area = area_spec.build()?;
    let needed = 2 * spec.drones + spec.statics + spec.moving;
    if needed > area.len() {
        return Err(PlacementFailure::TooCrowded { needed, available: area.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let cells: Vec<_> = sample(&mut rng, area.len(), needed).into_iter().map(|i| area.cell_at(i)).collect();
    let (starts, rest) = cells.split_at(spec.drones);
    let (dests, rest) = rest.split_at(spec.drones);
    let (statics, moving) = rest.split_at(spec.statics);

    let drones = starts.iter().zip(dests).map(|(&start, &dest)| DroneSpec { start, dest }).collect();
    let mut cfg = SimConfig::new(area_spec, drones);
    cfg.static_obstacles = statics.to_vec();
    cfg.moving_obstacles =
        moving.iter().map(|&cell| MovingSpec { cell, cadence: crate::engine::DEFAULT_CADENCE, spawn_tick: 0 }).collect();
    cfg.seed = seed;
    Ok(cfg)
}

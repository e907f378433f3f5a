//! Grid RRT and RRT* planners, executed open-loop.
//!
//! The planners know every static obstacle and nothing about moving ones.
//! Each drone gets its route up front; execution then replays all routes
//! simultaneously, one step per tick, with no locking, prediction or
//! avoidance. This is an adaptation of the continuous planners to the grid,
//! not a claim about how the original algorithms handle swarms.

use std::collections::{HashMap, HashSet};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::engine::{
    detect_collisions_ground_truth, Algorithm, Occupancy, RunOptions, SimConfig, SimError, SimResult, TraceAction,
    TraceRecord,
};
use crate::entities::{step_moving_obstacle, DroneId, FlightMode, MovingObstacle, ObstacleId};
use crate::world::{manhattan, Area, Axis, Cell};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlanFailure {
    #[error("no route from {start} to {dest} after {iters} iterations")]
    Exhausted { start: Cell, dest: Cell, iters: usize },
    #[error("start and destination coincide at {0}")]
    Degenerate(Cell),
    #[error("endpoint {0} is blocked or outside the area")]
    BlockedEndpoint(Cell),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerConfig {
    /// Probability of sampling the destination instead of a random cell.
    pub goal_bias: f64,
    pub max_iters: usize,
    /// Manhattan radius of the RRT* choose-parent and rewire neighbourhood.
    pub rewire_radius: u32,
    /// Extra RRT* iterations spent improving the tree once the destination
    /// has been reached.
    pub refine_iters: usize,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig { goal_bias: 0.05, max_iters: 100_000, rewire_radius: 3, refine_iters: 2_000 }
    }
}

/// Cells a planner may use: inside the area and free of static obstacles.
#[derive(Debug, Clone)]
pub struct FreeSpace<'a> {
    area: &'a Area,
    blocked: HashSet<Cell>,
    free: Vec<Cell>,
}

impl<'a> FreeSpace<'a> {
    pub fn new(area: &'a Area, statics: &[Cell]) -> Self {
        let blocked: HashSet<Cell> = statics.iter().copied().collect();
        let free = area.cells().filter(|c| !blocked.contains(c)).collect();
        FreeSpace { area, blocked, free }
    }

    pub fn is_free(&self, c: Cell) -> bool {
        self.area.contains(c) && !self.blocked.contains(&c)
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Cell {
        self.free[rng.gen_range(0..self.free.len())]
    }
}

/// Axis-by-axis path from `a` to `b`: x first, then y, then z. Excludes `a`,
/// includes `b`.
pub fn staircase(a: Cell, b: Cell) -> Vec<Cell> {
    let mut out = Vec::with_capacity(manhattan(a, b) as usize);
    let mut c = a;
    for axis in Axis::ALL {
        let target = b.coord(axis);
        while c.coord(axis) != target {
            c = c.step(axis, (target - c.coord(axis)).signum());
            out.push(c);
        }
    }
    out
}

/// Search tree rooted at the start cell. Edges are staircase segments; for
/// plain RRT every edge is a single step.
#[derive(Debug, Clone)]
pub struct PlannerTree {
    nodes: Vec<Cell>,
    parent: Vec<Option<usize>>,
    cost: Vec<u32>,
    children: Vec<Vec<usize>>,
    index: HashMap<Cell, usize>,
}

impl PlannerTree {
    fn new(root: Cell) -> Self {
        PlannerTree {
            nodes: vec![root],
            parent: vec![None],
            cost: vec![0],
            children: vec![vec![]],
            index: [(root, 0)].into_iter().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Cell] {
        &self.nodes
    }

    pub fn parent(&self, i: usize) -> Option<usize> {
        self.parent[i]
    }

    pub fn cost(&self, i: usize) -> u32 {
        self.cost[i]
    }

    pub fn node_of(&self, c: Cell) -> Option<usize> {
        self.index.get(&c).copied()
    }

    fn add(&mut self, cell: Cell, parent: usize) -> usize {
        let i = self.nodes.len();
        self.nodes.push(cell);
        self.parent.push(Some(parent));
        self.cost.push(self.cost[parent] + manhattan(self.nodes[parent], cell));
        self.children.push(vec![]);
        self.children[parent].push(i);
        self.index.insert(cell, i);
        i
    }

    fn reparent(&mut self, i: usize, new_parent: usize) {
        if let Some(old) = self.parent[i] {
            self.children[old].retain(|&k| k != i);
        }
        self.parent[i] = Some(new_parent);
        self.children[new_parent].push(i);
        let new_cost = self.cost[new_parent] + manhattan(self.nodes[new_parent], self.nodes[i]);
        let delta = self.cost[i] - new_cost;
        let mut stack = vec![i];
        while let Some(k) = stack.pop() {
            self.cost[k] -= delta;
            stack.extend(self.children[k].iter().copied());
        }
    }

    /// Tree node closest to `c` in Manhattan distance, lowest index on ties.
    fn nearest(&self, c: Cell, area: &Area) -> usize {
        if self.nodes.len() < 256 {
            return (0..self.nodes.len()).min_by_key(|&i| (manhattan(self.nodes[i], c), i)).unwrap();
        }
        let max_r = area.dims().iter().map(|&d| d as i32).sum::<i32>();
        for r in 0..=max_r {
            let best = shell(c, r).filter_map(|x| self.index.get(&x).copied()).min();
            if let Some(i) = best {
                return i;
            }
        }
        unreachable!("tree is never empty")
    }

    fn within(&self, c: Cell, radius: u32) -> Vec<usize> {
        let mut out: Vec<usize> =
            (0..=radius as i32).flat_map(|r| shell(c, r)).filter_map(|x| self.index.get(&x).copied()).collect();
        out.sort_unstable();
        out
    }

    /// Cells from the root to node `i`, edges expanded.
    pub fn path_to(&self, i: usize) -> Vec<Cell> {
        let mut chain = vec![i];
        while let Some(p) = self.parent[*chain.last().unwrap()] {
            chain.push(p);
        }
        chain.reverse();
        let mut route = vec![self.nodes[chain[0]]];
        for w in chain.windows(2) {
            route.extend(staircase(self.nodes[w[0]], self.nodes[w[1]]));
        }
        remove_loops(route)
    }

    /// Every node's cost equals its parent's plus the edge length.
    pub fn is_consistent(&self) -> bool {
        (0..self.nodes.len()).all(|i| match self.parent[i] {
            None => self.cost[i] == 0,
            Some(p) => self.cost[i] == self.cost[p] + manhattan(self.nodes[p], self.nodes[i]),
        })
    }
}

/// Cells at exactly Manhattan distance `r` from `c`.
fn shell(c: Cell, r: i32) -> impl Iterator<Item = Cell> {
    (-r..=r).flat_map(move |dx| {
        let rest = r - dx.abs();
        (-rest..=rest).flat_map(move |dy| {
            let dz = rest - dy.abs();
            let zs = if dz == 0 { vec![0] } else { vec![-dz, dz] };
            zs.into_iter().map(move |dz| Cell::new(c.x + dx, c.y + dy, c.z + dz))
        })
    })
}

/// Cuts out any cycle, keeping the route connected.
pub fn remove_loops(route: Vec<Cell>) -> Vec<Cell> {
    let mut out: Vec<Cell> = Vec::with_capacity(route.len());
    let mut pos: HashMap<Cell, usize> = HashMap::new();
    for c in route {
        if let Some(&k) = pos.get(&c) {
            for dropped in out.drain(k + 1..) {
                pos.remove(&dropped);
            }
        } else {
            pos.insert(c, out.len());
            out.push(c);
        }
    }
    out
}

fn check_endpoints(start: Cell, dest: Cell, space: &FreeSpace<'_>) -> Result<(), PlanFailure> {
    if start == dest {
        return Err(PlanFailure::Degenerate(start));
    }
    for c in [start, dest] {
        if !space.is_free(c) {
            return Err(PlanFailure::BlockedEndpoint(c));
        }
    }
    Ok(())
}

/// One random single-axis step from `from` towards `sample` into a free cell
/// not yet in the tree.
fn extend<R: Rng + ?Sized>(
    tree: &PlannerTree,
    from: usize,
    sample: Cell,
    space: &FreeSpace<'_>,
    rng: &mut R,
) -> Option<Cell> {
    let here = tree.nodes[from];
    let d = manhattan(here, sample);
    let options: Vec<Cell> = Axis::ALL
        .into_iter()
        .filter(|&a| here.coord(a) != sample.coord(a))
        .map(|a| here.step(a, (sample.coord(a) - here.coord(a)).signum()))
        .filter(|&n| manhattan(n, sample) < d && space.is_free(n) && !tree.index.contains_key(&n))
        .collect();
    if options.is_empty() {
        None
    } else {
        Some(options[rng.gen_range(0..options.len())])
    }
}

fn draw<R: Rng + ?Sized>(dest: Cell, space: &FreeSpace<'_>, cfg: &PlannerConfig, rng: &mut R) -> Cell {
    if rng.gen_bool(cfg.goal_bias) {
        dest
    } else {
        space.sample(rng)
    }
}

/// Grid RRT. Returns the tree path from `start` to `dest`.
pub fn rrt_plan<R: Rng + ?Sized>(
    start: Cell,
    dest: Cell,
    space: &FreeSpace<'_>,
    cfg: &PlannerConfig,
    rng: &mut R,
) -> Result<Vec<Cell>, PlanFailure> {
    rrt_tree(start, dest, space, cfg, rng).map(|(tree, goal)| tree.path_to(goal))
}

pub fn rrt_tree<R: Rng + ?Sized>(
    start: Cell,
    dest: Cell,
    space: &FreeSpace<'_>,
    cfg: &PlannerConfig,
    rng: &mut R,
) -> Result<(PlannerTree, usize), PlanFailure> {
    check_endpoints(start, dest, space)?;
    let mut tree = PlannerTree::new(start);
    for _ in 0..cfg.max_iters {
        let sample = draw(dest, space, cfg, rng);
        let near = tree.nearest(sample, space.area);
        if let Some(new) = extend(&tree, near, sample, space, rng) {
            let i = tree.add(new, near);
            if new == dest {
                return Ok((tree, i));
            }
        }
    }
    Err(PlanFailure::Exhausted { start, dest, iters: cfg.max_iters })
}

/// Grid RRT*: RRT plus choose-parent and rewiring within `rewire_radius`,
/// connecting nodes by obstacle-free staircase segments.
pub fn rrt_star_plan<R: Rng + ?Sized>(
    start: Cell,
    dest: Cell,
    space: &FreeSpace<'_>,
    cfg: &PlannerConfig,
    rng: &mut R,
) -> Result<Vec<Cell>, PlanFailure> {
    rrt_star_tree(start, dest, space, cfg, rng).map(|(tree, goal)| tree.path_to(goal))
}

pub fn rrt_star_tree<R: Rng + ?Sized>(
    start: Cell,
    dest: Cell,
    space: &FreeSpace<'_>,
    cfg: &PlannerConfig,
    rng: &mut R,
) -> Result<(PlannerTree, usize), PlanFailure> {
    check_endpoints(start, dest, space)?;
    let clear = |a: Cell, b: Cell| staircase(a, b).into_iter().all(|c| space.is_free(c));
    let mut tree = PlannerTree::new(start);
    let mut goal: Option<usize> = None;
    let mut budget = cfg.max_iters;
    let mut iter = 0;
    while iter < budget {
        iter += 1;
        let sample = draw(dest, space, cfg, rng);
        let nearest = tree.nearest(sample, space.area);
        let Some(new) = extend(&tree, nearest, sample, space, rng) else { continue };
        let near = tree.within(new, cfg.rewire_radius);

        let mut parent = nearest;
        let mut best = tree.cost[nearest] + 1;
        for &p in &near {
            let c = tree.cost[p] + manhattan(tree.nodes[p], new);
            if c < best && clear(tree.nodes[p], new) {
                parent = p;
                best = c;
            }
        }
        let i = tree.add(new, parent);

        for &q in &near {
            if q == parent {
                continue;
            }
            let c = tree.cost[i] + manhattan(new, tree.nodes[q]);
            if c < tree.cost[q] && clear(new, tree.nodes[q]) {
                tree.reparent(q, i);
            }
        }

        if new == dest && goal.is_none() {
            goal = Some(i);
            budget = budget.min(iter + cfg.refine_iters);
        }
    }
    match goal {
        Some(g) => Ok((tree, g)),
        None => Err(PlanFailure::Exhausted { start, dest, iters: cfg.max_iters }),
    }
}

/// Replays precomputed routes simultaneously, one step per tick. Drones that
/// reach the end of their route stay there. Moving obstacles wander as usual
/// but do not dodge drones.
pub fn execute_open_loop<R: Rng + ?Sized>(
    routes: &[Vec<Cell>],
    statics: &[Cell],
    moving: &[MovingObstacle],
    area: &Area,
    rng: &mut R,
    trace: bool,
) -> (Vec<crate::engine::CollisionRecord>, u64, Vec<TraceRecord>) {
    let ticks = routes.iter().map(|r| r.len().saturating_sub(1)).max().unwrap_or(0) as u64;
    let mut moving: Vec<MovingObstacle> = moving.to_vec();
    let statics_occ: Vec<(ObstacleId, Cell)> =
        statics.iter().enumerate().map(|(i, &c)| (ObstacleId(i as u32), c)).collect();
    let at = |t: u64| -> Vec<(DroneId, Cell)> {
        routes
            .iter()
            .enumerate()
            .map(|(i, r)| (DroneId(i as u32), r[(t as usize).min(r.len() - 1)]))
            .collect()
    };
    let occupancy = |t: u64, moving: &[MovingObstacle]| {
        let mut obstacles = statics_occ.clone();
        obstacles.extend(moving.iter().filter(|m| m.active_at(t)).map(|m| (m.id, m.cell)));
        Occupancy { drones: at(t), obstacles }
    };

    let mut collisions = Vec::new();
    let mut records = if trace { vec![TraceRecord::Area { dims: area.dims() }] } else { vec![] };
    let none = HashSet::new();
    for t in 1..=ticks {
        let before = occupancy(t - 1, &moving);
        for m in moving.iter_mut() {
            if m.alive {
                *m = step_moving_obstacle(m, t, rng, area, &none, false);
            }
        }
        let after = occupancy(t, &moving);
        collisions.extend(detect_collisions_ground_truth(&before, &after, t));
        if trace {
            for (i, r) in routes.iter().enumerate() {
                let k = t as usize;
                records.push(TraceRecord::Drone {
                    tick: t,
                    drone: DroneId(i as u32),
                    mode: FlightMode::Normal,
                    cell: r[k.min(r.len() - 1)],
                    action: if k < r.len() { TraceAction::Advance } else { TraceAction::Parked },
                    cause: None,
                    predictions: vec![],
                });
            }
            records.push(TraceRecord::Obstacles {
                tick: t,
                statics: statics.to_vec(),
                moving: moving.iter().filter(|m| m.active_at(t)).map(|m| m.cell).collect(),
            });
        }
    }
    (collisions, ticks, records)
}

/// Plans every drone with the configured baseline, then executes the routes
/// open-loop.
pub fn run_baseline(cfg: &SimConfig, options: RunOptions) -> Result<SimResult, SimError> {
    run_baseline_with(cfg, options, &PlannerConfig::default())
}

pub fn run_baseline_with(cfg: &SimConfig, options: RunOptions, planner: &PlannerConfig) -> Result<SimResult, SimError> {
    let area = cfg.validate()?;
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let space = FreeSpace::new(&area, &cfg.static_obstacles);
    let mut routes = Vec::with_capacity(cfg.drones.len());
    for d in &cfg.drones {
        let route = match cfg.algorithm {
            Algorithm::Rrt => rrt_plan(d.start, d.dest, &space, planner, &mut rng)?,
            Algorithm::RrtStar => rrt_star_plan(d.start, d.dest, &space, planner, &mut rng)?,
            Algorithm::Proposed => return Err(SimError::WrongAlgorithm(Algorithm::Proposed)),
        };
        routes.push(route);
    }
    let offset = cfg.static_obstacles.len() as u32;
    let moving: Vec<MovingObstacle> = cfg
        .moving_obstacles
        .iter()
        .enumerate()
        .map(|(i, m)| MovingObstacle::new(ObstacleId(offset + i as u32), m.cell, m.cadence, m.spawn_tick))
        .collect();
    let (collisions, ticks, trace) =
        execute_open_loop(&routes, &cfg.static_obstacles, &moving, &area, &mut rng, options.trace);
    let wall_ms = started.elapsed().as_secs_f64() * 1e3;
    Ok(SimResult {
        algorithm: cfg.algorithm,
        routes: routes.into_iter().enumerate().map(|(i, r)| (DroneId(i as u32), r)).collect(),
        collisions,
        ticks,
        wall_ms,
        trace,
        events: vec![],
        matches: vec![],
    })
}

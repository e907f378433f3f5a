//! Plans one route around a wall with grid RRT and RRT* and compares lengths.
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use swarmgrid::baselines::{rrt_plan, rrt_star_plan, FreeSpace, PlannerConfig};
use swarmgrid::world::{Area, Cell};

fn main() {
    let area = Area::cube(12).unwrap();
    let wall: Vec<Cell> = (0..12).flat_map(|y| (0..10).map(move |z| Cell::new(6, y, z))).collect();
    let space = FreeSpace::new(&area, &wall);
    let (start, dest) = (Cell::new(1, 5, 0), Cell::new(10, 5, 0));
    let cfg = PlannerConfig::default();
    for seed in 0..3 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rrt = rrt_plan(start, dest, &space, &cfg, &mut rng).unwrap();
        let star = rrt_star_plan(start, dest, &space, &cfg, &mut rng).unwrap();
        println!("seed {seed}: RRT {} moves, RRT* {} moves", rrt.len() - 1, star.len() - 1);
    }
}

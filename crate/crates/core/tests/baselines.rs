mod common;

use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use swarmgrid::baselines::{rrt_plan, rrt_star_plan, rrt_star_tree, FreeSpace, PlanFailure, PlannerConfig};
use swarmgrid::engine::{run_mission, Algorithm};
use swarmgrid::harness::{build_experiment, EXPERIMENTS};
use swarmgrid::world::{manhattan, Area, Cell};

#[test]
fn rrt_star_is_optimal_in_empty_space() {
    let area = Area::cube(10).unwrap();
    let space = FreeSpace::new(&area, &[]);
    let (start, dest) = (Cell::new(0, 0, 0), Cell::new(9, 9, 9));
    let optimal = (0..10)
        .filter(|&seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let route = rrt_star_plan(start, dest, &space, &PlannerConfig::default(), &mut rng).unwrap();
            route.len() - 1 == manhattan(start, dest) as usize
        })
        .count();
    assert!(optimal >= 9, "{optimal}/10 optimal");
}

#[test]
fn routes_avoid_statics_and_connect() {
    let area = Area::cube(10).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let statics: Vec<Cell> = (0..10).flat_map(|y| (0..9).map(move |z| Cell::new(5, y, z))).collect();
    let blocked: HashSet<Cell> = statics.iter().copied().collect();
    let space = FreeSpace::new(&area, &statics);
    let (start, dest) = (Cell::new(1, 2, 2), Cell::new(8, 2, 2));
    let shortest = common::bfs_distance(&area, &blocked, start, dest).unwrap();
    for plan in [rrt_plan, rrt_star_plan] {
        let route = plan(start, dest, &space, &PlannerConfig::default(), &mut rng).unwrap();
        assert_eq!((route[0], *route.last().unwrap()), (start, dest));
        assert!(common::is_connected(&route));
        assert!(route.iter().all(|c| !blocked.contains(c)));
        assert!(route.len() > shortest);
    }
}

#[test]
fn rrt_star_tree_costs_stay_consistent() {
    let area = Area::cube(8).unwrap();
    let statics = [Cell::new(3, 3, 3), Cell::new(4, 4, 4), Cell::new(2, 5, 1)];
    let space = FreeSpace::new(&area, &statics);
    for seed in 0..5 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (tree, goal) =
            rrt_star_tree(Cell::new(0, 0, 0), Cell::new(7, 7, 7), &space, &PlannerConfig::default(), &mut rng).unwrap();
        assert!(tree.is_consistent());
        assert_eq!(tree.cost(goal) as usize, tree.path_to(goal).len() - 1);
    }
}

#[test]
fn exhausted_budget_is_reported() {
    let area = Area::cube(6).unwrap();
    let dest = Cell::new(5, 5, 5);
    let statics = area.neighbors(dest).unwrap();
    let space = FreeSpace::new(&area, &statics);
    let cfg = PlannerConfig { max_iters: 500, ..Default::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    assert!(matches!(
        rrt_plan(Cell::new(0, 0, 0), dest, &space, &cfg, &mut rng),
        Err(PlanFailure::Exhausted { iters: 500, .. })
    ));
}

#[test]
fn baseline_runs_are_deterministic_and_ordered() {
    let (mut rrt, mut star) = (0.0, 0.0);
    for seed in 0..4 {
        let mut cfg = build_experiment(&EXPERIMENTS[0], seed).unwrap();
        cfg.algorithm = Algorithm::Rrt;
        let a = run_mission(&cfg).unwrap();
        assert_eq!(a.routes, run_mission(&cfg).unwrap().routes);
        rrt += a.routes.iter().map(|(_, r)| r.len()).sum::<usize>() as f64;
        cfg.algorithm = Algorithm::RrtStar;
        let b = run_mission(&cfg).unwrap();
        star += b.routes.iter().map(|(_, r)| r.len()).sum::<usize>() as f64;
        for (i, (_, route)) in b.routes.iter().enumerate() {
            assert_eq!(route[0], cfg.drones[i].start);
            assert_eq!(*route.last().unwrap(), cfg.drones[i].dest);
        }
    }
    assert!(star <= rrt, "RRT* {star} vs RRT {rrt}");
}

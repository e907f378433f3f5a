//! Two drones flying head-on along the same corridor while a third has to
//! find its way past a low wall. Prints every tick where a drone did anything
//! other than advance.
use swarmgrid::engine::{run_mission_with, AreaSpec, DroneSpec, RunOptions, SimConfig, TraceAction, TraceRecord};
use swarmgrid::world::Cell;

fn main() {
    let c = Cell::new;
    let mut cfg = SimConfig::new(
        AreaSpec::cube(8),
        vec![
            DroneSpec { start: c(0, 3, 3), dest: c(7, 3, 3) },
            DroneSpec { start: c(7, 3, 3), dest: c(0, 3, 3) },
            DroneSpec { start: c(2, 0, 0), dest: c(4, 7, 1) },
        ],
    );
    cfg.static_obstacles = (2..=4).flat_map(|x| (0..=1).map(move |z| c(x, 4, z))).collect();
    cfg.seed = 3;
    let r = run_mission_with(&cfg, RunOptions { trace: true, ..Default::default() }).unwrap();
    for rec in &r.trace {
        if let TraceRecord::Drone { tick, drone, cell, action, cause, .. } = rec {
            if !matches!(action, TraceAction::Advance | TraceAction::Parked) {
                println!("tick {tick:>2} {drone} {action:?} to {cell} ({cause:?})");
            }
        }
    }
    for (id, route) in &r.routes {
        println!("{id}: {} moves", route.len() - 1);
    }
    println!("collisions: {}", r.collisions.len());
}

//! The four-UAV walkthrough: prints the first five ticks and the final routes.
use swarmgrid::engine::{run_mission_with, RunOptions, TraceRecord};
use swarmgrid::harness::four_uav_example;

fn main() {
    let r = run_mission_with(&four_uav_example(), RunOptions { trace: true, ..Default::default() }).unwrap();
    for rec in r.trace.iter().filter(|t| (1..=5).contains(&t.tick())) {
        if let TraceRecord::Drone { tick, drone, cell, action, cause, predictions, .. } = rec {
            println!("tick {tick} {drone} {action:?} {cell} {cause:?} {predictions:?}");
        }
    }
    for (id, route) in &r.routes {
        let cells: Vec<String> = route.iter().map(ToString::to_string).collect();
        println!("{id}: {}", cells.join(" "));
    }
    println!("ticks={} collisions={}", r.ticks, r.collisions.len());
}

//! Writes a JSON-lines trace, reads it back and renders the last tick.
use swarmgrid::engine::{run_mission_with, RunOptions};
use swarmgrid::harness::{build_experiment, read_trace, render_replay, write_trace, EXPERIMENTS};

fn main() {
    let cfg = build_experiment(&EXPERIMENTS[0], 42).unwrap();
    let r = run_mission_with(&cfg, RunOptions { trace: true, ..Default::default() }).unwrap();
    let mut buf = Vec::new();
    write_trace(&r.trace, &mut buf).unwrap();
    println!("{} records, {} bytes", r.trace.len(), buf.len());
    let records = read_trace(&buf[..]).unwrap();
    let last: Vec<_> = records.into_iter().filter(|t| t.tick() == r.ticks).collect();
    print!("{}", render_replay(&last));
}

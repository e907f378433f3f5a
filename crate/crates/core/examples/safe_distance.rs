//! Safe distance for a few drone profiles, and the grid it implies.
use swarmgrid::world::{safe_distance, Area, SafetyParams};

fn main() {
    for (speed, latency, processing) in [(5.0, 0.2, 0.5), (10.0, 0.1, 0.3), (2.0, 0.5, 1.0)] {
        let p = SafetyParams::new(speed, latency, processing).unwrap();
        println!("Sp={speed} Cl={latency} Pt={processing} -> {:.2} m", safe_distance(&p));
    }
    let area = Area::cube(10).unwrap();
    println!("10x10x10 zone: {} cells", area.len());
}

//! Runs one of the standard experiments for all three algorithms and prints
//! the batch summaries. Pass the experiment id (1-4) as the first argument.
use swarmgrid::engine::Algorithm;
use swarmgrid::harness::{experiment, run_batch, BatchOptions};

fn main() {
    let id: u8 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(1);
    let spec = experiment(id).expect("experiment id must be 1-4");
    println!("experiment {id}: {:?} cells, {} drones", spec.dims, spec.drones);
    for alg in [Algorithm::Proposed, Algorithm::Rrt, Algorithm::RrtStar] {
        let report = run_batch(&spec, alg, &BatchOptions::default()).unwrap();
        let s = report.summary;
        println!(
            "{alg:>9}: ARL {:.2} LLR {:.2} NC {:.2} T {:.1} ms ({} of {} completed)",
            s.arl, s.llr, s.nc, s.t_ms, s.completed, s.runs
        );
    }
}

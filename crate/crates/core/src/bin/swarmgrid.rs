use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use swarmgrid::engine::{run_mission_with, Algorithm, RunOptions, SimError};
use swarmgrid::harness::{
    compute_metrics, experiment, read_scenario, read_trace, render_replay, run_batch, write_csv, write_trace,
    BatchOptions, HarnessError, Timing,
};

#[derive(Parser)]
#[command(name = "swarmgrid", version, about = "UAV swarm grid simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        /// Write a JSON-lines trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run one of the standard experiments several times and write a CSV.
    Experiment {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
        id: u8,
        #[arg(long, default_value = "proposed")]
        algorithm: Algorithm,
        #[arg(long, default_value_t = 10)]
        runs: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Write 0 instead of measured time, for reproducible output.
        #[arg(long)]
        no_timing: bool,
    },
    /// Print a trace as ASCII grid slices.
    Replay {
        #[arg(long)]
        trace: PathBuf,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cmd: Command) -> Result<ExitCode, HarnessError> {
    match cmd {
        Command::Run { scenario, trace } => {
            let cfg = read_scenario(&scenario)?;
            let opts = RunOptions { trace: trace.is_some(), ..Default::default() };
            let (result, code) = match run_mission_with(&cfg, opts) {
                Ok(r) => (r, 0),
                Err(SimError::Timeout { result, max_ticks, unarrived }) => {
                    eprintln!("timeout: {unarrived} drones short after {max_ticks} ticks");
                    (*result, 2)
                }
                Err(e) => return Err(e.into()),
            };
            if let Some(path) = trace {
                write_trace(&result.trace, BufWriter::new(File::create(path)?))?;
            }
            let m = compute_metrics(&result, result.wall_ms);
            println!(
                "algorithm={} ticks={} ARL={:.2} LLR={} NC={} T_ms={:.1}",
                result.algorithm, result.ticks, m.arl, m.llr, m.nc, m.t_ms
            );
            Ok(ExitCode::from(code))
        }
        Command::Experiment { id, algorithm, runs, seed, out, no_timing } => {
            let spec = experiment(id).expect("id range checked by the parser");
            let timing = if no_timing { Timing::Disabled } else { Timing::Wall };
            let report = run_batch(&spec, algorithm, &BatchOptions { runs, base_seed: seed, timing })?;
            write_csv(&report.rows, BufWriter::new(File::create(&out)?))?;
            let s = report.summary;
            println!(
                "experiment={id} algorithm={algorithm} runs={} completed={} ARL={:.2} LLR={:.2} NC={:.2} T_ms={:.1}",
                s.runs, s.completed, s.arl, s.llr, s.nc, s.t_ms
            );
            Ok(ExitCode::from(if report.timeouts() > 0 { 2 } else { 0 }))
        }
        Command::Replay { trace } => {
            let records = read_trace(BufReader::new(File::open(trace)?))?;
            print!("{}", render_replay(&records));
            Ok(ExitCode::SUCCESS)
        }
    }
}

use std::io::{Read, Write};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::experiment::{build_experiment, ExperimentSpec};
use super::metrics::{compute_metrics, Metrics};
use super::HarnessError;
use crate::engine::{run_mission, Algorithm, SimError};

/// Whether `T_ms` holds measured wall-clock time or a fixed zero. Zero makes
/// CSV output byte-for-byte reproducible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Timing {
    #[default]
    Wall,
    Disabled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BatchOptions {
    pub runs: u32,
    pub base_seed: u64,
    pub timing: Timing,
}

impl Default for BatchOptions {
    fn default() -> Self {
        BatchOptions { runs: 10, base_seed: 0, timing: Timing::Wall }
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub run: u32,
    #[serde(with = "algorithm_name")]
    pub algorithm: Algorithm,
    pub experiment: u8,
    #[serde(rename = "ARL")]
    pub arl: f64,
    #[serde(rename = "LLR")]
    pub llr: u32,
    #[serde(rename = "NC")]
    pub nc: u32,
    #[serde(rename = "T_ms")]
    pub t_ms: f64,
    pub ticks: u64,
    /// 1 when the run hit `max_ticks` before every drone arrived.
    pub timeouts: u32,
}

impl RunRow {
    pub fn metrics(&self) -> Metrics {
        Metrics { arl: self.arl, llr: self.llr, nc: self.nc, t_ms: self.t_ms }
    }
}

mod algorithm_name {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    use crate::engine::Algorithm;

    pub fn serialize<S: Serializer>(a: &Algorithm, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(a.name())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Algorithm, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }
}

/// Means over the runs that finished.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub runs: u32,
    pub completed: u32,
    pub arl: f64,
    pub llr: f64,
    pub nc: f64,
    pub t_ms: f64,
    pub ticks: f64,
    /// Collisions summed over every run, timed-out ones included.
    pub total_nc: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchReport {
    pub spec: ExperimentSpec,
    pub algorithm: Algorithm,
    pub rows: Vec<RunRow>,
    pub summary: Summary,
}

impl BatchReport {
    pub fn timeouts(&self) -> u32 {
        self.rows.iter().map(|r| r.timeouts).sum()
    }
}

/// Seed of run `run` in a batch. Runs with the same index share placements
/// across algorithms.
pub fn derive_seed(base_seed: u64, run: u32) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_word_pos(2 * run as u128);
    rng.next_u64()
}

pub fn run_one(spec: &ExperimentSpec, algorithm: Algorithm, run: u32, seed: u64, timing: Timing) -> Result<RunRow, HarnessError> {
    let mut cfg = build_experiment(spec, seed)?;
    cfg.algorithm = algorithm;
    let (result, timeouts) = match run_mission(&cfg) {
        Ok(r) => (r, 0),
        Err(SimError::Timeout { result, .. }) => (*result, 1),
        Err(e) => return Err(e.into()),
    };
    let wall = match timing {
        Timing::Wall => result.wall_ms,
        Timing::Disabled => 0.0,
    };
    let m = compute_metrics(&result, wall);
    Ok(RunRow {
        run,
        algorithm,
        experiment: spec.id,
        arl: m.arl,
        llr: m.llr,
        nc: m.nc,
        t_ms: m.t_ms,
        ticks: result.ticks,
        timeouts,
    })
}

pub fn run_batch(spec: &ExperimentSpec, algorithm: Algorithm, opts: &BatchOptions) -> Result<BatchReport, HarnessError> {
    let rows = (0..opts.runs)
        .map(|run| run_one(spec, algorithm, run, derive_seed(opts.base_seed, run), opts.timing))
        .collect::<Result<Vec<_>, _>>()?;
    let summary = summarize(&rows);
    Ok(BatchReport { spec: *spec, algorithm, rows, summary })
}

pub fn summarize(rows: &[RunRow]) -> Summary {
    let done: Vec<&RunRow> = rows.iter().filter(|r| r.timeouts == 0).collect();
    let mean = |f: &dyn Fn(&RunRow) -> f64| {
        if done.is_empty() {
            0.0
        } else {
            done.iter().map(|r| f(r)).sum::<f64>() / done.len() as f64
        }
    };
    Summary {
        runs: rows.len() as u32,
        completed: done.len() as u32,
        arl: mean(&|r| r.arl),
        llr: mean(&|r| r.llr as f64),
        nc: mean(&|r| r.nc as f64),
        t_ms: mean(&|r| r.t_ms),
        ticks: mean(&|r| r.ticks as f64),
        total_nc: rows.iter().map(|r| r.nc).sum(),
    }
}

pub fn write_csv<W: Write>(rows: &[RunRow], out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    let mut sorted: Vec<&RunRow> = rows.iter().collect();
    sorted.sort_by_key(|r| r.run);
    for r in sorted {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<RunRow>, HarnessError> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<Result<Vec<RunRow>, _>>()?)
}

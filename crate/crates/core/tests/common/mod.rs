//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::{HashMap, HashSet, VecDeque};

use rand::Rng;
use swarmgrid::cep::{DroneLocEvent, Event, MObsEvent, MatchKind, Millis, ProximityMatch, SObsEvent, WindowStore};
use swarmgrid::coordination::{arbitrate, LockTable};
use swarmgrid::entities::{DroneId, ObstacleId};
use swarmgrid::world::{Area, Cell};

// ---------------------------------------------------------------- CEP oracle

/// Random timed event sequence over a small cube so that joins are common.
pub fn random_events<R: Rng>(rng: &mut R, len: usize) -> Vec<(Event, Millis)> {
    let mut now: Millis = 0;
    let mut out = Vec::with_capacity(len);
    let cell = |rng: &mut R| Cell::new(rng.gen_range(0..5), rng.gen_range(0..5), rng.gen_range(0..5));
    for _ in 0..len {
        // mostly small steps, sometimes a jump past the short windows
        now += match rng.gen_range(0..20) {
            0 => rng.gen_range(900..1500),
            1..=5 => 0,
            _ => rng.gen_range(1..120),
        };
        let e = match rng.gen_range(0..10) {
            0..=5 => Event::DroneLoc(DroneLocEvent { drone: DroneId(rng.gen_range(0..6)), cell: cell(rng), t: now }),
            6..=7 => Event::StaticObs(SObsEvent { obstacle: ObstacleId(rng.gen_range(0..4)), cell: cell(rng) }),
            _ => Event::MovingObs(MObsEvent { obstacle: ObstacleId(rng.gen_range(10..14)), cell: cell(rng), t: now }),
        };
        out.push((e, now));
    }
    out
}

fn near(a: Cell, b: Cell, r: i32) -> bool {
    let d = [a.x - b.x, a.y - b.y, a.z - b.z];
    d.iter().all(|v| v.abs() <= r) && d.contains(&0)
}

fn retention(e: &Event) -> Millis {
    match e {
        Event::DroneLoc(_) | Event::MovingObs(_) => 1_000,
        Event::StaticObs(_) => 3_600_000,
    }
}

fn pair_row(arriving: &Event, earlier: &Event) -> Option<ProximityMatch> {
    let row = |kind, d: &DroneLocEvent, other: u32, oc: Cell| ProximityMatch {
        kind,
        subject: d.drone,
        other,
        subject_cell: d.cell,
        other_cell: oc,
    };
    match (arriving, earlier) {
        (Event::DroneLoc(a), Event::DroneLoc(b)) => {
            (a.drone != b.drone && near(a.cell, b.cell, 2)).then(|| row(MatchKind::DroneDrone, a, b.drone.0, b.cell))
        }
        (Event::DroneLoc(a), Event::StaticObs(o)) | (Event::StaticObs(o), Event::DroneLoc(a)) => {
            near(a.cell, o.cell, 1).then(|| row(MatchKind::DroneStatic, a, o.obstacle.0, o.cell))
        }
        (Event::DroneLoc(a), Event::MovingObs(o)) | (Event::MovingObs(o), Event::DroneLoc(a)) => {
            near(a.cell, o.cell, 2).then(|| row(MatchKind::DroneMoving, a, o.obstacle.0, o.cell))
        }
        _ => None,
    }
}

/// Quadratic reference: for every arrival, scan every earlier accepted event
/// still inside its window.
pub fn brute_force_matches(events: &[(Event, Millis)]) -> Vec<(usize, ProximityMatch)> {
    let mut accepted: Vec<bool> = Vec::with_capacity(events.len());
    let mut out = Vec::new();
    for (i, (e, now)) in events.iter().enumerate() {
        let live = |j: usize| accepted[j] && now - events[j].1 < retention(&events[j].0);
        if let Event::StaticObs(_) = e {
            if (0..i).any(|j| live(j) && events[j].0 == *e) {
                accepted.push(false);
                continue;
            }
        }
        for (j, (earlier, _)) in events.iter().enumerate().take(i) {
            if live(j) {
                out.extend(pair_row(e, earlier).map(|m| (i, m)));
            }
        }
        accepted.push(true);
    }
    out.sort();
    out
}

pub fn windowed_matches(events: &[(Event, Millis)]) -> Vec<(usize, ProximityMatch)> {
    let mut store = WindowStore::default();
    let mut out: Vec<(usize, ProximityMatch)> = Vec::new();
    for (i, (e, now)) in events.iter().enumerate() {
        out.extend(store.ingest(*e, *now).into_iter().map(|m| (i, m)));
    }
    out.sort();
    out
}

// ----------------------------------------------------------- lock model

/// Runs `ops` random acquire/release/arbitrate operations against a
/// [`LockTable`] and a plain shadow model, checking after every step that no
/// cell has two holders and that both agree. Returns the number of checks.
pub fn lock_property_run<R: Rng>(rng: &mut R, ops: usize) -> Result<usize, String> {
    const DRONES: u32 = 8;
    const CELLS: i32 = 12;
    let mut table = LockTable::new();
    let mut model: HashMap<Cell, DroneId> = HashMap::new();
    let held = |model: &HashMap<Cell, DroneId>, d: DroneId| model.values().filter(|&&h| h == d).count();
    let mut checks = 0;
    for step in 0..ops {
        match rng.gen_range(0..10) {
            0..=4 => {
                let d = DroneId(rng.gen_range(0..DRONES));
                let c = Cell::new(rng.gen_range(0..CELLS), 0, 0);
                let expect = match model.get(&c) {
                    Some(&h) => h == d,
                    None => held(&model, d) < 2,
                };
                let got = table.try_acquire(d, c);
                if got != expect {
                    return Err(format!("step {step}: acquire({d},{c}) = {got}, model says {expect}"));
                }
                if got {
                    model.insert(c, d);
                }
            }
            5..=7 => {
                let d = DroneId(rng.gen_range(0..DRONES));
                let c = Cell::new(rng.gen_range(0..CELLS), 0, 0);
                let expect = model.get(&c) == Some(&d);
                let got = table.release(d, c).is_ok();
                if got != expect {
                    return Err(format!("step {step}: release({d},{c}) = {got}, model says {expect}"));
                }
                if got {
                    model.remove(&c);
                }
            }
            _ => {
                let n = rng.gen_range(1..=DRONES) as usize;
                let mut ids: Vec<u32> = (0..DRONES).collect();
                let requests: Vec<(DroneId, Cell)> = (0..n)
                    .map(|k| {
                        let pick = rng.gen_range(k..ids.len());
                        ids.swap(k, pick);
                        (DroneId(ids[k]), Cell::new(rng.gen_range(0..CELLS), 0, 0))
                    })
                    .collect();
                let results = arbitrate(&mut table, &requests, rng);
                let mut winners: HashMap<Cell, Vec<DroneId>> = HashMap::new();
                for &(d, c) in &requests {
                    if results[&d] {
                        winners.entry(c).or_default().push(d);
                    }
                }
                for (c, ws) in &winners {
                    let fresh: Vec<_> = ws.iter().filter(|&&d| model.get(c) != Some(&d)).collect();
                    if ws.len() > 1 {
                        return Err(format!("step {step}: {c} granted to {ws:?}"));
                    }
                    for &&d in &fresh {
                        model.insert(*c, d);
                    }
                }
                for &(d, c) in &requests {
                    let justified = matches!(model.get(&c), Some(&h) if h != d) || held(&model, d) >= 2;
                    if !results[&d] && !justified {
                        return Err(format!("step {step}: {d} refused free cell {c}"));
                    }
                }
            }
        }
        // no doubly-held cell, and agreement with the model
        let mut owners: HashMap<Cell, DroneId> = HashMap::new();
        for d in 0..DRONES {
            let d = DroneId(d);
            let cells = table.held_by(d);
            if cells.len() > 2 {
                return Err(format!("step {step}: {d} holds {} cells", cells.len()));
            }
            for &c in cells {
                if let Some(other) = owners.insert(c, d) {
                    return Err(format!("step {step}: {c} held by {other} and {d}"));
                }
            }
        }
        if owners != model {
            return Err(format!("step {step}: table and model disagree"));
        }
        checks += 1;
    }
    Ok(checks)
}

// -------------------------------------------------------- shortest paths

/// Breadth-first shortest path length through free cells.
pub fn bfs_distance(area: &Area, blocked: &HashSet<Cell>, start: Cell, dest: Cell) -> Option<usize> {
    let mut dist: HashMap<Cell, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    dist.insert(start, 0);
    queue.push_back(start);
    while let Some(c) = queue.pop_front() {
        if c == dest {
            return dist.get(&c).copied();
        }
        let d = dist[&c];
        for n in area.neighbors(c).unwrap() {
            if !blocked.contains(&n) && !dist.contains_key(&n) {
                dist.insert(n, d + 1);
                queue.push_back(n);
            }
        }
    }
    None
}

pub fn is_connected(route: &[Cell]) -> bool {
    route.windows(2).all(|w| swarmgrid::manhattan(w[0], w[1]) <= 1)
}

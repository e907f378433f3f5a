//! Feeds a short stream of location and detection events through the
//! windowed proximity joins and prints what each sink receives.
use swarmgrid::cep::{DroneLocEvent, MObsEvent, MatchKind, SObsEvent, WindowStore};
use swarmgrid::entities::{DroneId, ObstacleId};
use swarmgrid::world::Cell;

fn main() {
    let mut store = WindowStore::default();
    for kind in [MatchKind::DroneDrone, MatchKind::DroneStatic, MatchKind::DroneMoving] {
        store.register_sink(kind, move |m| println!("  sink {kind}: {} near {} at {}", m.subject, m.other, m.other_cell));
    }

    let c = Cell::new;
    let loc = |d, cell, t| DroneLocEvent { drone: DroneId(d), cell, t };
    let stream: Vec<(swarmgrid::cep::Event, u64)> = vec![
        (SObsEvent { obstacle: ObstacleId(0), cell: c(2, 2, 0) }.into(), 0),
        (loc(0, c(1, 2, 0), 0).into(), 0),
        (loc(1, c(3, 2, 0), 0).into(), 0),
        (MObsEvent { obstacle: ObstacleId(1), cell: c(3, 4, 0), t: 50 }.into(), 50),
        (loc(1, c(3, 3, 0), 50).into(), 50),
        // past the one second window: only the static obstacle is remembered
        (loc(0, c(1, 2, 0), 1_200).into(), 1_200),
    ];
    for (event, now) in stream {
        println!("t={now} {event:?}");
        let rows = store.ingest(event, now);
        println!("  {} match(es)", rows.len());
    }
}

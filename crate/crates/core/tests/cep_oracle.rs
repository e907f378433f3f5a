mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use swarmgrid::cep::{DroneLocEvent, Event, MatchKind, WindowStore};
use swarmgrid::entities::DroneId;
use swarmgrid::world::Cell;

use common::{brute_force_matches, random_events, windowed_matches};

#[test]
fn windowed_equals_brute_force_on_random_streams() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut total = 0;
    for case in 0..100 {
        let len = 1 + (case * 37) % 1000;
        let events = random_events(&mut rng, len);
        let expected = brute_force_matches(&events);
        assert_eq!(windowed_matches(&events), expected, "case {case}");
        total += expected.len();
    }
    // the generator must actually exercise the joins
    assert!(total > 10_000, "only {total} matches");
}

#[test]
fn sinks_see_exactly_the_returned_rows() {
    use std::cell::RefCell;
    use std::rc::Rc;

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let events = random_events(&mut rng, 600);
    let mut store = WindowStore::default();
    let seen: Rc<RefCell<Vec<_>>> = Rc::default();
    for kind in [MatchKind::DroneDrone, MatchKind::DroneStatic, MatchKind::DroneMoving] {
        let seen = Rc::clone(&seen);
        store.register_sink(kind, move |m| seen.borrow_mut().push(*m));
    }
    let mut returned = Vec::new();
    for (e, now) in &events {
        returned.extend(store.ingest(*e, *now));
    }
    assert_eq!(*seen.borrow(), returned);
}

proptest! {
    #[test]
    fn oracle_agrees_for_arbitrary_seeds(seed in any::<u64>(), len in 1usize..300) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let events = random_events(&mut rng, len);
        prop_assert_eq!(windowed_matches(&events), brute_force_matches(&events));
    }

    #[test]
    fn drone_drone_rows_are_symmetric_in_predicate(
        a in (0i32..6, 0i32..6, 0i32..6), b in (0i32..6, 0i32..6, 0i32..6)
    ) {
        let mut s1 = WindowStore::default();
        let ea = DroneLocEvent { drone: DroneId(1), cell: Cell::new(a.0, a.1, a.2), t: 0 };
        let eb = DroneLocEvent { drone: DroneId(2), cell: Cell::new(b.0, b.1, b.2), t: 0 };
        s1.ingest(Event::DroneLoc(ea), 0);
        let forward = s1.ingest(Event::DroneLoc(eb), 0).len();
        let mut s2 = WindowStore::default();
        s2.ingest(Event::DroneLoc(eb), 0);
        let backward = s2.ingest(Event::DroneLoc(ea), 0).len();
        prop_assert_eq!(forward, backward);
    }
}

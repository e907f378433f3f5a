//! Cell locks: at most one holder per cell, and random arbitration when
//! several drones ask for the same cell in one tick.
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use swarmgrid::coordination::{arbitrate, LockTable};
use swarmgrid::entities::DroneId;
use swarmgrid::world::Cell;

fn main() {
    let mut table = LockTable::new();
    let a = Cell::new(0, 0, 0);
    let b = Cell::new(1, 0, 0);
    println!("d0 takes {a}: {}", table.try_acquire(DroneId(0), a));
    println!("d1 takes {a}: {}", table.try_acquire(DroneId(1), a));
    println!("d1 takes {b}: {}", table.try_acquire(DroneId(1), b));

    let contested = Cell::new(5, 5, 5);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let requests: Vec<_> = (2..6).map(|d| (DroneId(d), contested)).collect();
    let granted = arbitrate(&mut table, &requests, &mut rng);
    for (d, ok) in granted {
        println!("{d} -> {contested}: {}", if ok { "granted" } else { "refused" });
    }
    println!("holder of {contested}: {:?}", table.holder(contested));
}

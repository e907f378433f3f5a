//! Mutually-exclusive cell locks.
//!
//! Every drone holds the lock on its current cell at all times. Before moving
//! it must acquire the lock on the next cell; after the move it releases the
//! previous one. A drone never holds more than two cells.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::entities::DroneId;
use crate::world::Cell;

pub const MAX_HELD: usize = 2;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LockError {
    #[error("drone {drone} released {cell}, which it does not hold (holder: {holder:?})")]
    NotHolder { drone: DroneId, cell: Cell, holder: Option<DroneId> },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LockTable {
    holders: HashMap<Cell, DroneId>,
    held: HashMap<DroneId, Vec<Cell>>,
}

impl LockTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn holder(&self, cell: Cell) -> Option<DroneId> {
        self.holders.get(&cell).copied()
    }

    pub fn is_locked_by_other(&self, cell: Cell, drone: DroneId) -> bool {
        matches!(self.holder(cell), Some(h) if h != drone)
    }

    pub fn held_by(&self, drone: DroneId) -> &[Cell] {
        self.held.get(&drone).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn len(&self) -> usize {
        self.holders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.holders.is_empty()
    }

    /// Locks `cell` for `drone`. Re-acquiring an own cell succeeds. Fails,
    /// leaving the table untouched, if another drone holds the cell or the
    /// drone already holds its two cells.
    pub fn try_acquire(&mut self, drone: DroneId, cell: Cell) -> bool {
        match self.holders.get(&cell) {
            Some(&h) if h == drone => true,
            Some(_) => false,
            None => {
                let held = self.held.entry(drone).or_default();
                if held.len() >= MAX_HELD {
                    return false;
                }
                held.push(cell);
                self.holders.insert(cell, drone);
                true
            }
        }
    }

    pub fn release(&mut self, drone: DroneId, cell: Cell) -> Result<(), LockError> {
        match self.holders.get(&cell) {
            Some(&h) if h == drone => {
                self.holders.remove(&cell);
                let held = self.held.get_mut(&drone).expect("holder index out of sync");
                held.retain(|c| *c != cell);
                if held.is_empty() {
                    self.held.remove(&drone);
                }
                Ok(())
            }
            holder => Err(LockError::NotHolder { drone, cell, holder: holder.copied() }),
        }
    }

    /// Checks the table's internal consistency: both indices agree and no
    /// drone exceeds its allowance.
    pub fn is_consistent(&self) -> bool {
        let forward: usize = self.held.values().map(Vec::len).sum();
        forward == self.holders.len()
            && self.held.iter().all(|(d, cells)| {
                cells.len() <= MAX_HELD && cells.iter().all(|c| self.holders.get(c) == Some(d))
            })
    }
}

/// Resolves simultaneous lock requests: they are tried one at a time in a
/// random order drawn from `rng`, so each contested cell has exactly one
/// winner and nobody is systematically favoured.
pub fn arbitrate<R: Rng + ?Sized>(
    table: &mut LockTable,
    requests: &[(DroneId, Cell)],
    rng: &mut R,
) -> BTreeMap<DroneId, bool> {
    let mut order: Vec<usize> = (0..requests.len()).collect();
    order.shuffle(rng);
    let mut out = BTreeMap::new();
    for i in order {
        let (drone, cell) = requests[i];
        debug_assert!(!out.contains_key(&drone), "one request per drone");
        out.insert(drone, table.try_acquire(drone, cell));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const A: DroneId = DroneId(1);
    const B: DroneId = DroneId(2);

    fn c(x: i32) -> Cell {
        Cell::new(x, 0, 0)
    }

    #[test]
    fn acquire_examples() {
        let mut t = LockTable::new();
        assert!(t.try_acquire(A, c(1)));
        let snapshot = t.clone();
        assert!(!t.try_acquire(B, c(1)));
        assert_eq!(t, snapshot);
        assert!(t.try_acquire(A, c(1)));
        assert_eq!(t.held_by(A), &[c(1)]);
    }

    #[test]
    fn at_most_two_cells() {
        let mut t = LockTable::new();
        assert!(t.try_acquire(A, c(1)));
        assert!(t.try_acquire(A, c(2)));
        assert!(!t.try_acquire(A, c(3)));
        t.release(A, c(1)).unwrap();
        assert!(t.try_acquire(A, c(3)));
    }

    #[test]
    fn release_examples() {
        let mut t = LockTable::new();
        t.try_acquire(A, c(1));
        t.release(A, c(1)).unwrap();
        assert_eq!(t.holder(c(1)), None);
        assert_eq!(t.release(A, c(1)), Err(LockError::NotHolder { drone: A, cell: c(1), holder: None }));
        t.try_acquire(A, c(2));
        assert_eq!(t.release(B, c(2)), Err(LockError::NotHolder { drone: B, cell: c(2), holder: Some(A) }));
        assert_eq!(t.holder(c(2)), Some(A));
    }

    #[test]
    fn arbitrate_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut t = LockTable::new();
        let r = arbitrate(&mut t, &[(A, c(5)), (B, c(5))], &mut rng);
        assert_eq!(r.values().filter(|&&w| w).count(), 1);

        let mut t = LockTable::new();
        let reqs: Vec<_> = (0..10).map(|i| (DroneId(i), c(i as i32))).collect();
        let r = arbitrate(&mut t, &reqs, &mut rng);
        assert!(r.values().all(|&w| w));
    }

    #[test]
    fn two_way_tie_is_fair() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let trials = 10_000;
        let mut a_wins = 0;
        for _ in 0..trials {
            let mut t = LockTable::new();
            if arbitrate(&mut t, &[(A, c(5)), (B, c(5))], &mut rng)[&A] {
                a_wins += 1;
            }
        }
        let share = a_wins as f64 / trials as f64;
        assert!((share - 0.5).abs() <= 0.05, "share = {share}");
    }

    #[test]
    fn arbitrate_is_deterministic() {
        let reqs: Vec<_> = (0..20).map(|i| (DroneId(i), c((i % 4) as i32))).collect();
        let run = |seed| {
            let mut t = LockTable::new();
            arbitrate(&mut t, &reqs, &mut ChaCha8Rng::seed_from_u64(seed))
        };
        assert_eq!(run(9), run(9));
    }

    #[test]
    fn protocol_leaves_one_cell_per_drone() {
        let mut t = LockTable::new();
        t.try_acquire(A, c(0));
        t.try_acquire(B, c(5));
        // acquire next, move, release previous
        assert!(t.try_acquire(A, c(1)));
        assert!(t.try_acquire(B, c(4)));
        t.release(A, c(0)).unwrap();
        t.release(B, c(5)).unwrap();
        assert_eq!(t.held_by(A), &[c(1)]);
        assert_eq!(t.held_by(B), &[c(4)]);
        assert!(t.is_consistent());
    }
}

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::engine::TraceRecord;
use crate::world::Cell;

fn drone_glyph(id: u32) -> char {
    std::char::from_digit(id % 36, 36).unwrap()
}

/// Renders a trace as ASCII, one block per tick and one grid per occupied z
/// level, y growing upwards. Drones print as their id in base 36 (mod 36),
/// static obstacles as `#`, moving ones as `o`, shared cells as `*`.
pub fn render_replay(records: &[TraceRecord]) -> String {
    let mut dims = [0u32; 3];
    let mut ticks: BTreeMap<u64, BTreeMap<Cell, char>> = BTreeMap::new();
    let mut put = |tick: u64, cell: Cell, glyph: char| {
        ticks.entry(tick).or_default().entry(cell).and_modify(|g| *g = '*').or_insert(glyph);
    };
    for r in records {
        match r {
            TraceRecord::Area { dims: d } => dims = *d,
            TraceRecord::Drone { tick, drone, cell, .. } => put(*tick, *cell, drone_glyph(drone.0)),
            TraceRecord::Obstacles { tick, statics, moving } => {
                for &c in statics {
                    put(*tick, c, '#');
                }
                for &c in moving {
                    put(*tick, c, 'o');
                }
            }
        }
    }
    if dims == [0, 0, 0] {
        // no header: size the grid to what the trace touches
        for cells in ticks.values() {
            for c in cells.keys() {
                dims[0] = dims[0].max(c.x as u32 + 1);
                dims[1] = dims[1].max(c.y as u32 + 1);
                dims[2] = dims[2].max(c.z as u32 + 1);
            }
        }
    }

    let mut out = String::new();
    for (tick, cells) in &ticks {
        writeln!(out, "tick {tick}").unwrap();
        for z in 0..dims[2] as i32 {
            if !cells.keys().any(|c| c.z == z) {
                continue;
            }
            writeln!(out, "  z={z}").unwrap();
            for y in (0..dims[1] as i32).rev() {
                out.push_str("  ");
                for x in 0..dims[0] as i32 {
                    out.push(*cells.get(&Cell::new(x, y, z)).unwrap_or(&'.'));
                }
                out.push('\n');
            }
        }
    }
    out
}

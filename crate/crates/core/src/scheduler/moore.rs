//! Closed 3D space-filling curve built from eight Hilbert curves.
//!
//! The octants are visited along a Gray-code cycle. Each octant holds a
//! Hilbert curve of one order less, mapped by a cube symmetry chosen so that
//! it starts next to where the previous octant's curve ended and ends next to
//! where the next one starts. The last cell is adjacent to the first.

use std::sync::OnceLock;

use crate::geom::Point3;

/// Bits per axis used by the scheduler.
pub const MOORE_ORDER: u32 = 10;

/// Octants in visiting order; consecutive entries (cyclically) differ in one bit.
const OCTANT_CYCLE: [u8; 8] = [0b000, 0b001, 0b011, 0b010, 0b110, 0b111, 0b101, 0b100];

/// A cube symmetry: output axis `d` reads input axis `perm[d]`, mirrored when
/// bit `d` of `flip` is set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Symmetry {
    perm: [usize; 3],
    flip: u8,
}

impl Symmetry {
    fn all() -> Vec<Symmetry> {
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        perms
            .iter()
            .flat_map(|&perm| (0..8).map(move |flip| Symmetry { perm, flip }))
            .collect()
    }

    fn apply_corner(&self, c: u8) -> u8 {
        (0..3).fold(0, |acc, d| {
            let bit = (c >> self.perm[d]) & 1 ^ (self.flip >> d) & 1;
            acc | bit << d
        })
    }

    /// Inverse map on cells of a cube with `side` cells per axis.
    fn invert_cell(&self, y: [u32; 3], side: u32) -> [u32; 3] {
        let mut x = [0; 3];
        for d in 0..3 {
            let v = if (self.flip >> d) & 1 == 1 { side - 1 - y[d] } else { y[d] };
            x[self.perm[d]] = v;
        }
        x
    }
}

/// Hilbert index of a cell in a cube of `2^bits` cells per axis.
fn hilbert_index(mut x: [u32; 3], bits: u32) -> u64 {
    if bits == 0 {
        return 0;
    }
    let m = 1u32 << (bits - 1);
    let mut q = m;
    while q > 1 {
        let p = q - 1;
        for i in 0..3 {
            if x[i] & q != 0 {
                x[0] ^= p;
            } else {
                let t = (x[0] ^ x[i]) & p;
                x[0] ^= t;
                x[i] ^= t;
            }
        }
        q >>= 1;
    }
    for i in 1..3 {
        x[i] ^= x[i - 1];
    }
    let mut t = 0;
    q = m;
    while q > 1 {
        if x[2] & q != 0 {
            t ^= q - 1;
        }
        q >>= 1;
    }
    for v in x.iter_mut() {
        *v ^= t;
    }
    let mut h = 0u64;
    for b in (0..bits).rev() {
        for v in x {
            h = (h << 1) | u64::from((v >> b) & 1);
        }
    }
    h
}

/// Corner bits of the cell where the Hilbert curve of the given order ends;
/// it always starts at the origin.
fn hilbert_end_corner(bits: u32) -> u8 {
    let side = 1u32 << bits;
    let last = (1u64 << (3 * bits)) - 1;
    (0..8u8)
        .find(|&c| {
            let x = [0, 1, 2].map(|d| if (c >> d) & 1 == 1 { side - 1 } else { 0 });
            hilbert_index(x, bits) == last
        })
        .expect("Hilbert curves end at a corner")
}

/// Corner of `to` (as bits) touching corner `from_corner` of the adjacent octant `from`.
fn entry_corner(from: u8, from_corner: u8, to: u8) -> Option<u8> {
    let axis = (from ^ to).trailing_zeros();
    let up = (to >> axis) & 1 == 1;
    // Leaving `from` through the face towards `to`.
    let on_face = ((from_corner >> axis) & 1 == 1) == up;
    on_face.then_some(from_corner ^ (1 << axis))
}

fn solve(end: u8) -> [Symmetry; 8] {
    let syms = Symmetry::all();
    fn rec(i: usize, entry: u8, end: u8, syms: &[Symmetry], chosen: &mut Vec<Symmetry>, first_entry: u8) -> bool {
        if i == 8 {
            return true;
        }
        for s in syms {
            if s.apply_corner(0) != entry {
                continue;
            }
            let exit = s.apply_corner(end);
            let (here, next) = (OCTANT_CYCLE[i], OCTANT_CYCLE[(i + 1) % 8]);
            let Some(next_entry) = entry_corner(here, exit, next) else {
                continue;
            };
            if i == 7 && next_entry != first_entry {
                continue;
            }
            chosen.push(*s);
            if rec(i + 1, next_entry, end, syms, chosen, first_entry) {
                return true;
            }
            chosen.pop();
        }
        false
    }
    for first in 0..8u8 {
        let mut chosen = Vec::new();
        if rec(0, first, end, &syms, &mut chosen, first) {
            return chosen.try_into().unwrap();
        }
    }
    unreachable!("a closed octant arrangement always exists")
}

fn octant_maps(sub_bits: u32) -> &'static [Symmetry; 8] {
    static MAPS: [OnceLock<[Symmetry; 8]>; 20] = [const { OnceLock::new() }; 20];
    MAPS[sub_bits as usize].get_or_init(|| solve(hilbert_end_corner(sub_bits)))
}

/// Index of an integer cell along the closed curve over `2^order` cells per axis.
pub fn moore_index_of_cell(cell: [u32; 3], order: u32) -> u64 {
    assert!((1..=20).contains(&order));
    let sub = order - 1;
    let side = 1u32 << sub;
    let octant = (0..3).fold(0u8, |acc, d| acc | (((cell[d] >> sub) & 1) as u8) << d);
    let pos = OCTANT_CYCLE.iter().position(|&o| o == octant).unwrap() as u64;
    if sub == 0 {
        return pos;
    }
    let local = cell.map(|c| c & (side - 1));
    let sym = octant_maps(sub)[pos as usize];
    (pos << (3 * sub)) | hilbert_index(sym.invert_cell(local, side), sub)
}

/// Curve index of a position in `bbox`, clamped to the box.
pub fn moore_index(position: &Point3, bbox: &(Point3, Point3), order: u32) -> u64 {
    let n = 1u64 << order;
    let cell = [0, 1, 2].map(|d| {
        let (lo, hi) = (bbox.0[d], bbox.1[d]);
        let ext = hi - lo;
        if ext <= 0.0 {
            return 0;
        }
        let t = ((position[d] - lo) / ext * n as f64).floor();
        t.clamp(0.0, (n - 1) as f64) as u32
    });
    moore_index_of_cell(cell, order)
}

use std::ops::Range;

use super::moore::{moore_index, MOORE_ORDER};
use crate::geom::Point3;
use crate::mesh::{Mesh, TetId};

/// A contiguous range of curve indices handled by one worker.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub moore_range: Range<u64>,
    /// Bad tetrahedra owned by this partition, in ascending id order.
    pub owned_bad_tets: Vec<TetId>,
    pub worker_id: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Partitioning {
    pub partitions: Vec<Partition>,
    /// Bad tetrahedra with fewer than three vertices in any single partition.
    pub suspended: Vec<TetId>,
    /// Owning partition of every tetrahedron slot; `partitions.len()` marks
    /// tetrahedra owned by nobody (and deleted slots).
    pub bucket: Vec<u32>,
}

fn bounding_box(mesh: &Mesh) -> (Point3, Point3) {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for v in mesh.vertices() {
        for d in 0..3 {
            lo[d] = lo[d].min(v.position[d]);
            hi[d] = hi[d].max(v.position[d]);
        }
    }
    (lo, hi)
}

/// Recomputes the curve index of every vertex.
pub fn assign_moore_indices(mesh: &mut Mesh) {
    let bbox = bounding_box(mesh);
    #[cfg(feature = "parallel")]
    let keys: Vec<u64> = {
        use rayon::prelude::*;
        mesh.vertices()
            .par_iter()
            .map(|v| moore_index(&v.position, &bbox, MOORE_ORDER))
            .collect()
    };
    #[cfg(not(feature = "parallel"))]
    let keys: Vec<u64> = mesh
        .vertices()
        .iter()
        .map(|v| moore_index(&v.position, &bbox, MOORE_ORDER))
        .collect();
    mesh.set_moore_indices(&keys);
}

fn sorted_keys(mesh: &Mesh, t: TetId) -> [u64; 4] {
    let mut k = mesh.tet(t).vertices.map(|v| mesh.vertex(v).moore_index);
    k.sort_unstable();
    k
}

/// Splits the curve into `k` ranges holding about the same number of bad
/// tetrahedra and assigns every tetrahedron to the range holding at least
/// three of its vertices. Uses the curve indices stored on the vertices.
pub fn make_partitions(mesh: &Mesh, bad_tets: &[TetId], k: usize) -> Partitioning {
    let k = k.max(1);
    let end = 1u64 << (3 * MOORE_ORDER);
    // Any range holding three of four sorted keys holds the second one.
    let mut second: Vec<u64> = bad_tets.iter().map(|&t| sorted_keys(mesh, t)[1]).collect();
    second.sort_unstable();
    let mut starts = vec![0u64];
    if !second.is_empty() {
        for j in 1..k {
            let s = second[j * second.len() / k];
            if s > *starts.last().unwrap() {
                starts.push(s);
            }
        }
    }
    let n = starts.len();
    let range_of = |key: u64| starts.partition_point(|&s| s <= key) - 1;
    let owner = |t: TetId| -> Option<usize> {
        let keys = sorted_keys(mesh, t);
        let j = range_of(keys[1]);
        let hi = if j + 1 < n { starts[j + 1] } else { end };
        let inside = keys.iter().filter(|&&x| x >= starts[j] && x < hi).count();
        (inside >= 3).then_some(j)
    };

    let mut bucket = vec![n as u32; mesh.tet_capacity()];
    for t in mesh.live_tet_ids() {
        if let Some(j) = owner(t) {
            bucket[t.idx()] = j as u32;
        }
    }
    let mut partitions: Vec<Partition> = (0..n)
        .map(|j| Partition {
            moore_range: starts[j]..if j + 1 < n { starts[j + 1] } else { end },
            owned_bad_tets: Vec::new(),
            worker_id: j,
        })
        .collect();
    let mut suspended = Vec::new();
    let mut sorted_bad = bad_tets.to_vec();
    sorted_bad.sort_unstable();
    for t in sorted_bad {
        match bucket[t.idx()] as usize {
            j if j < n => partitions[j].owned_bad_tets.push(t),
            _ => suspended.push(t),
        }
    }
    Partitioning {
        partitions,
        suspended,
        bucket,
    }
}

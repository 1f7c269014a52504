use std::sync::OnceLock;

/// Largest ring handled by edge removal.
pub const MAX_RING: usize = 7;

/// All triangulations of a convex N-gon with vertices `0..N`.
#[derive(Debug, Clone)]
pub struct RingTable {
    pub n: usize,
    /// Every triangle `i < j < k` over the ring, in lexicographic order.
    pub triangles: Vec<[u8; 3]>,
    /// Each triangulation as `n - 2` indices into `triangles`.
    pub triangulations: Vec<Vec<u16>>,
    /// Bit `t` of `masks[i]` is set when triangulation `t` uses triangle `i`.
    pub masks: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct TriangulationTable {
    rings: Vec<RingTable>,
}

impl TriangulationTable {
    /// Table for a ring of `n` vertices, `3 <= n <= 7`.
    pub fn ring(&self, n: usize) -> Option<&RingTable> {
        if (3..=MAX_RING).contains(&n) {
            Some(&self.rings[n - 3])
        } else {
            None
        }
    }
}

fn triangulate(poly: &[u8]) -> Vec<Vec<[u8; 3]>> {
    if poly.len() < 3 {
        return vec![Vec::new()];
    }
    let last = poly.len() - 1;
    let mut out = Vec::new();
    for k in 1..last {
        let left = triangulate(&poly[..=k]);
        let right = triangulate(&poly[k..]);
        let mut apex = [poly[0], poly[k], poly[last]];
        apex.sort_unstable();
        for l in &left {
            for r in &right {
                let mut t = Vec::with_capacity(poly.len() - 2);
                t.extend_from_slice(l);
                t.push(apex);
                t.extend_from_slice(r);
                out.push(t);
            }
        }
    }
    out
}

fn ring_table(n: usize) -> RingTable {
    let mut triangles = Vec::new();
    let mut index = vec![u16::MAX; n * n * n];
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                index[(i * n + j) * n + k] = triangles.len() as u16;
                triangles.push([i as u8, j as u8, k as u8]);
            }
        }
    }
    let poly: Vec<u8> = (0..n as u8).collect();
    let triangulations: Vec<Vec<u16>> = triangulate(&poly)
        .into_iter()
        .map(|t| {
            t.iter()
                .map(|&[i, j, k]| index[(i as usize * n + j as usize) * n + k as usize])
                .collect()
        })
        .collect();
    let mut masks = vec![0u64; triangles.len()];
    for (ti, t) in triangulations.iter().enumerate() {
        for &tri in t {
            masks[tri as usize] |= 1 << ti;
        }
    }
    RingTable {
        n,
        triangles,
        triangulations,
        masks,
    }
}

/// Builds the triangulation tables for rings of 3 to 7 vertices.
pub fn build_triangulation_tables() -> TriangulationTable {
    TriangulationTable {
        rings: (3..=MAX_RING).map(ring_table).collect(),
    }
}

/// Process-wide copy of [`build_triangulation_tables`].
pub fn triangulation_tables() -> &'static TriangulationTable {
    static TABLES: OnceLock<TriangulationTable> = OnceLock::new();
    TABLES.get_or_init(build_triangulation_tables)
}

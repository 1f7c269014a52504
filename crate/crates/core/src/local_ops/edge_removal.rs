use super::{triangulation_tables, LocalOpError, OpOutcome, MAX_RING};
use crate::mesh::{Cavity, Mesh, Neighbor, TetId, VertexId};
use crate::quality::gamma;

/// The tetrahedra around an interior edge `ab`, in cyclic order.
///
/// `(a, b, ring[i], ring[i + 1])` is positively oriented and is the vertex set
/// of `ring_tets[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeRing {
    pub edge: [VertexId; 2],
    pub ring: Vec<VertexId>,
    pub ring_tets: Vec<TetId>,
}

/// Why a ring walk stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RingStop {
    /// The edge touches the domain boundary.
    Boundary,
    /// A facet around the edge is a constrained surface triangle.
    Constrained,
    /// More than [`MAX_RING`] tetrahedra share the edge.
    TooLong,
    /// The walk reached another partition.
    Foreign,
}

/// Orders the two remaining vertices of `t` so that `(a, b, c, d)` is an
/// even permutation of its vertices.
fn ring_pair(t: &[VertexId; 4], a: VertexId, b: VertexId) -> (VertexId, VertexId) {
    let ia = t.iter().position(|&v| v == a).unwrap();
    let ib = t.iter().position(|&v| v == b).unwrap();
    let mut rest = (0..4).filter(|&i| i != ia && i != ib);
    let (k, l) = (rest.next().unwrap(), rest.next().unwrap());
    let perm = [ia, ib, k, l];
    let inversions = (0..4)
        .flat_map(|i| (i + 1..4).map(move |j| (i, j)))
        .filter(|&(i, j)| perm[i] > perm[j])
        .count();
    if inversions % 2 == 0 {
        (t[k], t[l])
    } else {
        (t[l], t[k])
    }
}

impl Mesh {
    /// Walks around edge `ab` starting from tetrahedron `start`, which must contain both.
    pub fn edge_ring(&self, start: TetId, a: VertexId, b: VertexId) -> Result<EdgeRing, RingStop> {
        let mut ring = Vec::new();
        let mut ring_tets = Vec::new();
        let mut t = start;
        let (mut c, _) = ring_pair(&self.tet(t).vertices, a, b);
        loop {
            let tet = self.tet(t);
            let (c0, d) = ring_pair(&tet.vertices, a, b);
            debug_assert_eq!(c0, c);
            ring.push(c);
            ring_tets.push(t);
            if ring.len() > MAX_RING {
                return Err(RingStop::TooLong);
            }
            let f = tet.local_index(c).unwrap();
            if tet.is_constrained(f) {
                return Err(RingStop::Constrained);
            }
            match tet.neighbor(f) {
                Neighbor::Boundary => return Err(RingStop::Boundary),
                Neighbor::Foreign => return Err(RingStop::Foreign),
                Neighbor::Tet(n) => {
                    if n == start {
                        break;
                    }
                    t = n;
                    c = d;
                }
            }
        }
        Ok(EdgeRing {
            edge: [a, b],
            ring,
            ring_tets,
        })
    }
}

/// Vertex sets of the two tetrahedra joining ring triangle `(i, j, k)` to the edge ends.
pub(crate) fn triangle_tets(ring: &EdgeRing, tri: [u8; 3]) -> [[VertexId; 4]; 2] {
    let [a, b] = ring.edge;
    let r = |i: u8| ring.ring[i as usize];
    let (ri, rj, rk) = (r(tri[0]), r(tri[1]), r(tri[2]));
    [[a, ri, rj, rk], [b, ri, rk, rj]]
}

pub(crate) fn ring_quality(mesh: &Mesh, ring: &EdgeRing) -> f64 {
    ring.ring_tets
        .iter()
        .map(|&t| mesh.tet(t).quality)
        .fold(f64::INFINITY, f64::min)
}

/// Removes edge `ab` by retriangulating its ring, if some triangulation
/// strictly improves the worst tetrahedron around it.
pub fn edge_removal(mesh: &mut Mesh, a: VertexId, b: VertexId) -> Result<OpOutcome, LocalOpError> {
    let star = match mesh.vertex_star(a) {
        Ok(s) => s,
        Err(_) => return Ok(OpOutcome::Suspended),
    };
    let start = star
        .into_iter()
        .find(|&t| mesh.tet(t).contains(b))
        .ok_or(LocalOpError::MissingEdge(a, b))?;
    edge_removal_at(mesh, start, a, b)
}

/// [`edge_removal`] with a known tetrahedron incident to the edge.
pub fn edge_removal_at(mesh: &mut Mesh, start: TetId, a: VertexId, b: VertexId) -> Result<OpOutcome, LocalOpError> {
    let ring = match mesh.edge_ring(start, a, b) {
        Ok(r) => r,
        Err(RingStop::Foreign) => return Ok(OpOutcome::Suspended),
        Err(_) => return Ok(OpOutcome::Rejected),
    };
    let table = triangulation_tables().ring(ring.ring.len()).expect("ring size checked by the walk");
    let q_old = ring_quality(mesh, &ring);

    let mut alive: u64 = if table.triangulations.len() == 64 {
        u64::MAX
    } else {
        (1u64 << table.triangulations.len()) - 1
    };
    let mut tri_quality = vec![0.0; table.triangles.len()];
    for (i, &tri) in table.triangles.iter().enumerate() {
        if alive & table.masks[i] == 0 {
            continue;
        }
        let [up, down] = triangle_tets(&ring, tri);
        let q = gamma(&mesh.points_of(&up)).min(gamma(&mesh.points_of(&down)));
        tri_quality[i] = q;
        if q <= q_old {
            alive &= !table.masks[i];
            if alive == 0 {
                return Ok(OpOutcome::Rejected);
            }
        }
    }
    let mut best: Option<(usize, f64)> = None;
    let mut bits = alive;
    while bits != 0 {
        let t = bits.trailing_zeros() as usize;
        bits &= bits - 1;
        let q = table.triangulations[t]
            .iter()
            .map(|&i| tri_quality[i as usize])
            .fold(f64::INFINITY, f64::min);
        if best.is_none_or(|(_, bq)| q > bq) {
            best = Some((t, q));
        }
    }
    let Some((t, q_new)) = best else {
        return Ok(OpOutcome::Rejected);
    };
    let new_tets: Vec<[VertexId; 4]> = table.triangulations[t]
        .iter()
        .flat_map(|&i| triangle_tets(&ring, table.triangles[i as usize]))
        .collect();
    let cavity = Cavity::collect(mesh, &ring.ring_tets)?;
    mesh.replace_cavity(&cavity, &new_tets)?;
    Ok(OpOutcome::Applied {
        before: q_old,
        after: q_new,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Point3;
    use crate::quality::orient3d;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Edge from (0,0,h) to (0,0,-h) surrounded by `ring` points; the mesh is
    /// just the ring of tetrahedra around it.
    pub(crate) fn ring_mesh(ring: &[Point3], h: f64) -> Mesh {
        let mut pos = vec![[0.0, 0.0, h], [0.0, 0.0, -h]];
        pos.extend_from_slice(ring);
        let n = ring.len() as u32;
        let mut tets = Vec::new();
        for i in 0..n {
            let (c, d) = (2 + i, 2 + (i + 1) % n);
            let p = [pos[0], pos[1], pos[c as usize], pos[d as usize]];
            if orient3d(&p[0], &p[1], &p[2], &p[3]).is_positive() {
                tets.push([0, 1, c, d]);
            } else {
                tets.push([0, 1, d, c]);
            }
        }
        Mesh::new(pos, tets, Vec::new()).unwrap()
    }

    fn random_ring(rng: &mut ChaCha8Rng, n: usize) -> Vec<Point3> {
        // Clockwise seen from +z, so that (a, b, r_i, r_{i+1}) is positive.
        let mut angles: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
        angles.sort_by(|a, b| b.partial_cmp(a).unwrap());
        angles
            .iter()
            .map(|&t| {
                let r = rng.random_range(0.5..1.5);
                [r * t.cos(), r * t.sin(), rng.random_range(-0.4..0.4)]
            })
            .collect()
    }

    /// Recursive enumeration of all triangulations of the polygon `0..n`,
    /// written independently of the production tables.
    fn all_triangulations(poly: &[usize]) -> Vec<Vec<[usize; 3]>> {
        if poly.len() < 3 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        let last = *poly.last().unwrap();
        for k in 1..poly.len() - 1 {
            for l in all_triangulations(&poly[..=k]) {
                for r in all_triangulations(&poly[k..]) {
                    let mut t = l.clone();
                    t.extend(r);
                    let mut tri = [poly[0], poly[k], last];
                    tri.sort();
                    t.push(tri);
                    out.push(t);
                }
            }
        }
        out
    }

    fn oracle_best(pos: &[Point3], n: usize) -> Option<f64> {
        let old = (0..n)
            .map(|i| {
                let p = [pos[0], pos[1], pos[2 + i], pos[2 + (i + 1) % n]];
                gamma(&p)
            })
            .fold(f64::INFINITY, f64::min);
        let poly: Vec<usize> = (0..n).collect();
        let mut best: Option<f64> = None;
        for t in all_triangulations(&poly) {
            let q = t
                .iter()
                .flat_map(|&[i, j, k]| {
                    let r = |x: usize| pos[2 + x];
                    [gamma(&[pos[0], r(i), r(j), r(k)]), gamma(&[pos[1], r(i), r(k), r(j)])]
                })
                .fold(f64::INFINITY, f64::min);
            if q > old && best.is_none_or(|b| q > b) {
                best = Some(q);
            }
        }
        best
    }

    #[test]
    fn ring_walk_orders_ring() {
        let ring: Vec<Point3> = (0..5)
            .map(|i| {
                let t = -(i as f64) * std::f64::consts::TAU / 5.0;
                [t.cos(), t.sin(), 0.0]
            })
            .collect();
        let m = ring_mesh(&ring, 1.0);
        let r = m.edge_ring(TetId(0), VertexId(0), VertexId(1)).unwrap();
        assert_eq!(r.ring.len(), 5);
        for i in 0..5 {
            let p = m.points_of(&[VertexId(0), VertexId(1), r.ring[i], r.ring[(i + 1) % 5]]);
            assert!(orient3d(&p[0], &p[1], &p[2], &p[3]).is_positive());
        }
    }

    #[test]
    fn hull_edge_is_rejected() {
        let mut m = crate::mesh::tests::cube6();
        let before = m.tet_vertex_table();
        let (a, b) = (VertexId(0), VertexId(1));
        let start = m.live_tet_ids().find(|&t| m.tet(t).contains(a) && m.tet(t).contains(b)).unwrap();
        assert!(matches!(
            m.edge_ring(start, a, b),
            Err(RingStop::Boundary | RingStop::Constrained)
        ));
        assert_eq!(edge_removal(&mut m, a, b).unwrap(), OpOutcome::Rejected);
        assert_eq!(m.tet_vertex_table(), before);
    }

    #[test]
    fn long_ring_is_untouched() {
        let ring: Vec<Point3> = (0..8)
            .map(|i| {
                let t = -(i as f64) * std::f64::consts::TAU / 8.0;
                [t.cos(), t.sin(), 0.0]
            })
            .collect();
        let mut m = ring_mesh(&ring, 0.05);
        let before = m.tet_vertex_table();
        assert_eq!(m.edge_ring(TetId(0), VertexId(0), VertexId(1)), Err(RingStop::TooLong));
        assert_eq!(edge_removal(&mut m, VertexId(0), VertexId(1)).unwrap(), OpOutcome::Rejected);
        assert_eq!(m.tet_vertex_table(), before);
    }

    #[test]
    fn random_rings_match_exhaustive_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut applied = 0;
        for trial in 0..1000 {
            let n = [3, 4, 5, 5, 6, 7][trial % 6];
            let ring = random_ring(&mut rng, n);
            let h = rng.random_range(0.1..1.5);
            let mut pos = vec![[0.0, 0.0, h], [0.0, 0.0, -h]];
            pos.extend_from_slice(&ring);
            let valid = (0..n).all(|i| {
                let p = [pos[0], pos[1], pos[2 + i], pos[2 + (i + 1) % n]];
                orient3d(&p[0], &p[1], &p[2], &p[3]).is_positive()
            });
            if !valid {
                continue;
            }
            let mut m = ring_mesh(&ring, h);
            let vol = m.total_volume();
            let want = oracle_best(&pos, n);
            let got = edge_removal(&mut m, VertexId(0), VertexId(1)).unwrap();
            match (want, got) {
                (None, OpOutcome::Rejected) => {}
                (Some(q), OpOutcome::Applied { after, .. }) => {
                    applied += 1;
                    assert!((q - after).abs() < 1e-12, "trial {trial}: oracle {q} got {after}");
                    assert!((m.min_quality() - after).abs() < 1e-12);
                    assert!((m.total_volume() - vol).abs() < 1e-9 * vol);
                    assert_eq!(m.num_live_tets(), 2 * (n - 2));
                    m.audit().unwrap();
                }
                other => panic!("trial {trial}: mismatch {other:?}"),
            }
        }
        assert!(applied > 100, "only {applied} rings improved");
    }
}

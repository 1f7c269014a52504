//! Growing cavity operator: start from one bad tetrahedron, add the most
//! connected neighbouring point at each step and retile the cavity with the
//! reconnection search, stopping at the first strict improvement.

use crate::local_ops::OpOutcome;
use crate::mesh::{Cavity, Mesh, MeshError, Neighbor, TetId, VertexId};
use crate::spr::{SprOutcome, SprState, DEFAULT_NODE_BUDGET, MAX_POINTS};

/// A point that can be added to the cavity, with its tallies over the front.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub point: VertexId,
    /// Number of front tetrahedra incident to the point.
    pub m: usize,
    /// Sum of the qualities of those tetrahedra.
    pub quality_sum: f64,
}

/// Tetrahedra sharing a facet with the cavity, and the points they offer.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthFront {
    pub adjacent_tets: Vec<TetId>,
    /// Sorted by preference: largest `m`, then smallest `quality_sum`, then
    /// smallest vertex id.
    pub candidates: Vec<Candidate>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extension {
    Added(VertexId),
    /// Every candidate would swallow a constrained triangle, or the cavity
    /// has no neighbours left.
    NoCandidate,
    /// Growth needs tetrahedra owned by another partition.
    Foreign,
}

/// Cavity under growth: a set of tetrahedra closed under "all four vertices
/// in the point set".
#[derive(Debug, Clone, PartialEq)]
pub struct GrowingCavity {
    /// Sorted.
    pub tets: Vec<TetId>,
    /// In order of addition; the seed's vertices come first.
    pub points: Vec<VertexId>,
}

impl GrowingCavity {
    pub fn new(mesh: &Mesh, seed: TetId) -> Self {
        GrowingCavity {
            tets: vec![seed],
            points: mesh.tet(seed).vertices.to_vec(),
        }
    }

    fn contains(&self, t: TetId) -> bool {
        self.tets.binary_search(&t).is_ok()
    }

    pub fn front(&self, mesh: &Mesh) -> Result<GrowthFront, Extension> {
        let mut adjacent = Vec::new();
        for &t in &self.tets {
            for f in 0..4 {
                match mesh.tet(t).neighbor(f) {
                    Neighbor::Tet(n) => {
                        if !self.contains(n) && !adjacent.contains(&n) {
                            adjacent.push(n);
                        }
                    }
                    Neighbor::Boundary => {}
                    Neighbor::Foreign => return Err(Extension::Foreign),
                }
            }
        }
        adjacent.sort_unstable();
        let mut candidates: Vec<Candidate> = Vec::new();
        for &a in &adjacent {
            let tet = mesh.tet(a);
            for v in tet.vertices {
                if self.points.contains(&v) {
                    continue;
                }
                match candidates.iter_mut().find(|c| c.point == v) {
                    Some(c) => {
                        c.m += 1;
                        c.quality_sum += tet.quality;
                    }
                    None => candidates.push(Candidate {
                        point: v,
                        m: 1,
                        quality_sum: tet.quality,
                    }),
                }
            }
        }
        candidates.sort_by(|a, b| {
            b.m.cmp(&a.m)
                .then(a.quality_sum.total_cmp(&b.quality_sum))
                .then(a.point.cmp(&b.point))
        });
        Ok(GrowthFront {
            adjacent_tets: adjacent,
            candidates,
        })
    }

    /// Tetrahedra outside the cavity whose vertices all lie in the point set
    /// extended by `p`.
    fn closure_with(&self, mesh: &Mesh, p: VertexId) -> Result<Vec<TetId>, Extension> {
        let star = mesh.vertex_star(p).map_err(|_| Extension::Foreign)?;
        let mut out: Vec<TetId> = star
            .into_iter()
            .filter(|&t| {
                !self.contains(t)
                    && mesh
                        .tet(t)
                        .vertices
                        .iter()
                        .all(|&v| v == p || self.points.contains(&v))
            })
            .collect();
        out.sort_unstable();
        Ok(out)
    }

    /// Adds the preferred candidate point and every tetrahedron it closes.
    ///
    /// A candidate is skipped when the enlarged cavity would have a
    /// constrained triangle with both sides inside it.
    pub fn extend(&mut self, mesh: &Mesh) -> Extension {
        let front = match self.front(mesh) {
            Ok(f) => f,
            Err(e) => return e,
        };
        for c in &front.candidates {
            let added = match self.closure_with(mesh, c.point) {
                Ok(a) => a,
                Err(e) => return e,
            };
            let inside = |t: TetId| self.contains(t) || added.binary_search(&t).is_ok();
            let swallows_surface = added.iter().any(|&t| {
                let tet = mesh.tet(t);
                (0..4).any(|f| tet.is_constrained(f) && matches!(tet.neighbor(f), Neighbor::Tet(n) if inside(n)))
            });
            if swallows_surface {
                continue;
            }
            self.tets.extend(added);
            self.tets.sort_unstable();
            self.points.push(c.point);
            return Extension::Added(c.point);
        }
        Extension::NoCandidate
    }
}

/// Grows a cavity from `seed` and replaces it by the first retiling that
/// strictly improves its worst element.
///
/// `state` carries the quality cache between growth steps and can be reused
/// across calls.
pub fn gsc(mesh: &mut Mesh, seed: TetId, state: &mut SprState, node_budget: usize) -> Result<OpOutcome, MeshError> {
    if !mesh.is_live(seed) {
        return Ok(OpOutcome::Rejected);
    }
    let mut cavity = GrowingCavity::new(mesh, seed);
    state.reset();
    for &v in &cavity.points {
        state.push_point(mesh.position(v)).expect("four points fit");
    }
    while cavity.points.len() < MAX_POINTS {
        match cavity.extend(mesh) {
            Extension::Added(p) => {
                state.push_point(mesh.position(p)).expect("point count checked");
            }
            Extension::NoCandidate => return Ok(OpOutcome::Rejected),
            Extension::Foreign => return Ok(OpOutcome::Suspended),
        }
        let shell = Cavity::collect(mesh, &cavity.tets)?;
        let floor = cavity
            .tets
            .iter()
            .map(|&t| mesh.tet(t).quality)
            .fold(f64::INFINITY, f64::min);
        let local = |v: VertexId| cavity.points.iter().position(|&w| w == v).unwrap() as u8;
        let facets: Vec<[u8; 3]> = shell
            .boundary_facets
            .iter()
            .map(|sf| sf.vertices.map(local))
            .collect();
        if let SprOutcome::Improved { tets, min_quality, .. } = state.search(&facets, floor, node_budget) {
            let new_tets: Vec<[VertexId; 4]> = tets.iter().map(|t| t.map(|i| cavity.points[i as usize])).collect();
            mesh.replace_cavity(&shell, &new_tets)?;
            return Ok(OpOutcome::Applied {
                before: floor,
                after: min_quality,
            });
        }
    }
    Ok(OpOutcome::Rejected)
}

/// [`gsc`] with a fresh search state and the default node budget.
pub fn gsc_once(mesh: &mut Mesh, seed: TetId) -> Result<OpOutcome, MeshError> {
    gsc(mesh, seed, &mut SprState::new(), DEFAULT_NODE_BUDGET)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Point3;
    use crate::io::generate_test_mesh;
    use crate::quality::{gamma, orient3d};

    fn bipyramid(h: f64) -> (Mesh, Vec<Point3>) {
        let s = 3f64.sqrt() / 2.0;
        let pos = vec![[1.0, 0.0, 0.0], [-0.5, s, 0.0], [-0.5, -s, 0.0], [0.0, 0.0, h], [0.0, 0.0, -h]];
        let mut tets = vec![[0, 1, 2, 3], [0, 2, 1, 4]];
        for t in tets.iter_mut() {
            let p = t.map(|i| pos[i as usize]);
            if !orient3d(&p[0], &p[1], &p[2], &p[3]).is_positive() {
                t.swap(2, 3);
            }
        }
        (Mesh::new(pos.clone(), tets, Vec::new()).unwrap(), pos)
    }

    #[test]
    fn flat_pair_is_fixed_at_first_growth_step() {
        let (mut m, pos) = bipyramid(0.15);
        let old = m.min_quality();
        // Best 3-tet tiling: the three tetrahedra around the apex segment.
        let three = [[0, 1, 4, 3], [1, 2, 4, 3], [2, 0, 4, 3]]
            .iter()
            .map(|t: &[usize; 4]| gamma(&t.map(|i| pos[i])).abs())
            .fold(f64::INFINITY, f64::min);
        let mut state = SprState::new();
        let mut cav = GrowingCavity::new(&m, TetId(0));
        assert_eq!(cav.extend(&m), Extension::Added(VertexId(4)));
        assert_eq!(cav.tets, vec![TetId(0), TetId(1)]);
        match gsc(&mut m, TetId(0), &mut state, DEFAULT_NODE_BUDGET).unwrap() {
            OpOutcome::Applied { before, after } => {
                assert_eq!(before, old);
                assert!((after - three).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(m.num_live_tets(), 3);
        assert_eq!(state.points().len(), 5);
        m.audit().unwrap();
    }

    #[test]
    fn single_tet_mesh_is_not_improved() {
        let mut m = Mesh::new(crate::mesh::tests::unit_corner(), vec![[0, 1, 2, 3]], vec![]).unwrap();
        assert_eq!(gsc_once(&mut m, TetId(0)).unwrap(), OpOutcome::Rejected);
        assert_eq!(m.num_live_tets(), 1);
    }

    #[test]
    fn growth_stops_at_32_points() {
        // A regular structured block: nothing beats the current tiling, so
        // the cavity grows to the cap.
        let m = generate_test_mesh(4, 0.0, 0);
        let seed = m.live_tet_ids().find(|&t| m.tet(t).vertices.iter().all(|&v| !m.vertex(v).on_boundary)).unwrap();
        let mut cav = GrowingCavity::new(&m, seed);
        let mut tets = cav.tets.len();
        while cav.points.len() < MAX_POINTS {
            let before = cav.points.len();
            match cav.extend(&m) {
                Extension::Added(_) => {}
                other => panic!("{other:?} at {before} points"),
            }
            assert_eq!(cav.points.len(), before + 1);
            assert!(cav.tets.len() > tets);
            tets = cav.tets.len();
            // Closure: no live tetrahedron outside has all vertices in the set.
            for t in m.live_tet_ids() {
                if !cav.tets.contains(&t) {
                    assert!(!m.tet(t).vertices.iter().all(|v| cav.points.contains(v)));
                }
            }
        }
        let mut mm = m.clone();
        let mut state = SprState::new();
        assert_eq!(gsc(&mut mm, seed, &mut state, 2_000).unwrap(), OpOutcome::Rejected);
        assert_eq!(state.points().len(), MAX_POINTS);
        assert_eq!(mm.tet_vertex_table(), m.tet_vertex_table());
    }

    #[test]
    fn tie_break_prefers_smallest_index() {
        // Each neighbour across the four facets of a central tetrahedron
        // offers one point with m = 1 and identical quality.
        let c = [[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]];
        let mut pos: Vec<Point3> = c.to_vec();
        let mut tets = vec![[0u32, 1, 2, 3]];
        if !orient3d(&c[0], &c[1], &c[2], &c[3]).is_positive() {
            tets[0].swap(2, 3);
        }
        for i in 0..4 {
            // Reflect vertex i through the opposite facet centroid.
            let others: Vec<usize> = (0..4).filter(|&k| k != i).collect();
            let g = [0, 1, 2].map(|d| others.iter().map(|&k| c[k][d]).sum::<f64>() / 3.0);
            pos.push([0, 1, 2].map(|d| 2.0 * g[d] - c[i][d]));
            let mut t = [others[0] as u32, others[1] as u32, others[2] as u32, 4 + i as u32];
            let p = t.map(|k| pos[k as usize]);
            if !orient3d(&p[0], &p[1], &p[2], &p[3]).is_positive() {
                t.swap(0, 1);
            }
            tets.push(t);
        }
        let m = Mesh::new(pos, tets, Vec::new()).unwrap();
        let mut cav = GrowingCavity::new(&m, TetId(0));
        let front = cav.front(&m).unwrap();
        assert_eq!(front.adjacent_tets.len(), 4);
        assert!(front.candidates.iter().all(|c| c.m == 1));
        assert_eq!(cav.extend(&m), Extension::Added(VertexId(4)));
    }

    #[test]
    fn worst_adjacent_quality_wins_among_equal_counts() {
        let mut m = generate_test_mesh(3, 0.3, 9);
        let seed = m.live_tet_ids().min_by(|&a, &b| m.tet(a).quality.total_cmp(&m.tet(b).quality)).unwrap();
        let cav = GrowingCavity::new(&m, seed);
        let front = cav.front(&m).unwrap();
        let first = front.candidates[0];
        for c in &front.candidates[1..] {
            assert!(c.m < first.m || (c.m == first.m && c.quality_sum >= first.quality_sum));
        }
        // Recount the tallies independently.
        for c in &front.candidates {
            let incident: Vec<TetId> = front
                .adjacent_tets
                .iter()
                .copied()
                .filter(|&t| m.tet(t).contains(c.point))
                .collect();
            assert_eq!(incident.len(), c.m);
            let s: f64 = incident.iter().map(|&t| m.tet(t).quality).sum();
            assert!((s - c.quality_sum).abs() < 1e-12);
        }
        let _ = gsc_once(&mut m, seed).unwrap();
        m.audit().unwrap();
    }

    #[test]
    fn closure_pulls_in_tets_outside_the_front() {
        // Scan seeds in a perturbed mesh until an extension adds a tetrahedron
        // that was not adjacent to the cavity, then check closure exhaustively.
        let m = generate_test_mesh(4, 0.4, 21);
        let mut found = false;
        'outer: for seed in m.live_tet_ids() {
            let mut cav = GrowingCavity::new(&m, seed);
            for _ in 0..10 {
                let front = cav.front(&m).unwrap();
                let before = cav.tets.clone();
                if !matches!(cav.extend(&m), Extension::Added(_)) {
                    break;
                }
                let new: Vec<TetId> = cav.tets.iter().copied().filter(|t| !before.contains(t)).collect();
                for t in m.live_tet_ids() {
                    let all_in = m.tet(t).vertices.iter().all(|v| cav.points.contains(v));
                    assert_eq!(all_in, cav.tets.contains(&t));
                }
                if new.iter().any(|t| !front.adjacent_tets.contains(t)) {
                    found = true;
                    break 'outer;
                }
            }
        }
        assert!(found);
    }

    #[test]
    fn constrained_triangles_stay_on_the_shell() {
        // Two tetrahedra glued on a constrained triangle: growth across it is refused.
        let (m0, pos) = bipyramid(0.15);
        let tets = m0.tet_vertex_table().iter().map(|t| t.map(|v| v.0)).collect();
        let mut m = Mesh::new(pos, tets, vec![[0, 1, 2]]).unwrap();
        let mut cav = GrowingCavity::new(&m, TetId(0));
        assert_eq!(cav.extend(&m), Extension::NoCandidate);
        assert_eq!(gsc_once(&mut m, TetId(0)).unwrap(), OpOutcome::Rejected);
        m.audit().unwrap();
    }
}

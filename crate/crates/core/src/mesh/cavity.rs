use std::collections::HashMap;

use super::{canonical_rotation, facet_key, Mesh, MeshError, Neighbor, Tet, TetId, VertexId, FACET_VERTICES, NO_NEIGHBOR};
use crate::geom::signed_volume;
use crate::quality::{gamma, tet_orientation, Orientation};

/// A boundary facet of a cavity together with what lies behind it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShellFacet {
    /// Oriented outwards from the cavity.
    pub vertices: [VertexId; 3],
    pub inner: TetId,
    pub outer: Neighbor,
    pub constrained: bool,
}

/// A set of live tetrahedra with its boundary shell and point set.
#[derive(Debug, Clone, PartialEq)]
pub struct Cavity {
    /// Sorted, without duplicates.
    pub tets: Vec<TetId>,
    pub boundary_facets: Vec<ShellFacet>,
    /// Points of the cavity that do not lie on its shell.
    pub interior_points: Vec<VertexId>,
    /// All vertices of the member tetrahedra, in order of first appearance.
    pub all_points: Vec<VertexId>,
}

impl Cavity {
    #[inline]
    pub fn contains(&self, t: TetId) -> bool {
        self.tets.binary_search(&t).is_ok()
    }

    /// Builds the shell of an arbitrary set of live tetrahedra. Face
    /// connectivity is not required.
    pub(crate) fn collect(mesh: &Mesh, tets: &[TetId]) -> Result<Cavity, MeshError> {
        let mut sorted = tets.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let mut all_points = Vec::new();
        for &t in tets {
            if !mesh.is_live(t) {
                return Err(MeshError::DeadTet(t));
            }
            for v in mesh.tet(t).vertices {
                if !all_points.contains(&v) {
                    all_points.push(v);
                }
            }
        }
        let mut boundary_facets = Vec::new();
        for &t in &sorted {
            let tet = mesh.tet(t);
            for f in 0..4 {
                let outer = tet.neighbor(f);
                if let Neighbor::Tet(n) = outer {
                    if sorted.binary_search(&n).is_ok() {
                        continue;
                    }
                }
                boundary_facets.push(ShellFacet {
                    vertices: tet.facet(f),
                    inner: t,
                    outer,
                    constrained: tet.is_constrained(f),
                });
            }
        }
        // Closed surface: each directed edge is matched by its reverse.
        let mut balance: HashMap<(u32, u32), i32> = HashMap::new();
        for sf in &boundary_facets {
            let v = sf.vertices;
            for i in 0..3 {
                let (a, b) = (v[i].0, v[(i + 1) % 3].0);
                if a < b {
                    *balance.entry((a, b)).or_default() += 1;
                } else {
                    *balance.entry((b, a)).or_default() -= 1;
                }
            }
        }
        if balance.values().any(|&c| c != 0) {
            return Err(MeshError::OpenShell);
        }
        let interior_points = all_points
            .iter()
            .copied()
            .filter(|v| !boundary_facets.iter().any(|sf| sf.vertices.contains(v)))
            .collect();
        Ok(Cavity {
            tets: sorted,
            boundary_facets,
            interior_points,
            all_points,
        })
    }
}

impl Mesh {
    /// Extracts a face-connected set of live tetrahedra as a cavity.
    pub fn extract_cavity(&self, tets: &[TetId]) -> Result<Cavity, MeshError> {
        if tets.is_empty() {
            return Err(MeshError::DisconnectedSeed);
        }
        let cavity = Cavity::collect(self, tets)?;
        // Face connectivity by flood fill over member neighbours.
        let mut reached = vec![false; cavity.tets.len()];
        let mut stack = vec![0usize];
        reached[0] = true;
        while let Some(i) = stack.pop() {
            let t = self.tet(cavity.tets[i]);
            for f in 0..4 {
                if let Neighbor::Tet(n) = t.neighbor(f) {
                    if let Ok(j) = cavity.tets.binary_search(&n) {
                        if !reached[j] {
                            reached[j] = true;
                            stack.push(j);
                        }
                    }
                }
            }
        }
        if reached.iter().any(|r| !r) {
            return Err(MeshError::DisconnectedSeed);
        }
        Ok(cavity)
    }

    /// Replaces the tetrahedra of `cavity` by `new_tets`, which must tile the
    /// same volume and expose the same shell.
    pub fn replace_cavity(
        &mut self,
        cavity: &Cavity,
        new_tets: &[[VertexId; 4]],
    ) -> Result<Vec<TetId>, MeshError> {
        for &t in &cavity.tets {
            if !self.is_live(t) {
                return Err(MeshError::DeadTet(t));
            }
            let tet = self.tet(t);
            for f in 0..4 {
                if let Neighbor::Tet(n) = tet.neighbor(f) {
                    if tet.is_constrained(f) && cavity.contains(n) {
                        return Err(MeshError::ConstrainedFacetRemoved {
                            facet: facet_key(&tet.facet(f)),
                        });
                    }
                }
            }
        }
        for (i, nt) in new_tets.iter().enumerate() {
            if nt.iter().any(|v| !cavity.all_points.contains(v)) {
                return Err(MeshError::ShellMismatch);
            }
            if tet_orientation(&self.points_of(nt)) != Orientation::Positive {
                return Err(MeshError::OrientationViolation { index: i });
            }
        }
        let old: f64 = cavity
            .tets
            .iter()
            .map(|&t| signed_volume(&self.tet_points(t)))
            .sum();
        let new: f64 = new_tets
            .iter()
            .map(|nt| signed_volume(&self.points_of(nt)))
            .sum();
        if (new - old).abs() > 1e-9 * old.abs() {
            return Err(MeshError::VolumeMismatch { old, new });
        }

        // Pair up the facets of the patch; unpaired ones must be shell facets.
        let mut open: HashMap<[u32; 3], (usize, usize)> = HashMap::with_capacity(new_tets.len() * 4);
        let mut links: Vec<[u32; 4]> = vec![[NO_NEIGHBOR; 4]; new_tets.len()];
        let base = self.tets.len() as u32;
        for (i, nt) in new_tets.iter().enumerate() {
            for f in 0..4 {
                let fv = FACET_VERTICES[f].map(|k| nt[k]);
                let key = facet_key(&fv);
                match open.remove(&key) {
                    None => {
                        open.insert(key, (i, f));
                    }
                    Some((j, g)) => {
                        if j == usize::MAX {
                            return Err(MeshError::ShellMismatch);
                        }
                        let other = FACET_VERTICES[g].map(|k| new_tets[j][k].0);
                        let mine = [fv[0].0, fv[2].0, fv[1].0];
                        if canonical_rotation(mine) != canonical_rotation(other) {
                            return Err(MeshError::ShellMismatch);
                        }
                        links[i][f] = base + j as u32;
                        links[j][g] = base + i as u32;
                        open.insert(key, (usize::MAX, 0));
                    }
                }
            }
        }
        let unpaired: Vec<([u32; 3], (usize, usize))> =
            open.into_iter().filter(|(_, (i, _))| *i != usize::MAX).collect();
        if unpaired.len() != cavity.boundary_facets.len() {
            return Err(MeshError::ShellMismatch);
        }
        let shell: HashMap<[u32; 3], &super::ShellFacet> = cavity
            .boundary_facets
            .iter()
            .map(|sf| (canonical_rotation(sf.vertices.map(|v| v.0)), sf))
            .collect();
        let mut shell_links = Vec::with_capacity(unpaired.len());
        for (_, (i, f)) in &unpaired {
            let fv = FACET_VERTICES[*f].map(|k| new_tets[*i][k].0);
            let Some(sf) = shell.get(&canonical_rotation(fv)) else {
                return Err(MeshError::ShellMismatch);
            };
            shell_links.push((*i, *f, **sf));
        }

        // Commit.
        for &t in &cavity.tets {
            self.tets[t.idx()].deleted = true;
        }
        self.live_tets -= cavity.tets.len();
        let mut ids = Vec::with_capacity(new_tets.len());
        for (i, nt) in new_tets.iter().enumerate() {
            let mut tet = Tet::new(*nt);
            tet.neighbors = links[i];
            tet.quality = gamma(&self.points_of(nt));
            ids.push(TetId(base + i as u32));
            self.tets.push(tet);
        }
        self.live_tets += new_tets.len();
        for (i, f, sf) in shell_links {
            let id = base + i as u32;
            let tet = &mut self.tets[id as usize];
            tet.neighbors[f] = sf.outer.to_raw();
            if sf.constrained {
                tet.constrained |= 1 << f;
            }
            if let Neighbor::Tet(o) = sf.outer {
                let outer = &mut self.tets[o.idx()];
                let g = (0..4)
                    .find(|&g| outer.neighbors[g] == sf.inner.0)
                    .expect("outer tetrahedron lost its back link");
                outer.neighbors[g] = id;
            }
        }
        for (i, nt) in new_tets.iter().enumerate() {
            for v in nt {
                self.vertex_tet[v.idx()] = base + i as u32;
            }
        }
        Ok(ids)
    }
}

//! Tetrahedral mesh data model.
//!
//! Tetrahedra live in a flat table. Removing a tetrahedron only sets a
//! tombstone, so `TetId`s stay valid for the duration of a sweep; the
//! scheduler compacts the table between sweeps. Neighbour `i` of a tetrahedron
//! is the element across the facet opposite its vertex `i`.

mod cavity;
mod partition;

pub use cavity::{Cavity, ShellFacet};
pub use partition::SubMesh;

use std::collections::{BTreeSet, HashMap, HashSet};

use thiserror::Error;

use crate::geom::{signed_volume, Point3};
use crate::quality::{gamma, tet_orientation, Orientation};

/// Outward-oriented local vertex triples of the four facets; facet `i` is opposite vertex `i`.
pub const FACET_VERTICES: [[usize; 3]; 4] = [[1, 2, 3], [0, 3, 2], [0, 1, 3], [0, 2, 1]];

const NO_NEIGHBOR: u32 = u32::MAX;
const FOREIGN: u32 = u32::MAX - 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TetId(pub u32);

impl VertexId {
    #[inline]
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

impl TetId {
    #[inline]
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

/// What lies across a facet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Neighbor {
    Tet(TetId),
    /// Outside of the domain.
    Boundary,
    /// Owned by another partition; opaque to the local worker.
    Foreign,
}

impl Neighbor {
    #[inline]
    fn from_raw(raw: u32) -> Self {
        match raw {
            NO_NEIGHBOR => Neighbor::Boundary,
            FOREIGN => Neighbor::Foreign,
            t => Neighbor::Tet(TetId(t)),
        }
    }

    #[inline]
    fn to_raw(self) -> u32 {
        match self {
            Neighbor::Boundary => NO_NEIGHBOR,
            Neighbor::Foreign => FOREIGN,
            Neighbor::Tet(t) => t.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeshError {
    #[error("vertex {vertex} has a non-finite coordinate")]
    NonFiniteCoordinate { vertex: usize },
    #[error("tetrahedron {tet} references missing vertex {vertex}")]
    IndexOutOfRange { tet: usize, vertex: u32 },
    #[error("tetrahedron {tet} has non-positive volume")]
    InvalidTet { tet: usize },
    #[error("facet {facet:?} is claimed by three or more tetrahedra")]
    NonManifoldFacet { facet: [u32; 3] },
    #[error("facet {facet:?} is shared by two tetrahedra on the same side")]
    InconsistentOrientation { facet: [u32; 3] },
    #[error("surface triangle {triangle:?} is not a facet of the mesh")]
    UnmatchedSurfaceTriangle { triangle: [u32; 3] },
    #[error("tetrahedron {0:?} is deleted")]
    DeadTet(TetId),
    #[error("cavity tetrahedra are not face-connected")]
    DisconnectedSeed,
    #[error("cavity boundary is not a closed surface")]
    OpenShell,
    #[error("replacement volume {new} differs from cavity volume {old}")]
    VolumeMismatch { old: f64, new: f64 },
    #[error("replacement tetrahedron {index} is not positively oriented")]
    OrientationViolation { index: usize },
    #[error("replacement boundary does not match the cavity shell")]
    ShellMismatch,
    #[error("operation would remove constrained facet {facet:?}")]
    ConstrainedFacetRemoved { facet: [u32; 3] },
    #[error("mesh audit failed: {0}")]
    Audit(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vertex {
    pub position: Point3,
    /// Space-filling-curve key, refreshed by the scheduler at each partition rebuild.
    pub moore_index: u64,
    pub on_boundary: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tet {
    pub vertices: [VertexId; 4],
    neighbors: [u32; 4],
    /// Bit `i` set when facet `i` is a constrained surface triangle.
    constrained: u8,
    /// Cached `gamma`.
    pub quality: f64,
    pub deleted: bool,
}

impl Tet {
    fn new(vertices: [VertexId; 4]) -> Self {
        Tet {
            vertices,
            neighbors: [NO_NEIGHBOR; 4],
            constrained: 0,
            quality: 0.0,
            deleted: false,
        }
    }

    #[inline]
    pub fn neighbor(&self, facet: usize) -> Neighbor {
        Neighbor::from_raw(self.neighbors[facet])
    }

    #[inline]
    pub fn is_constrained(&self, facet: usize) -> bool {
        self.constrained & (1 << facet) != 0
    }

    /// Outward-oriented vertices of facet `i`.
    #[inline]
    pub fn facet(&self, i: usize) -> [VertexId; 3] {
        let f = FACET_VERTICES[i];
        [self.vertices[f[0]], self.vertices[f[1]], self.vertices[f[2]]]
    }

    #[inline]
    pub fn local_index(&self, v: VertexId) -> Option<usize> {
        self.vertices.iter().position(|&w| w == v)
    }

    #[inline]
    pub fn contains(&self, v: VertexId) -> bool {
        self.vertices.contains(&v)
    }
}

/// Sorted vertex triple used as an orientation-free facet key.
#[inline]
pub fn facet_key(f: &[VertexId; 3]) -> [u32; 3] {
    let mut k = [f[0].0, f[1].0, f[2].0];
    k.sort_unstable();
    k
}

/// Rotation of an oriented triple that starts at its smallest vertex.
#[inline]
pub(crate) fn canonical_rotation(f: [u32; 3]) -> [u32; 3] {
    let m = (0..3).min_by_key(|&i| f[i]).unwrap();
    [f[m], f[(m + 1) % 3], f[(m + 2) % 3]]
}

#[derive(Debug, Clone, Default)]
pub struct Mesh {
    pub(crate) vertices: Vec<Vertex>,
    pub(crate) tets: Vec<Tet>,
    surface: Vec<[VertexId; 3]>,
    surface_keys: HashSet<[u32; 3]>,
    live_tets: usize,
    /// A live tetrahedron incident to each vertex.
    vertex_tet: Vec<u32>,
}

impl Mesh {
    /// Builds a mesh from raw tables.
    ///
    /// Every tetrahedron must be positively oriented. Hull facets that are
    /// not listed in `surface` are added to it, since the domain boundary is
    /// never modified either.
    pub fn new(
        positions: Vec<Point3>,
        tets: Vec<[u32; 4]>,
        surface: Vec<[u32; 3]>,
    ) -> Result<Self, MeshError> {
        for (i, p) in positions.iter().enumerate() {
            if !p.iter().all(|c| c.is_finite()) {
                return Err(MeshError::NonFiniteCoordinate { vertex: i });
            }
        }
        let nv = positions.len() as u32;
        for (i, t) in tets.iter().enumerate() {
            if let Some(&v) = t.iter().find(|&&v| v >= nv) {
                return Err(MeshError::IndexOutOfRange { tet: i, vertex: v });
            }
        }
        for tri in &surface {
            if tri.iter().any(|&v| v >= nv) {
                return Err(MeshError::UnmatchedSurfaceTriangle { triangle: *tri });
            }
        }
        let mut mesh = Mesh {
            vertices: positions
                .into_iter()
                .map(|position| Vertex {
                    position,
                    moore_index: 0,
                    on_boundary: false,
                })
                .collect(),
            tets: tets
                .into_iter()
                .map(|t| Tet::new(t.map(VertexId)))
                .collect(),
            surface: surface.into_iter().map(|t| t.map(VertexId)).collect(),
            surface_keys: HashSet::new(),
            live_tets: 0,
            vertex_tet: vec![NO_NEIGHBOR; nv as usize],
        };
        mesh.live_tets = mesh.tets.len();
        for i in 0..mesh.tets.len() {
            let p = mesh.tet_points(TetId(i as u32));
            if tet_orientation(&p) != Orientation::Positive {
                return Err(MeshError::InvalidTet { tet: i });
            }
        }
        mesh.build_adjacency()?;
        mesh.mark_surface()?;
        mesh.refresh_qualities();
        mesh.refresh_vertex_hints();
        Ok(mesh)
    }

    /// Links facet neighbours by matching sorted vertex triples.
    pub fn build_adjacency(&mut self) -> Result<(), MeshError> {
        let mut open: HashMap<[u32; 3], (u32, u8)> = HashMap::with_capacity(self.tets.len() * 2);
        for t in self.tets.iter_mut() {
            t.neighbors = [NO_NEIGHBOR; 4];
        }
        for ti in 0..self.tets.len() {
            if self.tets[ti].deleted {
                continue;
            }
            for f in 0..4 {
                let face = self.tets[ti].facet(f);
                let key = facet_key(&face);
                match open.remove(&key) {
                    None => {
                        open.insert(key, (ti as u32, f as u8));
                    }
                    Some((other, of)) => {
                        if other == u32::MAX {
                            return Err(MeshError::NonManifoldFacet { facet: key });
                        }
                        let of = of as usize;
                        let theirs = self.tets[other as usize].facet(of);
                        let mine = [face[0].0, face[2].0, face[1].0];
                        if canonical_rotation(mine) != canonical_rotation(theirs.map(|v| v.0)) {
                            return Err(MeshError::InconsistentOrientation { facet: key });
                        }
                        if self.tets[other as usize].neighbors[of] != NO_NEIGHBOR
                            || self.tets[ti].neighbors[f] != NO_NEIGHBOR
                        {
                            return Err(MeshError::NonManifoldFacet { facet: key });
                        }
                        self.tets[other as usize].neighbors[of] = ti as u32;
                        self.tets[ti].neighbors[f] = other;
                        // Tombstone so that a third claimant is detected.
                        open.insert(key, (u32::MAX, 0));
                    }
                }
            }
        }
        Ok(())
    }

    fn mark_surface(&mut self) -> Result<(), MeshError> {
        let mut index: HashMap<[u32; 3], Vec<(u32, u8)>> = HashMap::new();
        for (ti, t) in self.tets.iter().enumerate() {
            if t.deleted {
                continue;
            }
            for f in 0..4 {
                index
                    .entry(facet_key(&t.facet(f)))
                    .or_default()
                    .push((ti as u32, f as u8));
            }
        }
        let mut keys: HashSet<[u32; 3]> = self.surface.iter().map(facet_key).collect();
        for tri in &self.surface {
            if !index.contains_key(&facet_key(tri)) {
                return Err(MeshError::UnmatchedSurfaceTriangle {
                    triangle: tri.map(|v| v.0),
                });
            }
        }
        // The hull is always constrained.
        let mut hull = Vec::new();
        for t in self.tets.iter().filter(|t| !t.deleted) {
            for f in 0..4 {
                if t.neighbors[f] == NO_NEIGHBOR {
                    let face = t.facet(f);
                    if keys.insert(facet_key(&face)) {
                        hull.push(face);
                    }
                }
            }
        }
        hull.sort_by_key(facet_key);
        self.surface.extend(hull);
        for key in &keys {
            for &(ti, f) in &index[key] {
                self.tets[ti as usize].constrained |= 1 << f;
            }
        }
        for tri in &self.surface {
            for v in tri {
                self.vertices[v.idx()].on_boundary = true;
            }
        }
        self.surface_keys = keys;
        Ok(())
    }

    pub(crate) fn refresh_qualities(&mut self) {
        for i in 0..self.tets.len() {
            if !self.tets[i].deleted {
                let q = gamma(&self.tet_points(TetId(i as u32)));
                self.tets[i].quality = q;
            }
        }
    }

    pub(crate) fn refresh_vertex_hints(&mut self) {
        self.vertex_tet.clear();
        self.vertex_tet.resize(self.vertices.len(), NO_NEIGHBOR);
        for (ti, t) in self.tets.iter().enumerate() {
            if !t.deleted {
                for v in t.vertices {
                    self.vertex_tet[v.idx()] = ti as u32;
                }
            }
        }
    }

    #[inline]
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    #[inline]
    pub fn num_live_tets(&self) -> usize {
        self.live_tets
    }

    /// Size of the tetrahedron table, tombstones included.
    #[inline]
    pub fn tet_capacity(&self) -> usize {
        self.tets.len()
    }

    #[inline]
    pub fn vertex(&self, v: VertexId) -> &Vertex {
        &self.vertices[v.idx()]
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    #[inline]
    pub fn position(&self, v: VertexId) -> Point3 {
        self.vertices[v.idx()].position
    }

    #[inline]
    pub fn tet(&self, t: TetId) -> &Tet {
        &self.tets[t.idx()]
    }

    #[inline]
    pub fn is_live(&self, t: TetId) -> bool {
        t.idx() < self.tets.len() && !self.tets[t.idx()].deleted
    }

    #[inline]
    pub fn tet_points(&self, t: TetId) -> [Point3; 4] {
        self.tets[t.idx()].vertices.map(|v| self.vertices[v.idx()].position)
    }

    #[inline]
    pub fn points_of(&self, vs: &[VertexId; 4]) -> [Point3; 4] {
        vs.map(|v| self.vertices[v.idx()].position)
    }

    pub fn live_tet_ids(&self) -> impl Iterator<Item = TetId> + '_ {
        self.tets
            .iter()
            .enumerate()
            .filter(|(_, t)| !t.deleted)
            .map(|(i, _)| TetId(i as u32))
    }

    /// Constrained surface triangles as given at load time plus the hull.
    pub fn surface_triangles(&self) -> &[[VertexId; 3]] {
        &self.surface
    }

    pub fn is_surface_facet(&self, key: &[u32; 3]) -> bool {
        self.surface_keys.contains(key)
    }

    /// Sorted vertex triples of the constrained triangles.
    pub fn surface_key_set(&self) -> BTreeSet<[u32; 3]> {
        self.surface_keys.iter().copied().collect()
    }

    /// A live tetrahedron incident to `v`, if any.
    pub fn incident_tet(&self, v: VertexId) -> Option<TetId> {
        match self.vertex_tet.get(v.idx()) {
            Some(&t) if t != NO_NEIGHBOR && !self.tets[t as usize].deleted => Some(TetId(t)),
            _ => None,
        }
    }

    pub fn total_volume(&self) -> f64 {
        self.live_tet_ids()
            .map(|t| signed_volume(&self.tet_points(t)))
            .sum()
    }

    pub fn min_quality(&self) -> f64 {
        self.tets
            .iter()
            .filter(|t| !t.deleted)
            .map(|t| t.quality)
            .fold(f64::INFINITY, f64::min)
    }

    /// Live tetrahedra with cached quality below `q_min`, in index order.
    pub fn get_bad_tetrahedra(&self, q_min: f64) -> Vec<TetId> {
        self.tets
            .iter()
            .enumerate()
            .filter(|(_, t)| !t.deleted && t.quality < q_min)
            .map(|(i, _)| TetId(i as u32))
            .collect()
    }

    /// Live tetrahedra as vertex quadruples, in table order.
    pub fn tet_vertex_table(&self) -> Vec<[VertexId; 4]> {
        self.tets
            .iter()
            .filter(|t| !t.deleted)
            .map(|t| t.vertices)
            .collect()
    }

    /// Tetrahedra incident to `v`, found by walking across facets that contain `v`.
    ///
    /// Fails when the walk reaches a facet owned by another partition.
    pub fn vertex_star(&self, v: VertexId) -> Result<Vec<TetId>, Foreign> {
        let Some(start) = self.incident_tet(v) else {
            return Ok(Vec::new());
        };
        let mut star = vec![start];
        let mut i = 0;
        while i < star.len() {
            let t = &self.tets[star[i].idx()];
            let lv = t.local_index(v).expect("star walk left the vertex");
            for f in (0..4).filter(|&f| f != lv) {
                match t.neighbor(f) {
                    Neighbor::Tet(n) => {
                        if !star.contains(&n) {
                            star.push(n);
                        }
                    }
                    Neighbor::Boundary => {}
                    Neighbor::Foreign => return Err(Foreign),
                }
            }
            i += 1;
        }
        Ok(star)
    }

    /// Moves a vertex and refreshes the cached quality of `star`.
    pub(crate) fn move_vertex(&mut self, v: VertexId, to: Point3, star: &[TetId]) {
        self.vertices[v.idx()].position = to;
        for &t in star {
            let q = gamma(&self.tet_points(t));
            self.tets[t.idx()].quality = q;
        }
    }

    pub(crate) fn set_moore_indices(&mut self, keys: &[u64]) {
        for (v, &k) in self.vertices.iter_mut().zip(keys) {
            v.moore_index = k;
        }
    }

    /// Drops tombstones and renumbers tetrahedra, keeping their relative order.
    pub fn compact(&mut self) {
        if self.live_tets == self.tets.len() {
            return;
        }
        let mut remap = vec![NO_NEIGHBOR; self.tets.len()];
        let mut next = 0u32;
        for (i, t) in self.tets.iter().enumerate() {
            if !t.deleted {
                remap[i] = next;
                next += 1;
            }
        }
        self.tets.retain(|t| !t.deleted);
        for t in self.tets.iter_mut() {
            for n in t.neighbors.iter_mut() {
                if *n != NO_NEIGHBOR && *n != FOREIGN {
                    *n = remap[*n as usize];
                }
            }
        }
        self.refresh_vertex_hints();
    }

    /// Sorts tetrahedra by their sorted vertex tuple and relinks adjacency.
    pub fn reproducible_reorder(&mut self) {
        self.compact();
        let mut order: Vec<usize> = (0..self.tets.len()).collect();
        let key = |t: &Tet| {
            let mut k = t.vertices.map(|v| v.0);
            k.sort_unstable();
            (k, t.vertices.map(|v| v.0))
        };
        order.sort_by_key(|&i| key(&self.tets[i]));
        let mut remap = vec![0u32; order.len()];
        for (new, &old) in order.iter().enumerate() {
            remap[old] = new as u32;
        }
        let mut tets: Vec<Tet> = order.iter().map(|&i| self.tets[i]).collect();
        for t in tets.iter_mut() {
            for n in t.neighbors.iter_mut() {
                if *n != NO_NEIGHBOR && *n != FOREIGN {
                    *n = remap[*n as usize];
                }
            }
        }
        self.tets = tets;
        self.refresh_vertex_hints();
    }

    /// Full consistency check: orientation, neighbour symmetry, facet sharing
    /// and constrained flags.
    pub fn audit(&self) -> Result<(), MeshError> {
        let fail = |m: String| Err(MeshError::Audit(m));
        let mut live = 0;
        let mut constrained_seen = HashSet::new();
        for (ti, t) in self.tets.iter().enumerate() {
            if t.deleted {
                continue;
            }
            live += 1;
            if tet_orientation(&self.tet_points(TetId(ti as u32))) != Orientation::Positive {
                return fail(format!("tet {ti} is not positively oriented"));
            }
            for f in 0..4 {
                let key = facet_key(&t.facet(f));
                if t.is_constrained(f) != self.surface_keys.contains(&key) {
                    return fail(format!("tet {ti} facet {f} constrained flag is stale"));
                }
                if t.is_constrained(f) {
                    constrained_seen.insert(key);
                }
                match t.neighbor(f) {
                    Neighbor::Tet(n) => {
                        let nt = &self.tets[n.idx()];
                        if nt.deleted {
                            return fail(format!("tet {ti} links deleted tet {}", n.0));
                        }
                        let back = (0..4).find(|&g| nt.neighbors[g] == ti as u32);
                        let Some(g) = back else {
                            return fail(format!("tet {ti} facet {f}: neighbour {} has no back link", n.0));
                        };
                        if facet_key(&nt.facet(g)) != key {
                            return fail(format!("tet {ti} facet {f}: neighbour shares a different facet"));
                        }
                    }
                    Neighbor::Boundary => {
                        if !t.is_constrained(f) {
                            return fail(format!("tet {ti} facet {f} is an unconstrained hull facet"));
                        }
                    }
                    Neighbor::Foreign => {}
                }
            }
        }
        if live != self.live_tets {
            return fail(format!("live count {} but {} live tets found", self.live_tets, live));
        }
        if constrained_seen.len() != self.surface_keys.len() {
            return fail("a constrained triangle is no longer a facet of the mesh".into());
        }
        Ok(())
    }

    /// Total number of constrained facet slots over live tetrahedra.
    pub fn constrained_facet_count(&self) -> usize {
        self.tets
            .iter()
            .filter(|t| !t.deleted)
            .map(|t| t.constrained.count_ones() as usize)
            .sum()
    }
}

/// Marker error: a walk reached a facet owned by another partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Foreign;

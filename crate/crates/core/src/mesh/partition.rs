//! Splitting a mesh into independently mutable pieces and stitching them back.
//!
//! Each piece is an ordinary [`Mesh`] over a subset of the tetrahedra. Facets
//! whose other side belongs to a different piece are marked
//! [`Neighbor::Foreign`](super::Neighbor::Foreign), so local operations that
//! reach them can detect the conflict and back off before mutating anything.

use std::collections::{HashMap, HashSet};

use super::{facet_key, Mesh, MeshError, Tet, TetId, VertexId, FOREIGN, NO_NEIGHBOR};

/// A piece of a larger mesh.
#[derive(Debug, Clone)]
pub struct SubMesh {
    pub mesh: Mesh,
    /// Global id of each local vertex.
    pub global_vertex: Vec<VertexId>,
}

impl Mesh {
    /// Splits live tetrahedra by `bucket[tet]` into `parts` pieces.
    ///
    /// Local tetrahedra keep the relative order of their global ids. Returns
    /// the pieces and, for each piece, the global id of every local tetrahedron.
    pub fn split(&self, bucket: &[u32], parts: usize) -> (Vec<SubMesh>, Vec<Vec<TetId>>) {
        let mut members: Vec<Vec<TetId>> = vec![Vec::new(); parts];
        let mut local_of = vec![NO_NEIGHBOR; self.tets.len()];
        for (i, t) in self.tets.iter().enumerate() {
            if t.deleted {
                continue;
            }
            let b = bucket[i] as usize;
            local_of[i] = members[b].len() as u32;
            members[b].push(TetId(i as u32));
        }
        let mut scratch = vec![NO_NEIGHBOR; self.vertices.len()];
        let mut out = Vec::with_capacity(parts);
        for (b, tets) in members.iter().enumerate() {
            let mut global_vertex = Vec::new();
            let mut local_tets = Vec::with_capacity(tets.len());
            for &t in tets {
                let g = &self.tets[t.idx()];
                let mut lt = *g;
                for (k, v) in g.vertices.iter().enumerate() {
                    let slot = &mut scratch[v.idx()];
                    if *slot == NO_NEIGHBOR {
                        *slot = global_vertex.len() as u32;
                        global_vertex.push(*v);
                    }
                    lt.vertices[k] = VertexId(*slot);
                }
                for f in 0..4 {
                    let n = g.neighbors[f];
                    lt.neighbors[f] = if n == NO_NEIGHBOR || n == FOREIGN {
                        n
                    } else if bucket[n as usize] as usize == b {
                        local_of[n as usize]
                    } else {
                        FOREIGN
                    };
                }
                local_tets.push(lt);
            }
            let vertices = global_vertex.iter().map(|v| self.vertices[v.idx()]).collect();
            for v in &global_vertex {
                scratch[v.idx()] = NO_NEIGHBOR;
            }
            let mut surface = Vec::new();
            let mut surface_keys = HashSet::new();
            for t in &local_tets {
                for f in 0..4 {
                    if t.is_constrained(f) {
                        let face = t.facet(f);
                        if surface_keys.insert(facet_key(&face)) {
                            surface.push(face);
                        }
                    }
                }
            }
            let mut mesh = Mesh {
                vertices,
                live_tets: local_tets.len(),
                tets: local_tets,
                surface,
                surface_keys,
                vertex_tet: Vec::new(),
            };
            mesh.refresh_vertex_hints();
            out.push(SubMesh {
                mesh,
                global_vertex,
            });
        }
        (out, members)
    }

    /// Replaces every tetrahedron of `self` by the contents of `parts`, which
    /// must come from [`Mesh::split`] on this mesh.
    ///
    /// Vertex positions changed inside a piece are written back. Returns, for
    /// each piece, the new global id of every local tetrahedron slot (or `None`
    /// for slots deleted inside the piece).
    pub fn join(&mut self, parts: Vec<SubMesh>) -> Result<Vec<Vec<Option<TetId>>>, MeshError> {
        let total: usize = parts.iter().map(|p| p.mesh.live_tets).sum();
        let mut tets: Vec<Tet> = Vec::with_capacity(total);
        let mut maps = Vec::with_capacity(parts.len());
        let mut moved_by: HashMap<u32, usize> = HashMap::new();
        let mut cross: HashMap<[u32; 3], (u32, u8)> = HashMap::new();
        for (pi, part) in parts.iter().enumerate() {
            for (lv, gv) in part.global_vertex.iter().enumerate() {
                let local = part.mesh.vertices[lv].position;
                let global = &mut self.vertices[gv.idx()].position;
                if local != *global {
                    if let Some(prev) = moved_by.insert(gv.0, pi) {
                        return Err(MeshError::Audit(format!(
                            "vertex {} moved by pieces {prev} and {pi}",
                            gv.0
                        )));
                    }
                    *global = local;
                }
            }
            let base = tets.len() as u32;
            let mut map = Vec::with_capacity(part.mesh.tets.len());
            let mut next = base;
            for t in &part.mesh.tets {
                if t.deleted {
                    map.push(None);
                } else {
                    map.push(Some(TetId(next)));
                    next += 1;
                }
            }
            for t in part.mesh.tets.iter().filter(|t| !t.deleted) {
                let mut g = *t;
                g.vertices = t.vertices.map(|v| part.global_vertex[v.idx()]);
                for f in 0..4 {
                    let n = t.neighbors[f];
                    if n != NO_NEIGHBOR && n != FOREIGN {
                        g.neighbors[f] = map[n as usize]
                            .ok_or_else(|| MeshError::Audit("piece links a deleted tet".into()))?
                            .0;
                    }
                }
                let id = tets.len() as u32;
                for f in 0..4 {
                    if g.neighbors[f] != FOREIGN {
                        continue;
                    }
                    let key = facet_key(&g.facet(f));
                    match cross.remove(&key) {
                        None => {
                            cross.insert(key, (id, f as u8));
                        }
                        Some((other, of)) => {
                            g.neighbors[f] = other;
                            tets[other as usize].neighbors[of as usize] = id;
                        }
                    }
                }
                tets.push(g);
            }
            maps.push(map);
        }
        if let Some(key) = cross.keys().next() {
            return Err(MeshError::Audit(format!("cross-piece facet {key:?} left unmatched")));
        }
        self.live_tets = tets.len();
        self.tets = tets;
        self.refresh_vertex_hints();
        Ok(maps)
    }
}

use super::edge_removal::{ring_quality, triangle_tets};
use super::{EdgeRing, LocalOpError, OpOutcome};
use crate::mesh::{Cavity, Mesh, Neighbor, TetId, VertexId};
use crate::quality::gamma;

/// Replaces two tetrahedra sharing a facet by three tetrahedra around the
/// segment joining their apexes, if that strictly improves the worse of the two.
pub fn flip_2_3(mesh: &mut Mesh, a: TetId, b: TetId) -> Result<OpOutcome, LocalOpError> {
    let ta = mesh.tet(a);
    let f = (0..4)
        .find(|&f| ta.neighbor(f) == Neighbor::Tet(b))
        .ok_or(LocalOpError::NotAdjacent)?;
    if ta.is_constrained(f) {
        return Err(LocalOpError::ConstrainedFacet);
    }
    let p = ta.vertices[f];
    let [u, v, w] = ta.facet(f);
    let q = *mesh
        .tet(b)
        .vertices
        .iter()
        .find(|x| !ta.contains(**x))
        .ok_or(LocalOpError::NotAdjacent)?;
    let before = ta.quality.min(mesh.tet(b).quality);
    let new_tets = [[u, v, p, q], [v, w, p, q], [w, u, p, q]];
    let after = new_tets
        .iter()
        .map(|t| gamma(&mesh.points_of(t)))
        .fold(f64::INFINITY, f64::min);
    if after <= before {
        return Ok(OpOutcome::Rejected);
    }
    let cavity = Cavity::collect(mesh, &[a, b])?;
    mesh.replace_cavity(&cavity, &new_tets)?;
    Ok(OpOutcome::Applied { before, after })
}

/// Replaces the three tetrahedra around an edge by two, if that strictly
/// improves the worst of them.
pub fn flip_3_2(mesh: &mut Mesh, ring: &EdgeRing) -> Result<OpOutcome, LocalOpError> {
    if ring.ring.len() != 3 || ring.ring_tets.iter().any(|&t| !mesh.is_live(t)) {
        return Ok(OpOutcome::Rejected);
    }
    let before = ring_quality(mesh, ring);
    let new_tets: [[VertexId; 4]; 2] = triangle_tets(ring, [0, 1, 2]);
    let after = new_tets
        .iter()
        .map(|t| gamma(&mesh.points_of(t)))
        .fold(f64::INFINITY, f64::min);
    if after <= before {
        return Ok(OpOutcome::Rejected);
    }
    let cavity = Cavity::collect(mesh, &ring.ring_tets)?;
    mesh.replace_cavity(&cavity, &new_tets)?;
    Ok(OpOutcome::Applied { before, after })
}

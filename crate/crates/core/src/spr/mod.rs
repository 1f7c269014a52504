//! Small polyhedron reconnection: branch-and-bound search for the best
//! tetrahedralization of a cavity with at most 32 points.

mod intersect;
mod memo;
mod search;

pub use memo::{Memo, MAX_POINTS};
pub use search::{SprOutcome, SprState, DEFAULT_NODE_BUDGET};

use std::collections::HashMap;

use thiserror::Error;

use crate::mesh::{Cavity, Mesh, VertexId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SprError {
    #[error("cavity has {0} points, at most 32 are supported")]
    TooManyPoints(usize),
}

/// Finds the best retiling of `cavity` whose worst element beats `floor`.
pub fn spr_search(
    mesh: &Mesh,
    cavity: &Cavity,
    floor: f64,
    node_budget: usize,
) -> Result<SprOutcome<[VertexId; 4]>, SprError> {
    if cavity.all_points.len() > MAX_POINTS {
        return Err(SprError::TooManyPoints(cavity.all_points.len()));
    }
    let positions: Vec<_> = cavity.all_points.iter().map(|&v| mesh.position(v)).collect();
    let mut state = SprState::with_points(&positions)?;
    let local: HashMap<VertexId, u8> = cavity
        .all_points
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, i as u8))
        .collect();
    let shell: Vec<[u8; 3]> = cavity
        .boundary_facets
        .iter()
        .map(|sf| sf.vertices.map(|v| local[&v]))
        .collect();
    let out = state.search(&shell, floor, node_budget);
    Ok(out.map(|t| t.map(|i| cavity.all_points[i as usize])))
}

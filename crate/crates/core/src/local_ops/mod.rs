//! Local mesh improvement: flips, edge removal and vertex smoothing.
//!
//! Every operation either strictly raises the minimum quality of the
//! tetrahedra it touches or leaves the mesh unchanged. An operation that
//! would have to look across a facet owned by another partition returns
//! [`OpOutcome::Suspended`] before mutating anything.

mod edge_removal;
mod flips;
mod smoothing;
mod tables;

pub use edge_removal::{edge_removal, edge_removal_at, EdgeRing, RingStop};
pub use flips::{flip_2_3, flip_3_2};
pub use smoothing::smooth_vertex;
pub use tables::{build_triangulation_tables, triangulation_tables, RingTable, TriangulationTable, MAX_RING};

use thiserror::Error;

use crate::mesh::{MeshError, VertexId};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OpOutcome {
    /// The mesh changed; `before` and `after` are the minimum quality of the
    /// touched region.
    Applied { before: f64, after: f64 },
    /// No strictly better configuration exists (or the operation does not apply).
    Rejected,
    /// The operation needs tetrahedra owned by another partition.
    Suspended,
}

impl OpOutcome {
    pub fn applied(&self) -> bool {
        matches!(self, OpOutcome::Applied { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LocalOpError {
    #[error("tetrahedra do not share a facet")]
    NotAdjacent,
    #[error("shared facet is a constrained surface triangle")]
    ConstrainedFacet,
    #[error("vertex {0:?} lies on the constrained surface")]
    BoundaryVertex(VertexId),
    #[error("edge ({0:?}, {1:?}) is not in the mesh")]
    MissingEdge(VertexId, VertexId),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

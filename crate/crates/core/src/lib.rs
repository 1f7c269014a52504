//! Tetrahedral mesh improvement.
//!
//! Takes a valid tetrahedral mesh with a fixed boundary and raises the quality
//! of its worst elements by vertex smoothing, edge removal and growing SPR
//! cavities, run serially or over space-filling-curve partitions.

pub mod geom;
pub mod gsc;
pub mod io;
pub mod local_ops;
pub mod mesh;
pub mod quality;
pub mod scheduler;
pub mod spr;

pub use mesh::{Cavity, Mesh, MeshError, Neighbor, TetId, VertexId};

//! Improvement schedule: smoothing and edge-removal passes followed by
//! growing-cavity passes, run over space-filling-curve partitions.

mod improve;
mod moore;
mod partition;

pub use improve::{
    improve, next_worker_count, ImproveConfig, ImproveError, ImproveReport, OpKind, OpRecord, Phase, SweepStats,
    DEFAULT_THRESHOLD,
};
pub use moore::{moore_index, moore_index_of_cell, MOORE_ORDER};
pub use partition::{assign_moore_indices, make_partitions, Partition, Partitioning};

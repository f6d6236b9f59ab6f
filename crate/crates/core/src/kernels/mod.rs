//! Point-cloud kernels: chunk partitioning, kd-tree search with a step
//! deadline, bank-conflict elision and chunked sorting.

mod cloud;
mod elide;
mod grid;
mod kdtree;
mod profile;
mod sort;

pub use cloud::{squared_distance, CloudError, Point, PointCloud, SYNTHETIC_ALGORITHM};
pub use elide::{knn_search_elide, ElideReport};
pub use grid::{split_grid, Aabb, ChunkGrid, ChunkGroup, GridError};
pub use kdtree::{
    brute_force_knn, brute_force_range, knn_search, knn_search_visiting, range_search, recall,
    KdTree, Node, SearchResult, Traversal,
};
pub use profile::{
    chunk_access_curve, chunk_access_stats, chunks_touched, profile_deadline, recall_curve,
    DeadlineProfile, ProfileError,
};
pub use sort::{chunked_sort, global_sort, split_serial, uniform_boundaries};

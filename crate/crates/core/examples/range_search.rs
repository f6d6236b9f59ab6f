//! Radius search with and without a step cap.

use pointstream::kernels::{brute_force_range, range_search, KdTree, PointCloud};

fn main() {
    let cloud = PointCloud::synthetic(20_000, 7).unwrap();
    let tree = KdTree::build(cloud.points(), 16);
    let q = [0.5, 0.5, 0.5];
    let truth = brute_force_range(cloud.points(), q, 0.08);
    for deadline in [Some(8), Some(32), Some(128), None] {
        let r = range_search(&tree, q, 0.08, deadline);
        println!(
            "deadline {deadline:?}: {} of {} hits in {} steps, truncated {}",
            r.neighbors.len(),
            truth.len(),
            r.steps_used,
            r.truncated
        );
    }
}

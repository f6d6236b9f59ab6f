//! How many grid chunks a kNN search reads as k grows.

use pointstream::kernels::{chunk_access_curve, split_grid, KdTree, PointCloud};

fn main() {
    let cloud = PointCloud::synthetic(100_000, 0).unwrap();
    let queries = PointCloud::synthetic(100, 1).unwrap();
    let grid = split_grid(&cloud, [8, 8, 1], [1, 1, 1], [1, 1, 1]).unwrap();
    let tree = KdTree::build(cloud.points(), 16);
    for (k, mean) in chunk_access_curve(&grid, &tree, queries.points(), &[16, 32, 64, 128, 256]) {
        println!("k {k:>3}: {mean:5.2} of {} chunks", grid.cell_count());
    }
}

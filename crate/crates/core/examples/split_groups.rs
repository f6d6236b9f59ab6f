//! Chunk groups from a sliding kernel over a grid, and serial chunks.

use pointstream::kernels::{split_grid, split_serial, PointCloud};

fn main() {
    let cloud = PointCloud::synthetic(20_000, 2).unwrap();
    let grid = split_grid(&cloud, [4, 4, 1], [2, 2, 1], [1, 1, 1]).unwrap();
    println!(
        "{} groups over {} cells",
        grid.group_count(),
        grid.cell_count()
    );
    for g in grid.groups().iter().take(4) {
        println!(
            "origin {:?} cells {:?} points {}",
            g.origin,
            g.cells,
            grid.group_points(g).len()
        );
    }
    let serial = split_serial(cloud.len(), 4096);
    println!("serial chunks: {:?}", serial);
}

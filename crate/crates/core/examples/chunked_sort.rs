//! Sorting chunk by chunk along the split axis gives the global order.

use pointstream::kernels::{chunked_sort, global_sort, uniform_boundaries, PointCloud};

fn main() {
    let cloud = PointCloud::synthetic(100_000, 4).unwrap();
    let reference = global_sort(&cloud, 2);
    for parts in [1, 4, 16, 64] {
        let cuts = uniform_boundaries(&cloud, 2, parts);
        println!(
            "{parts:>2} parts: matches {}",
            chunked_sort(&cloud, 2, &cuts) == reference
        );
    }
}

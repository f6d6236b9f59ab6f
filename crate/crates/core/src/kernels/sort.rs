use std::ops::Range;

use super::cloud::PointCloud;

/// Consecutive runs of `points_per_chunk` points in arrival order.
pub fn split_serial(len: usize, points_per_chunk: usize) -> Vec<Range<usize>> {
    assert!(points_per_chunk >= 1, "points per chunk must be >= 1");
    (0..len)
        .step_by(points_per_chunk)
        .map(|s| s..(s + points_per_chunk).min(len))
        .collect()
}

/// Sorts point indices along `axis` chunk by chunk. `boundaries` are the
/// ascending upper edges of all chunks but the last: chunk `j` holds values
/// in `(b[j-1], b[j]]`. Within a chunk, order is by coordinate then index.
pub fn chunked_sort(cloud: &PointCloud, axis: usize, boundaries: &[f64]) -> Vec<usize> {
    assert!(axis < 3, "axis must be 0, 1 or 2");
    assert!(
        boundaries.windows(2).all(|w| w[0] < w[1]),
        "boundaries must ascend"
    );
    let mut buckets = vec![Vec::new(); boundaries.len() + 1];
    for (i, p) in cloud.points().iter().enumerate() {
        buckets[boundaries.partition_point(|&b| b < p[axis])].push(i);
    }
    for b in &mut buckets {
        b.sort_by(|&x, &y| {
            cloud.point(x)[axis]
                .total_cmp(&cloud.point(y)[axis])
                .then(x.cmp(&y))
        });
    }
    buckets.concat()
}

/// Stable global sort along `axis`.
pub fn global_sort(cloud: &PointCloud, axis: usize) -> Vec<usize> {
    chunked_sort(cloud, axis, &[])
}

/// `parts - 1` evenly spaced boundaries over the cloud's extent on `axis`.
pub fn uniform_boundaries(cloud: &PointCloud, axis: usize, parts: usize) -> Vec<f64> {
    assert!(parts >= 1, "at least one part");
    let (lo, hi) = cloud
        .points()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p[axis]), hi.max(p[axis]))
        });
    let mut b: Vec<f64> = (1..parts)
        .map(|j| lo + (hi - lo) * j as f64 / parts as f64)
        .collect();
    b.dedup();
    b
}

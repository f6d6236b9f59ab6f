//! Offline profiling: deadline selection, recall curves and chunk access.

use std::collections::BTreeSet;

use super::cloud::Point;
use super::grid::ChunkGrid;
use super::kdtree::{brute_force_knn, knn_search, knn_search_visiting, recall, KdTree};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProfileError {
    #[error("query set is empty")]
    NoQueries,
    #[error("fraction must be in (0, 1], got {0}")]
    BadFraction(f64),
    #[error("k must be >= 1")]
    ZeroK,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeadlineProfile {
    pub mean_steps: f64,
    pub max_steps: usize,
    pub deadline: usize,
}

/// Runs every query uncapped and suggests `ceil(fraction * mean steps)`.
pub fn profile_deadline(
    tree: &KdTree,
    queries: &[Point],
    k: usize,
    fraction: f64,
) -> Result<DeadlineProfile, ProfileError> {
    if queries.is_empty() {
        return Err(ProfileError::NoQueries);
    }
    if k == 0 {
        return Err(ProfileError::ZeroK);
    }
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(ProfileError::BadFraction(fraction));
    }
    let steps: Vec<usize> = queries
        .iter()
        .map(|&q| knn_search(tree, q, k, None).steps_used)
        .collect();
    let mean_steps = steps.iter().sum::<usize>() as f64 / steps.len() as f64;
    Ok(DeadlineProfile {
        mean_steps,
        max_steps: steps.iter().copied().max().unwrap_or(0),
        deadline: ((fraction * mean_steps).ceil() as usize).max(1),
    })
}

/// Mean recall@k against brute force at each deadline (`None` = uncapped).
pub fn recall_curve(
    tree: &KdTree,
    queries: &[Point],
    k: usize,
    deadlines: &[Option<usize>],
) -> Vec<(Option<usize>, f64)> {
    let truths: Vec<_> = queries
        .iter()
        .map(|&q| brute_force_knn(tree.points(), q, k))
        .collect();
    deadlines
        .iter()
        .map(|&d| {
            let total: f64 = queries
                .iter()
                .zip(&truths)
                .map(|(&q, truth)| recall(&knn_search(tree, q, k, d).neighbors, truth))
                .sum();
            (d, total / queries.len().max(1) as f64)
        })
        .collect()
}

/// Distinct grid cells holding the points an uncapped kNN search examines.
pub fn chunks_touched(grid: &ChunkGrid, tree: &KdTree, query: Point, k: usize) -> usize {
    let mut cells = BTreeSet::new();
    knn_search_visiting(tree, query, k, None, |i| {
        cells.insert(grid.cell_of(i));
    });
    cells.len()
}

/// Mean of [`chunks_touched`] over `queries`.
pub fn chunk_access_stats(grid: &ChunkGrid, tree: &KdTree, queries: &[Point], k: usize) -> f64 {
    let total: usize = queries
        .iter()
        .map(|&q| chunks_touched(grid, tree, q, k))
        .sum();
    total as f64 / queries.len().max(1) as f64
}

/// `(k, mean chunks touched)` for each `k`.
pub fn chunk_access_curve(
    grid: &ChunkGrid,
    tree: &KdTree,
    queries: &[Point],
    ks: &[usize],
) -> Vec<(usize, f64)> {
    ks.iter()
        .map(|&k| (k, chunk_access_stats(grid, tree, queries, k)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::cloud::PointCloud;
    use crate::kernels::grid::split_grid;

    #[test]
    fn validation() {
        let c = PointCloud::synthetic(100, 1).unwrap();
        let t = KdTree::build(c.points(), 4);
        assert_eq!(
            profile_deadline(&t, &[], 4, 0.5),
            Err(ProfileError::NoQueries)
        );
        assert_eq!(
            profile_deadline(&t, &[[0.0; 3]], 4, 0.0),
            Err(ProfileError::BadFraction(0.0))
        );
        assert_eq!(
            profile_deadline(&t, &[[0.0; 3]], 4, 1.5),
            Err(ProfileError::BadFraction(1.5))
        );
        assert_eq!(
            profile_deadline(&t, &[[0.0; 3]], 0, 0.5),
            Err(ProfileError::ZeroK)
        );
    }

    #[test]
    fn full_fraction_is_mean_steps() {
        let c = PointCloud::synthetic(2000, 2).unwrap();
        let t = KdTree::build(c.points(), 8);
        let qs = PointCloud::synthetic(40, 3).unwrap();
        let p = profile_deadline(&t, qs.points(), 8, 1.0).unwrap();
        assert_eq!(p.deadline, p.mean_steps.ceil() as usize);
        let quarter = profile_deadline(&t, qs.points(), 8, 0.25).unwrap();
        assert_eq!(quarter.deadline, (0.25 * p.mean_steps).ceil() as usize);
        let curve = recall_curve(
            &t,
            qs.points(),
            8,
            &[Some(quarter.deadline), Some(p.max_steps), None],
        );
        assert!(curve[0].1 <= curve[1].1);
        assert_eq!(curve[1].1, 1.0);
        assert_eq!(curve[2].1, 1.0);
    }

    #[test]
    fn lone_cluster_touches_one_chunk() {
        // A tight cluster deep inside one cell of a 2x2 grid.
        let mut pts = vec![
            [0.0, 0.0, 0.0],
            [1.0, 1.0, 0.0],
            [0.0, 1.0, 0.0],
            [1.0, 0.0, 0.0],
        ];
        pts.extend((0..6).map(|i| [0.2 + 0.01 * i as f64, 0.2, 0.0]));
        let c = PointCloud::new(pts).unwrap();
        let g = split_grid(&c, [2, 2, 1], [1, 1, 1], [1, 1, 1]).unwrap();
        let t = KdTree::build(c.points(), 8);
        assert_eq!(t.nodes().len(), 3);
        assert_eq!(chunks_touched(&g, &t, [0.22, 0.2, 0.0], 1), 2);
        let t = KdTree::build(c.points(), 1);
        assert_eq!(chunks_touched(&g, &t, [0.22, 0.2, 0.0], 1), 1);
    }
}

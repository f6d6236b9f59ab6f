use pointstream::kernels::{
    brute_force_knn, brute_force_range, knn_search, range_search, recall, split_grid, KdTree,
    PointCloud,
};
use proptest::prelude::*;

fn cloud(n: usize, seed: u64) -> PointCloud {
    PointCloud::synthetic(n, seed).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn search_never_exceeds_its_deadline(seed in 0u64..10_000, k in 1usize..40, deadline in 1usize..200, leaf in 1usize..24) {
        let c = cloud(1500, seed);
        let t = KdTree::build(c.points(), leaf);
        for &q in cloud(16, seed + 1).points() {
            let r = knn_search(&t, q, k, Some(deadline));
            prop_assert!(r.steps_used <= deadline);
            let within = range_search(&t, q, 0.1, Some(deadline));
            prop_assert!(within.steps_used <= deadline);
        }
    }

    #[test]
    fn longer_deadlines_never_lose_neighbours(seed in 0u64..10_000, k in 1usize..40) {
        let c = cloud(1500, seed);
        let t = KdTree::build(c.points(), 8);
        for &q in cloud(8, seed + 1).points() {
            let truth = brute_force_knn(c.points(), q, k);
            let mut last = 0.0;
            for d in [1, 2, 4, 8, 16, 32, 64, 128, 256] {
                let r = recall(&knn_search(&t, q, k, Some(d)).neighbors, &truth);
                prop_assert!(r >= last, "deadline {}: {} < {}", d, r, last);
                last = r;
            }
            prop_assert_eq!(knn_search(&t, q, k, None).neighbors, truth);
        }
    }

    #[test]
    fn range_search_matches_brute_force(seed in 0u64..10_000, radius in 0.0f64..0.4) {
        let c = cloud(1200, seed);
        let t = KdTree::build(c.points(), 6);
        for &q in cloud(8, seed + 1).points() {
            prop_assert_eq!(range_search(&t, q, radius, None).neighbors, brute_force_range(c.points(), q, radius));
        }
    }

    #[test]
    fn every_point_lands_in_exactly_one_cell(seed in 0u64..10_000, gx in 1usize..9, gy in 1usize..9, gz in 1usize..4) {
        let c = cloud(700, seed);
        let grid = split_grid(&c, [gx, gy, gz], [1, 1, 1], [1, 1, 1]).unwrap();
        let mut seen = vec![0; c.len()];
        for cell in 0..grid.cell_count() {
            for &i in grid.cell(cell) {
                seen[i] += 1;
                prop_assert_eq!(grid.cell_of(i), cell);
            }
        }
        prop_assert!(seen.iter().all(|&n| n == 1));
    }

    #[test]
    fn tree_depth_is_logarithmic(n in 1usize..5000, leaf in 1usize..32) {
        let t = KdTree::build(cloud(n, n as u64).points(), leaf);
        let mut want = 0;
        while leaf << want < n {
            want += 1;
        }
        prop_assert_eq!(t.depth(), want);
    }
}

#[test]
fn neighbouring_groups_share_kernel_minus_stride_layers() {
    let c = cloud(4000, 3);
    for (kernel, stride) in [(2, 1), (3, 1), (3, 2), (4, 2)] {
        let grid = split_grid(&c, [8, 8, 1], [kernel, kernel, 1], [stride, stride, 1]).unwrap();
        let groups = grid.groups();
        let across = grid.groups_per_axis()[0];
        for pair in groups.chunks(across).flat_map(|row| row.windows(2)) {
            let shared = pair[0]
                .cells
                .iter()
                .filter(|c| pair[1].cells.contains(c))
                .count();
            assert_eq!(
                shared,
                (kernel - stride) * kernel,
                "kernel {kernel} stride {stride}"
            );
        }
        assert_eq!(groups.len(), ((8 - kernel) / stride + 1).pow(2));
    }
}

#[test]
fn groups_cover_every_point_when_stride_fits() {
    let c = cloud(4000, 4);
    let grid = split_grid(&c, [8, 8, 1], [2, 2, 1], [2, 2, 1]).unwrap();
    let mut all: Vec<usize> = grid
        .groups()
        .iter()
        .flat_map(|g| grid.group_points(g))
        .collect();
    all.sort_unstable();
    assert_eq!(all, (0..c.len()).collect::<Vec<_>>());
}

//! Lock-step searches over banked node memory: stalling versus skipping the
//! contested subtree.

use pointstream::kernels::{
    brute_force_knn, knn_search, knn_search_elide, recall, KdTree, PointCloud,
};
use pointstream::simulator::BankModel;

fn main() {
    let cloud = PointCloud::synthetic(4000, 5).unwrap();
    let queries = PointCloud::synthetic(32, 6).unwrap();
    let tree = KdTree::build(cloud.points(), 8);
    let k = 16;
    let deadline = Some(60);
    let lanes = 4;
    for banks in [1, 2, 4, 8, 16] {
        let (mut cycles, mut skips, mut elided, mut exact) = (0, 0, 0.0, 0.0);
        for group in queries.points().chunks(lanes) {
            let report = knn_search_elide(&tree, group, &BankModel::new(banks), k, deadline);
            cycles += report.cycles;
            skips += report.elided;
            for (r, &q) in report.results.iter().zip(group) {
                let truth = brute_force_knn(cloud.points(), q, k);
                elided += recall(&r.neighbors, &truth);
                exact += recall(&knn_search(&tree, q, k, deadline).neighbors, &truth);
            }
        }
        let n = queries.len() as f64;
        println!(
            "{banks:>2} banks: {cycles} cycles, {skips} skips, recall {:.3} (conflict-free {:.3})",
            elided / n,
            exact / n
        );
    }
}

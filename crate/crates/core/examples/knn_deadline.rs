//! Recall of capped kNN searches as the step budget grows.

use pointstream::kernels::{profile_deadline, recall_curve, KdTree, PointCloud};

fn main() {
    let cloud = PointCloud::synthetic(10_000, 0).unwrap();
    let queries = PointCloud::synthetic(200, 1).unwrap();
    let tree = KdTree::build(cloud.points(), 16);
    let k = 32;
    let mut deadlines = vec![None];
    for fraction in [0.0625, 0.125, 0.25, 0.5, 1.0] {
        let p = profile_deadline(&tree, queries.points(), k, fraction).unwrap();
        println!(
            "fraction {fraction:<6} mean {:.1} max {} -> deadline {}",
            p.mean_steps, p.max_steps, p.deadline
        );
        deadlines.push(Some(p.deadline));
    }
    for (d, r) in recall_curve(&tree, queries.points(), k, &deadlines) {
        let label = d.map_or("inf".to_string(), |d| d.to_string());
        println!("deadline {label:>4}: recall@{k} {r:.3}");
    }
}

//! Minimum line buffers for a two-stage blur, built in code.

use pointstream::graph::{PipelineGraph, Shape, StageKind, StageSpec};
use pointstream::optimizer::{optimize, Options, ScheduleDoc};

fn main() {
    let stages = vec![
        StageSpec::new(
            "pixels",
            StageKind::Elementwise,
            Shape::new(1, 1),
            Shape::new(1, 1),
            0,
        ),
        StageSpec::new(
            "blur",
            StageKind::Stencil,
            Shape::new(1, 3),
            Shape::new(1, 1),
            2,
        )
        .with_reuse([3, 1]),
    ];
    let graph = PipelineGraph::chain(stages, 25).unwrap();
    let sol = optimize(&graph, Options::default()).unwrap();
    println!(
        "{}",
        ScheduleDoc::from_solution(&graph, &sol, Some(4)).to_json()
    );
    println!(
        "rows: pruned {} vs per-timestamp {}",
        sol.constraint_counts.pruned, sol.constraint_counts.unpruned
    );
}

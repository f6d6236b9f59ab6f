//! Streams several chunks back to back with bubbles so each edge keeps its
//! single-chunk buffer.

use pointstream::graph::parse_pipeline;
use pointstream::optimizer::{optimize, schedule_chunks, Options};
use pointstream::simulator::{peak_occupancy, simulate};

fn main() {
    let graph = parse_pipeline(include_str!("../pipelines/knn_stencil.json")).unwrap();
    let single = optimize(&graph, Options::default()).unwrap();
    println!(
        "interval {} bubbles {:?}",
        single.initiation_interval, single.bubbles
    );
    for chunks in [1, 2, 4, 8, 16] {
        let sol = schedule_chunks(&single, &graph, chunks);
        let trace = simulate(&graph, &sol, chunks);
        println!(
            "{chunks:>2} chunks: makespan {:>4}, peaks {:?}, clean {}",
            sol.makespan,
            peak_occupancy(&trace),
            trace.is_clean()
        );
    }
}

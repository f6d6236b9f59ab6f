//! Replays an optimized schedule cycle by cycle, then shows that one slot
//! less on any edge overflows.

use pointstream::graph::parse_pipeline;
use pointstream::optimizer::{optimize, Options};
use pointstream::simulator::{peak_occupancy, simulate, simulate_starts};

fn main() {
    let graph = parse_pipeline(include_str!("../pipelines/global_chain.json")).unwrap();
    let sol = optimize(&graph, Options::default()).unwrap();
    let trace = simulate(&graph, &sol, 1);
    println!("clean: {}", trace.is_clean());
    for (e, peak) in peak_occupancy(&trace).into_iter().enumerate() {
        let mut caps = sol.buffer_sizes.clone();
        caps[e] -= 1;
        let tight = simulate_starts(&graph, &sol.start_cycles, &caps, sol.initiation_interval, 1);
        println!(
            "{:<12} peak {:>3}  overflows at {:>3}: {}",
            graph.edge_label(e),
            peak,
            caps[e],
            !tight.overflow_events.is_empty()
        );
    }
}

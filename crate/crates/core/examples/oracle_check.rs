//! Cross-checks the solver against exhaustive enumeration of start cycles.

use pointstream::graph::parse_pipeline;
use pointstream::optimizer::oracle::{oracle_horizon, verify_against_oracle};

fn main() {
    for text in [
        include_str!("../pipelines/stencil_3x3.json"),
        include_str!("../pipelines/knn_stencil.json"),
        include_str!("../pipelines/global_chain.json"),
    ] {
        let graph = parse_pipeline(text).unwrap();
        let report = verify_against_oracle(&graph, oracle_horizon(&graph)).unwrap();
        let total = |c: &Option<_>| {
            c.as_ref()
                .map(|c: &pointstream::optimizer::oracle::Candidate| c.total_buffer)
        };
        println!(
            "{:?}: solver {:?} oracle {:?} match {}",
            graph
                .stages()
                .iter()
                .map(|s| s.id.as_str())
                .collect::<Vec<_>>(),
            total(&report.solver),
            total(&report.oracle),
            report.matches()
        );
    }
}

//! Periodic multi-chunk execution.

use crate::graph::PipelineGraph;
use crate::rational::{self, Rational};

use super::model::{analytic_occupancy, overwrite_start};
use super::ScheduleSolution;

/// Cycles `[first, last]` outside of which one chunk leaves `edge` empty.
fn occupied_span(graph: &PipelineGraph, starts: &[i64], edge: usize) -> (i64, i64) {
    let e = graph.edges()[edge];
    let t_w = starts[e.producer] + graph.stage(e.producer).stage_depth as i64;
    let t_o = overwrite_start(graph, starts, edge);
    let last = (t_w + graph.work(e.producer).duration).max(t_o + graph.work(e.consumer).duration);
    (t_w, last)
}

/// Steady-state peak occupancy of `edge` when chunks launch every `period`
/// cycles indefinitely.
pub fn periodic_peak(graph: &PipelineGraph, starts: &[i64], edge: usize, period: i64) -> Rational {
    assert!(period >= 1);
    let (first, last) = occupied_span(graph, starts, edge);
    (0..period)
        .map(|r| {
            (first + r..=last)
                .step_by(period as usize)
                .map(|t| analytic_occupancy(graph, starts, edge, t))
                .sum::<Rational>()
        })
        .max()
        .unwrap_or_else(|| rational::int(0))
}

/// Smallest launch period, no shorter than the longest stage, under which
/// no edge holds more than its single-chunk allocation.
pub fn initiation_interval(graph: &PipelineGraph, starts: &[i64], buffers: &[i64]) -> i64 {
    let longest = (0..graph.stage_count())
        .map(|i| graph.work(i).duration)
        .max()
        .unwrap_or(1);
    let mut period = longest.max(1);
    loop {
        let fits = (0..graph.edge_count())
            .all(|e| rational::ceil(periodic_peak(graph, starts, e, period)) <= buffers[e]);
        if fits {
            return period;
        }
        period += 1;
    }
}

/// Extends a single-chunk schedule to `chunk_count` chunks.
pub fn schedule_chunks(
    solution: &ScheduleSolution,
    graph: &PipelineGraph,
    chunk_count: usize,
) -> ScheduleSolution {
    assert!(chunk_count >= 1, "at least one chunk");
    let single = super::single_chunk_makespan(graph, &solution.start_cycles);
    ScheduleSolution {
        chunk_count,
        makespan: single + (chunk_count as i64 - 1) * solution.initiation_interval,
        ..solution.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Shape, StageKind, StageSpec};
    use crate::optimizer::{optimize, Options};

    #[test]
    fn local_chain_uses_longest_stage() {
        let a = StageSpec::new(
            "a",
            StageKind::Elementwise,
            Shape::new(2, 1),
            Shape::new(2, 1),
            1,
        );
        let b = StageSpec::new(
            "b",
            StageKind::Elementwise,
            Shape::new(1, 1),
            Shape::new(1, 1),
            0,
        );
        let g = crate::graph::PipelineGraph::chain(vec![a, b], 16).unwrap();
        let sol = optimize(&g, Options::default()).unwrap();
        assert_eq!(sol.initiation_interval, 16);
        assert_eq!(sol.bubbles, vec![8, 0]);
    }

    #[test]
    fn one_chunk_is_unchanged() {
        let a = StageSpec::new(
            "a",
            StageKind::Elementwise,
            Shape::new(1, 1),
            Shape::new(1, 1),
            2,
        );
        let b = StageSpec::new(
            "b",
            StageKind::Global,
            Shape::new(1, 1),
            Shape::new(1, 1),
            1,
        );
        let g = crate::graph::PipelineGraph::chain(vec![a, b], 6).unwrap();
        let sol = optimize(&g, Options::default()).unwrap();
        assert_eq!(schedule_chunks(&sol, &g, 1), sol);
        let eight = schedule_chunks(&sol, &g, 8);
        assert_eq!(eight.makespan, sol.makespan + 7 * sol.initiation_interval);
        // The global consumer holds a chunk until it finishes.
        assert!(sol.initiation_interval > 6);
    }
}

//! Cycle-stepped token simulator.
//!
//! Stages move exact fractional token amounts each cycle, so occupancy
//! matches the closed-form model exactly. The simulator only checks a
//! schedule; it never delays a stage.

mod banked;
mod export;

use crate::graph::{Dependency, PipelineGraph};
use crate::optimizer::{overwrite_start, ScheduleSolution};
use crate::rational::{self, Rational};

pub use banked::{arbitrate, simulate_banked, Access, BankLog, BankModel, BankPolicy};
pub use export::{write_csv, Summary};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StallCause {
    /// A local consumer wants tokens its producer has not written yet.
    DataUnavailable,
    /// A global consumer started before its producer finished.
    InputIncomplete,
}

impl StallCause {
    pub fn as_str(self) -> &'static str {
        match self {
            StallCause::DataUnavailable => "data-unavailable",
            StallCause::InputIncomplete => "input-incomplete",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StallEvent {
    pub cycle: i64,
    pub stage: usize,
    pub edge: usize,
    pub chunk: usize,
    pub cause: StallCause,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OverflowEvent {
    pub cycle: i64,
    pub edge: usize,
    pub occupancy: Rational,
    pub capacity: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimTrace {
    /// Cycle of `occupancy[e][0]`.
    pub first_cycle: i64,
    /// Occupancy per edge per cycle.
    pub occupancy: Vec<Vec<Rational>>,
    pub capacities: Vec<i64>,
    pub stall_events: Vec<StallEvent>,
    pub overflow_events: Vec<OverflowEvent>,
    /// Cycle after which every chunk has written all of its outputs.
    pub completion_cycle: i64,
    pub chunk_completions: Vec<i64>,
    /// Chunk-0 first read and first write cycle per stage.
    pub first_read: Vec<i64>,
    pub first_write: Vec<i64>,
    /// Tokens written to and freed from each edge over the run.
    pub written: Vec<Rational>,
    pub freed: Vec<Rational>,
}

impl SimTrace {
    pub fn is_clean(&self) -> bool {
        self.stall_events.is_empty() && self.overflow_events.is_empty()
    }

    pub fn cycles(&self) -> usize {
        self.occupancy.first().map_or(0, Vec::len)
    }

    pub fn occupancy_at(&self, edge: usize, cycle: i64) -> Rational {
        let i = cycle - self.first_cycle;
        if i < 0 {
            return rational::int(0);
        }
        self.occupancy[edge]
            .get(i as usize)
            .copied()
            .unwrap_or_else(|| rational::int(0))
    }

    /// Spacing between consecutive chunk completions, if all are equal.
    pub fn steady_interval(&self) -> Option<i64> {
        let gaps: Vec<i64> = self
            .chunk_completions
            .windows(2)
            .map(|w| w[1] - w[0])
            .collect();
        match gaps.split_first() {
            Some((first, rest)) if rest.iter().all(|g| g == first) => Some(*first),
            _ => None,
        }
    }
}

/// Slots needed per edge: the ceiling of the peak occupancy.
pub fn peak_occupancy(trace: &SimTrace) -> Vec<i64> {
    trace
        .occupancy
        .iter()
        .map(|series| series.iter().copied().max().map_or(0, rational::ceil))
        .collect()
}

/// Simulates `chunk_count` chunks of `solution`.
pub fn simulate(
    graph: &PipelineGraph,
    solution: &ScheduleSolution,
    chunk_count: usize,
) -> SimTrace {
    simulate_starts(
        graph,
        &solution.start_cycles,
        &solution.buffer_sizes,
        solution.initiation_interval,
        chunk_count,
    )
}

#[derive(Debug, Clone, Copy)]
struct Lane {
    written: Rational,
    read: Rational,
    freed: Rational,
}

/// Simulates chunks launched every `period` cycles from `starts`, checking
/// occupancy against `capacities`.
pub fn simulate_starts(
    graph: &PipelineGraph,
    starts: &[i64],
    capacities: &[i64],
    period: i64,
    chunk_count: usize,
) -> SimTrace {
    assert!(chunk_count >= 1, "at least one chunk");
    assert_eq!(starts.len(), graph.stage_count());
    assert_eq!(capacities.len(), graph.edge_count());
    let n = graph.stage_count();
    let zero = rational::int(0);
    let depth = |i: usize| graph.stage(i).stage_depth as i64;
    let launch = |c: usize| c as i64 * period;

    let first_cycle = starts.iter().copied().min().unwrap_or(0);
    let mut last_cycle = first_cycle;
    for i in 0..n {
        last_cycle = last_cycle.max(starts[i] + depth(i) + graph.work(i).duration);
    }
    for e in 0..graph.edge_count() {
        let c = graph.edges()[e].consumer;
        last_cycle = last_cycle.max(overwrite_start(graph, starts, e) + graph.work(c).duration);
    }
    last_cycle += launch(chunk_count - 1);

    let mut lanes = vec![
        vec![
            Lane {
                written: zero,
                read: zero,
                freed: zero,
            };
            chunk_count
        ];
        graph.edge_count()
    ];
    let mut emitted = vec![vec![zero; chunk_count]; n];
    let mut chunk_done = vec![None::<i64>; chunk_count];
    let mut first_read = vec![None::<i64>; n];
    let mut first_write = vec![None::<i64>; n];
    let span = (last_cycle - first_cycle + 1) as usize;
    let mut trace = SimTrace {
        first_cycle,
        occupancy: vec![Vec::with_capacity(span); graph.edge_count()],
        capacities: capacities.to_vec(),
        stall_events: Vec::new(),
        overflow_events: Vec::new(),
        completion_cycle: 0,
        chunk_completions: Vec::new(),
        first_read: Vec::new(),
        first_write: Vec::new(),
        written: vec![zero; graph.edge_count()],
        freed: vec![zero; graph.edge_count()],
    };

    for t in first_cycle..=last_cycle {
        // Stage activity.
        for i in 0..n {
            let w = graph.work(i);
            for c in 0..chunk_count {
                let s = starts[i] + launch(c);
                if c == 0 && (s..s + w.duration).contains(&t) && first_read[i].is_none() {
                    first_read[i] = Some(t);
                }
                let t_w = s + depth(i);
                if (t_w..t_w + w.duration).contains(&t) {
                    if c == 0 && first_write[i].is_none() {
                        first_write[i] = Some(t);
                    }
                    emitted[i][c] = (emitted[i][c] + w.rates.tau_out).min(rational::int(w.work));
                }
            }
        }

        for (ei, e) in graph.edges().iter().enumerate() {
            let flow = graph.flow(ei);
            let volume = rational::int(flow.volume);
            let (p, q) = (e.producer, e.consumer);
            let mut occupancy = zero;
            for c in 0..chunk_count {
                let lane = &mut lanes[ei][c];
                let t_w = starts[p] + depth(p) + launch(c);
                let s_c = starts[q] + launch(c);
                let t_o = overwrite_start(graph, starts, ei) + launch(c);

                // A global consumer needs the whole input before its first read.
                let complete_before = lane.written == volume;
                if (t_w..t_w + graph.work(p).duration).contains(&t) {
                    lane.written = (lane.written + graph.work(p).rates.tau_out).min(volume);
                }
                if (s_c..s_c + graph.work(q).duration).contains(&t) {
                    if t == s_c && flow.dependency == Dependency::Global && !complete_before {
                        trace.stall_events.push(StallEvent {
                            cycle: t,
                            stage: q,
                            edge: ei,
                            chunk: c,
                            cause: StallCause::InputIncomplete,
                        });
                    }
                    lane.read = (lane.read + flow.read_rate).min(volume);
                    if lane.read > lane.written {
                        trace.stall_events.push(StallEvent {
                            cycle: t,
                            stage: q,
                            edge: ei,
                            chunk: c,
                            cause: StallCause::DataUnavailable,
                        });
                    }
                }
                occupancy += lane.written - lane.freed;
                // Freed slots are reusable from the next cycle.
                if t >= t_o {
                    lane.freed = (lane.freed + flow.read_rate).min(volume);
                }
            }
            if occupancy > rational::int(capacities[ei]) {
                trace.overflow_events.push(OverflowEvent {
                    cycle: t,
                    edge: ei,
                    occupancy,
                    capacity: capacities[ei],
                });
            }
            trace.occupancy[ei].push(occupancy);
        }

        for (c, done) in chunk_done.iter_mut().enumerate() {
            if done.is_none() && (0..n).all(|i| emitted[i][c] == rational::int(graph.work(i).work))
            {
                *done = Some(t + 1);
            }
        }
    }

    for ei in 0..graph.edge_count() {
        trace.written[ei] = lanes[ei].iter().map(|l| l.written).sum();
        trace.freed[ei] = lanes[ei].iter().map(|l| l.freed).sum();
    }
    trace.chunk_completions = chunk_done
        .into_iter()
        .map(|d| d.unwrap_or(last_cycle + 1))
        .collect();
    trace.completion_cycle = trace
        .chunk_completions
        .iter()
        .copied()
        .max()
        .unwrap_or(first_cycle);
    trace.first_read = (0..n).map(|i| first_read[i].unwrap_or(starts[i])).collect();
    trace.first_write = (0..n)
        .map(|i| first_write[i].unwrap_or(starts[i] + depth(i)))
        .collect();
    trace
}

/// Single-chunk token simulation of one edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeRun {
    pub peak: Rational,
    pub stalled: bool,
}

impl EdgeRun {
    /// Slots the edge needs, or `None` when the consumer would stall.
    pub fn cost(&self) -> Option<i64> {
        (!self.stalled).then(|| rational::ceil(self.peak))
    }
}

/// Runs only `edge` of `graph`, ignoring every other edge.
pub fn simulate_edge(graph: &PipelineGraph, starts: &[i64], edge: usize) -> EdgeRun {
    let e = graph.edges()[edge];
    let flow = graph.flow(edge);
    let volume = rational::int(flow.volume);
    let pw = graph.work(e.producer);
    let d_c = graph.work(e.consumer).duration;
    let t_w = starts[e.producer] + graph.stage(e.producer).stage_depth as i64;
    let s_c = starts[e.consumer];
    let t_o = overwrite_start(graph, starts, edge);
    let first = t_w.min(s_c);
    let last = (t_w + pw.duration).max(t_o + d_c);

    let zero = rational::int(0);
    let (mut written, mut read, mut freed, mut peak) = (zero, zero, zero, zero);
    let mut stalled = false;
    for t in first..=last {
        let complete_before = written == volume;
        if (t_w..t_w + pw.duration).contains(&t) {
            written = (written + pw.rates.tau_out).min(volume);
        }
        if (s_c..s_c + d_c).contains(&t) {
            if t == s_c && flow.dependency == Dependency::Global && !complete_before {
                stalled = true;
            }
            read = (read + flow.read_rate).min(volume);
            stalled |= read > written;
        }
        peak = peak.max(written - freed);
        if t >= t_o {
            freed = (freed + flow.read_rate).min(volume);
        }
    }
    EdgeRun { peak, stalled }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Shape, StageKind, StageSpec};
    use crate::optimizer::{analytic_occupancy, optimize, schedule_chunks, Options};

    fn two_stage() -> PipelineGraph {
        let a = StageSpec::new(
            "a",
            StageKind::Elementwise,
            Shape::new(2, 1),
            Shape::new(2, 1),
            1,
        );
        let b = StageSpec::new(
            "b",
            StageKind::Stencil,
            Shape::new(1, 3),
            Shape::new(1, 1),
            2,
        )
        .with_reuse([3, 1]);
        PipelineGraph::chain(vec![a, b], 24).unwrap()
    }

    #[test]
    fn optimized_schedule_is_clean_and_tight() {
        let g = two_stage();
        let sol = optimize(&g, Options::default()).unwrap();
        let trace = simulate(&g, &sol, 1);
        assert!(trace.is_clean(), "{:?}", trace.stall_events);
        assert_eq!(peak_occupancy(&trace), sol.buffer_sizes);
        assert_eq!(trace.written[0], rational::int(24));
        assert_eq!(trace.freed[0], rational::int(24));
    }

    #[test]
    fn matches_closed_form() {
        let g = two_stage();
        for lag in 0..6 {
            let starts = [0, 1 + lag];
            let trace = simulate_starts(&g, &starts, &[100], 1, 1);
            for t in trace.first_cycle..trace.first_cycle + trace.cycles() as i64 {
                assert_eq!(
                    trace.occupancy_at(0, t),
                    analytic_occupancy(&g, &starts, 0, t)
                );
            }
        }
    }

    #[test]
    fn shrinking_a_buffer_overflows() {
        let g = two_stage();
        let sol = optimize(&g, Options::default()).unwrap();
        let mut caps = sol.buffer_sizes.clone();
        caps[0] -= 1;
        let trace = simulate_starts(&g, &sol.start_cycles, &caps, sol.initiation_interval, 1);
        assert!(trace.overflow_events.iter().any(|o| o.edge == 0));
    }

    #[test]
    fn early_consumer_stalls() {
        let g = two_stage();
        let trace = simulate_starts(&g, &[0, 0], &[100], 1, 1);
        assert!(trace
            .stall_events
            .iter()
            .any(|s| s.cause == StallCause::DataUnavailable));
    }

    #[test]
    fn chunks_complete_every_interval() {
        let g = two_stage();
        let sol = schedule_chunks(&optimize(&g, Options::default()).unwrap(), &g, 4);
        let trace = simulate(&g, &sol, 4);
        assert!(trace.is_clean());
        assert_eq!(trace.steady_interval(), Some(sol.initiation_interval));
        assert_eq!(peak_occupancy(&trace), sol.buffer_sizes);
    }

    #[test]
    fn single_stage_has_no_edges() {
        let a = StageSpec::new(
            "a",
            StageKind::Elementwise,
            Shape::new(1, 1),
            Shape::new(1, 1),
            0,
        );
        let g = PipelineGraph::chain(vec![a], 4).unwrap();
        let trace = simulate_starts(&g, &[0], &[], 1, 1);
        assert!(peak_occupancy(&trace).is_empty());
        assert_eq!(trace.completion_cycle, 4);
    }

    #[test]
    fn edge_run_agrees_with_full_run() {
        let g = two_stage();
        for lag in 0..6 {
            let starts = [0, 1 + lag];
            let full = simulate_starts(&g, &starts, &[100], 1, 1);
            let single = simulate_edge(&g, &starts, 0);
            assert_eq!(single.stalled, !full.stall_events.is_empty());
            assert_eq!(
                single.peak,
                full.occupancy[0].iter().copied().max().unwrap()
            );
        }
    }
}

//! Line-buffer minimization.
//!
//! [`build_constraints`] turns a [`PipelineGraph`] into an integer program over
//! stage start cycles; [`solve`] minimizes the summed buffer size exactly and
//! picks the lexicographically smallest start vector among optima.
//! [`schedule_chunks`] extends a single-chunk schedule to periodic
//! multi-chunk execution.

mod chunks;
pub mod ilp;
pub mod lp;
mod model;
pub mod oracle;
mod schedule_file;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use crate::graph::PipelineGraph;
use crate::rational;

use lp::{Row, Sense};

pub use chunks::{initiation_interval, periodic_peak, schedule_chunks};
pub use ilp::{IlpOutcome, IntegerProgram};
pub use model::{
    analytic_occupancy, analytic_peak, build_constraints, default_horizon, earliest_starts,
    min_lag, overwrite_start, BuildError, Constraint, ConstraintSystem, EdgeVars, Role, VarKind,
    Variable,
};
pub use schedule_file::{ScheduleDoc, ScheduleFileError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OptimizeError {
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error("constraint system is infeasible")]
    Infeasible,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub struct ConstraintCounts {
    pub pruned: usize,
    pub unpruned: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleSolution {
    /// Chunk-0 start cycle per stage.
    pub start_cycles: Vec<i64>,
    /// Line-buffer capacity per edge, in elements.
    pub buffer_sizes: Vec<i64>,
    pub total_buffer: i64,
    /// Cycles from the first read to the last write over all chunks.
    pub makespan: i64,
    /// Cycles between consecutive chunk launches.
    pub initiation_interval: i64,
    pub chunk_count: usize,
    /// Idle cycles inserted before each chunk after the first, per stage.
    pub bubbles: Vec<i64>,
    pub constraint_counts: ConstraintCounts,
    /// Branch-and-bound nodes explored.
    pub nodes: usize,
}

impl ScheduleSolution {
    /// Start cycle of `stage` for chunk `chunk`.
    pub fn chunk_start(&self, stage: usize, chunk: usize) -> i64 {
        self.start_cycles[stage] + chunk as i64 * self.initiation_interval
    }

    pub fn chunk_starts(&self, chunk: usize) -> Vec<i64> {
        (0..self.start_cycles.len())
            .map(|i| self.chunk_start(i, chunk))
            .collect()
    }

    /// Extra delay of `stage` at the start of `chunk` relative to running
    /// chunks back to back.
    pub fn bubble(&self, stage: usize, chunk: usize) -> i64 {
        if chunk == 0 {
            0
        } else {
            self.bubbles[stage]
        }
    }

    pub fn buffer_bytes(&self, element_bytes: u32) -> Vec<i64> {
        self.buffer_sizes
            .iter()
            .map(|&b| b * element_bytes as i64)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Options {
    pub pruned: bool,
    pub horizon: Option<i64>,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            pruned: true,
            horizon: None,
        }
    }
}

/// Builds and solves the system for `graph`.
pub fn optimize(
    graph: &PipelineGraph,
    options: Options,
) -> Result<ScheduleSolution, OptimizeError> {
    let system = build_constraints(graph, options.pruned, options.horizon)?;
    solve(&system)
}

/// Row counts of the pruned and per-timestamp systems at the same horizon.
pub fn constraint_counts(
    graph: &PipelineGraph,
    horizon: Option<i64>,
) -> Result<ConstraintCounts, BuildError> {
    Ok(ConstraintCounts {
        pruned: build_constraints(graph, true, horizon)?.constraint_count(),
        unpruned: build_constraints(graph, false, horizon)?.constraint_count(),
    })
}

/// Exact minimum of Σ LB_i; ties go to the lexicographically smallest
/// start vector.
pub fn solve(system: &ConstraintSystem) -> Result<ScheduleSolution, OptimizeError> {
    let graph = &system.graph;
    let n = graph.stage_count();

    let mut ip = system.integer_program(&system.buffer_objective());
    let (mut x, value, mut nodes) = match ip.solve() {
        IlpOutcome::Optimal { x, value, nodes } => (x, value, nodes),
        IlpOutcome::Infeasible { .. } => return Err(OptimizeError::Infeasible),
    };

    // Lexicographic tie-break: keep Σ LB at the optimum and push each start
    // down in stage order.
    ip.rows.push(Row {
        coeffs: system
            .edge_vars
            .iter()
            .map(|ev| (ev.buffer, BigInt::one()))
            .collect(),
        sense: Sense::Le,
        rhs: value,
    });
    ip.lazy.push(false);
    for &v in &system.start_vars {
        if x[v] > ip.lower[v] {
            ip.objective = vec![BigInt::zero(); system.vars.len()];
            ip.objective[v] = BigInt::one();
            match ip.solve() {
                IlpOutcome::Optimal {
                    x: better,
                    nodes: more,
                    ..
                } => {
                    x = better;
                    nodes += more;
                }
                IlpOutcome::Infeasible { .. } => unreachable!("the incumbent stays feasible"),
            }
        }
        ip.lower[v] = x[v].clone();
        ip.upper[v] = x[v].clone();
    }

    let int = |v: &BigInt| v.to_i64().expect("solution fits in i64");
    let start_cycles: Vec<i64> = system.start_vars.iter().map(|&v| int(&x[v])).collect();
    let buffer_sizes: Vec<i64> = system
        .edge_vars
        .iter()
        .map(|ev| int(&x[ev.buffer]))
        .collect();
    debug_assert!(buffer_sizes
        .iter()
        .enumerate()
        .all(|(e, &b)| b == rational::ceil(analytic_peak(graph, &start_cycles, e))));

    let counts = constraint_counts(graph, Some(system.horizon))?;
    let interval = initiation_interval(graph, &start_cycles, &buffer_sizes);
    Ok(ScheduleSolution {
        total_buffer: buffer_sizes.iter().sum(),
        makespan: single_chunk_makespan(graph, &start_cycles),
        bubbles: (0..n).map(|i| interval - graph.work(i).duration).collect(),
        initiation_interval: interval,
        chunk_count: 1,
        start_cycles,
        buffer_sizes,
        constraint_counts: counts,
        nodes,
    })
}

/// Cycles from the earliest read to the latest write of one chunk.
pub fn single_chunk_makespan(graph: &PipelineGraph, starts: &[i64]) -> i64 {
    let first = starts.iter().copied().min().unwrap_or(0);
    let last = (0..graph.stage_count())
        .map(|i| starts[i] + graph.stage(i).stage_depth as i64 + graph.work(i).duration)
        .max()
        .unwrap_or(0);
    last - first
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{parse_pipeline, Shape, StageKind, StageSpec};

    fn elementwise(id: &str, depth: u32) -> StageSpec {
        StageSpec::new(
            id,
            StageKind::Elementwise,
            Shape::new(1, 1),
            Shape::new(1, 1),
            depth,
        )
    }

    /// Brute-force minimum using the closed-form peak over every start pair.
    fn brute_two_stage(g: &PipelineGraph, horizon: i64) -> (i64, Vec<i64>) {
        let mut best = (i64::MAX, vec![]);
        for s0 in 0..=horizon {
            for s1 in 0..=horizon {
                let starts = vec![s0, s1];
                let lag = s1 - s0 - g.stage(0).stage_depth as i64;
                if lag < min_lag(g, 0) {
                    continue;
                }
                let cost = rational::ceil(analytic_peak(g, &starts, 0));
                if cost < best.0 {
                    best = (cost, starts);
                }
            }
        }
        best
    }

    #[test]
    fn identical_rates_one_unit() {
        let g = PipelineGraph::chain(vec![elementwise("a", 0), elementwise("b", 0)], 16).unwrap();
        let sol = optimize(&g, Options::default()).unwrap();
        assert_eq!(sol.buffer_sizes, vec![1]);
        assert_eq!(sol.start_cycles, vec![0, 0]);
        assert_eq!(brute_two_stage(&g, 20), (1, vec![0, 0]));
    }

    #[test]
    fn global_edge_is_tight() {
        let g = PipelineGraph::chain(
            vec![
                elementwise("a", 3),
                StageSpec::new(
                    "sort",
                    StageKind::Global,
                    Shape::new(1, 1),
                    Shape::new(1, 1),
                    1,
                ),
            ],
            12,
        )
        .unwrap();
        let sol = optimize(&g, Options::default()).unwrap();
        // Producer ends at 0 + 3 + 12.
        assert_eq!(sol.start_cycles, vec![0, 15]);
        assert_eq!(sol.buffer_sizes, vec![12]);
    }

    #[test]
    fn pruned_and_unpruned_agree_on_knn_stencil() {
        let g = parse_pipeline(
            r#"{"input_work": 48, "stages": [
                {"id": "knn", "kind": "global", "i_shape": [1, 3], "o_shape": [4, 3], "o_freq": 8, "stage": 8},
                {"id": "curv", "kind": "stencil", "i_shape": [1, 3], "o_shape": [1, 1], "reuse": [2, 1], "stage": 2}],
                "edges": [["knn", "curv"]]}"#,
        )
        .unwrap();
        let a = optimize(&g, Options::default()).unwrap();
        let b = optimize(
            &g,
            Options {
                pruned: false,
                ..Options::default()
            },
        )
        .unwrap();
        assert_eq!(a.total_buffer, b.total_buffer);
        assert_eq!(a.start_cycles, b.start_cycles);
        assert_eq!(a.start_cycles, vec![0, 8]);
        assert_eq!(a.total_buffer, 2);
        assert!(a.constraint_counts.pruned < a.constraint_counts.unpruned);
        let (cost, _) = brute_two_stage(&g, 40);
        assert_eq!(cost, a.total_buffer);
    }

    #[test]
    fn fast_producer_slow_consumer() {
        // Producer writes 4/cycle, consumer reads 1/cycle.
        let p = StageSpec::new(
            "p",
            StageKind::Elementwise,
            Shape::new(4, 1),
            Shape::new(4, 1),
            1,
        );
        let c = elementwise("c", 0);
        let g = PipelineGraph::from_named_edges(vec![p, c], &[("p", "c")], 32).unwrap();
        let sol = optimize(&g, Options::default()).unwrap();
        let (cost, starts) = brute_two_stage(&g, 60);
        assert_eq!(sol.total_buffer, cost);
        assert_eq!(sol.start_cycles, starts);
    }

    #[test]
    fn determinism() {
        let g = PipelineGraph::chain(
            vec![
                elementwise("a", 1),
                elementwise("b", 2),
                elementwise("c", 0),
            ],
            9,
        )
        .unwrap();
        let a = optimize(&g, Options::default()).unwrap();
        let b = optimize(&g, Options::default()).unwrap();
        assert_eq!(a, b);
    }
}

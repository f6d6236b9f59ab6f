//! Exhaustive cross-check of the solver on small graphs.
//!
//! Every start vector in `[0, horizon]^n` is scored by token-simulating each
//! edge on its own; the cheapest stall-free vector is compared with
//! [`solve`](super::solve) at the same horizon.

use crate::graph::PipelineGraph;
use crate::simulator::simulate_edge;

use super::{build_constraints, solve, BuildError, OptimizeError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub total_buffer: i64,
    pub start_cycles: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleReport {
    pub horizon: i64,
    /// Cheapest stall-free schedule, lexicographically smallest among ties.
    pub oracle: Option<Candidate>,
    pub solver: Option<Candidate>,
}

impl OracleReport {
    pub fn matches(&self) -> bool {
        match (&self.oracle, &self.solver) {
            (None, None) => true,
            (Some(a), Some(b)) => a.total_buffer == b.total_buffer,
            _ => false,
        }
    }

    /// Whether both sides also picked the same start vector.
    pub fn starts_match(&self) -> bool {
        self.oracle == self.solver
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("oracle supports at most {max} stages, graph has {got}")]
    TooLarge { got: usize, max: usize },
    #[error("horizon must be nonnegative")]
    NegativeHorizon,
    #[error(transparent)]
    Solver(#[from] BuildError),
}

pub const MAX_STAGES: usize = 5;

/// Total duration plus total pipeline depth plus two: long enough for any
/// chain to run back to back with slack for a global stage.
pub fn oracle_horizon(graph: &PipelineGraph) -> i64 {
    let depth: i64 = graph.stages().iter().map(|s| s.stage_depth as i64).sum();
    graph.total_duration() + depth + 2
}

pub fn verify_against_oracle(
    graph: &PipelineGraph,
    horizon: i64,
) -> Result<OracleReport, OracleError> {
    if graph.stage_count() > MAX_STAGES {
        return Err(OracleError::TooLarge {
            got: graph.stage_count(),
            max: MAX_STAGES,
        });
    }
    if horizon < 0 {
        return Err(OracleError::NegativeHorizon);
    }
    let oracle = enumerate(graph, horizon);
    let solver = match build_constraints(graph, true, Some(horizon)) {
        Err(BuildError::HorizonExhausted { .. }) => None,
        Err(e) => return Err(e.into()),
        Ok(system) => match solve(&system) {
            Ok(sol) => Some(Candidate {
                total_buffer: sol.total_buffer,
                start_cycles: sol.start_cycles,
            }),
            Err(OptimizeError::Infeasible) => None,
            Err(OptimizeError::Build(e)) => return Err(e.into()),
        },
    };
    Ok(OracleReport {
        horizon,
        oracle,
        solver,
    })
}

struct Search<'g> {
    graph: &'g PipelineGraph,
    horizon: i64,
    /// `cost[e][s_p][s_c]`, `None` when the consumer stalls.
    cost: Vec<Vec<Vec<Option<i64>>>>,
    /// Cheapest feasible cost of each edge over all start pairs.
    floor: Vec<i64>,
    /// Edges that become fully assigned at each depth of the order.
    closing: Vec<Vec<usize>>,
    order: Vec<usize>,
    best: Option<Candidate>,
}

/// Exhaustive minimum over start vectors in `[0, horizon]^n`.
pub fn enumerate(graph: &PipelineGraph, horizon: i64) -> Option<Candidate> {
    let n = graph.stage_count();
    let h = horizon as usize;
    let mut cost = Vec::with_capacity(graph.edge_count());
    let mut floor = Vec::with_capacity(graph.edge_count());
    for e in 0..graph.edge_count() {
        let edge = graph.edges()[e];
        let mut table = vec![vec![None; h + 1]; h + 1];
        let mut starts = vec![0i64; n];
        let mut cheapest = None::<i64>;
        for (sp, row) in table.iter_mut().enumerate() {
            for (sc, cell) in row.iter_mut().enumerate() {
                starts[edge.producer] = sp as i64;
                starts[edge.consumer] = sc as i64;
                *cell = simulate_edge(graph, &starts, e).cost();
                if let Some(c) = *cell {
                    cheapest = Some(cheapest.map_or(c, |b| b.min(c)));
                }
            }
        }
        // An edge with no stall-free placement makes the graph infeasible.
        floor.push(cheapest?);
        cost.push(table);
    }

    let order = graph.topo_order().to_vec();
    let mut position = vec![0usize; n];
    for (k, &i) in order.iter().enumerate() {
        position[i] = k;
    }
    let mut closing = vec![Vec::new(); n];
    for (e, edge) in graph.edges().iter().enumerate() {
        closing[position[edge.producer].max(position[edge.consumer])].push(e);
    }

    let mut search = Search {
        graph,
        horizon,
        cost,
        floor,
        closing,
        order,
        best: None,
    };
    let remaining: i64 = search.floor.iter().sum();
    let mut starts = vec![0i64; n];
    search.descend(0, 0, remaining, &mut starts);
    search.best
}

impl Search<'_> {
    fn descend(&mut self, depth: usize, spent: i64, remaining: i64, starts: &mut Vec<i64>) {
        if let Some(best) = &self.best {
            if spent + remaining > best.total_buffer {
                return;
            }
        }
        if depth == self.order.len() {
            let better = match &self.best {
                None => true,
                Some(b) => {
                    spent < b.total_buffer || (spent == b.total_buffer && *starts < b.start_cycles)
                }
            };
            if better {
                self.best = Some(Candidate {
                    total_buffer: spent,
                    start_cycles: starts.clone(),
                });
            }
            return;
        }
        let stage = self.order[depth];
        'start: for s in 0..=self.horizon {
            starts[stage] = s;
            let mut add = 0;
            let mut released = 0;
            for &e in &self.closing[depth] {
                let edge = self.graph.edges()[e];
                match self.cost[e][starts[edge.producer] as usize][starts[edge.consumer] as usize] {
                    None => continue 'start,
                    Some(c) => {
                        add += c;
                        released += self.floor[e];
                    }
                }
            }
            self.descend(depth + 1, spent + add, remaining - released, starts);
        }
        starts[stage] = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Shape, StageKind, StageSpec};

    fn stage(id: &str, kind: StageKind, rows_in: u32, rows_out: u32, depth: u32) -> StageSpec {
        StageSpec::new(
            id,
            kind,
            Shape::new(rows_in, 1),
            Shape::new(rows_out, 1),
            depth,
        )
    }

    #[test]
    fn two_stage_local_matches() {
        let g = PipelineGraph::chain(
            vec![
                stage("a", StageKind::Elementwise, 2, 2, 1),
                stage("b", StageKind::Elementwise, 1, 1, 0),
            ],
            8,
        )
        .unwrap();
        let r = verify_against_oracle(&g, 16).unwrap();
        assert!(r.matches(), "{r:?}");
        assert!(r.starts_match(), "{r:?}");
    }

    #[test]
    fn too_short_horizon_is_infeasible_on_both_sides() {
        let g = PipelineGraph::chain(
            vec![
                stage("a", StageKind::Elementwise, 1, 1, 2),
                stage("b", StageKind::Global, 1, 1, 0),
            ],
            8,
        )
        .unwrap();
        let r = verify_against_oracle(&g, 5).unwrap();
        assert_eq!(r.oracle, None);
        assert_eq!(r.solver, None);
        assert!(r.matches());
    }

    #[test]
    fn rejects_large_graphs() {
        let stages = (0..6)
            .map(|i| stage(&format!("s{i}"), StageKind::Elementwise, 1, 1, 0))
            .collect();
        let g = PipelineGraph::chain(stages, 4).unwrap();
        assert!(matches!(
            verify_against_oracle(&g, 4),
            Err(OracleError::TooLarge { .. })
        ));
    }
}

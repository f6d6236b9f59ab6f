use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::Serialize;

use crate::graph::PipelineGraph;
use crate::rational;

use super::{peak_occupancy, SimTrace};

/// Writes `cycle,edge,occupancy` rows, keeping every `stride`-th cycle.
pub fn write_csv(
    trace: &SimTrace,
    graph: &PipelineGraph,
    stride: usize,
    out: &mut impl Write,
) -> io::Result<()> {
    let stride = stride.max(1);
    writeln!(out, "cycle,edge,occupancy")?;
    for i in (0..trace.cycles()).step_by(stride) {
        let cycle = trace.first_cycle + i as i64;
        for (e, series) in trace.occupancy.iter().enumerate() {
            writeln!(
                out,
                "{},{},{}",
                cycle,
                graph.edge_label(e),
                rational::format(&series[i])
            )?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StallRecord {
    pub cycle: i64,
    pub stage: String,
    pub edge: String,
    pub chunk: usize,
    pub cause: &'static str,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OverflowRecord {
    pub cycle: i64,
    pub edge: String,
    pub occupancy: String,
    pub capacity: i64,
}

/// Run summary for JSON export.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub verdict: &'static str,
    pub chunk_count: usize,
    pub peaks: BTreeMap<String, i64>,
    pub capacities: BTreeMap<String, i64>,
    pub stalls: Vec<StallRecord>,
    pub overflows: Vec<OverflowRecord>,
    pub completion_cycle: i64,
    pub chunk_completions: Vec<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interval: Option<i64>,
}

impl Summary {
    pub fn new(trace: &SimTrace, graph: &PipelineGraph) -> Self {
        let peaks = peak_occupancy(trace);
        let label = |e: usize| graph.edge_label(e);
        Self {
            verdict: if trace.is_clean() { "ok" } else { "violation" },
            chunk_count: trace.chunk_completions.len(),
            peaks: peaks
                .iter()
                .enumerate()
                .map(|(e, &p)| (label(e), p))
                .collect(),
            capacities: trace
                .capacities
                .iter()
                .enumerate()
                .map(|(e, &c)| (label(e), c))
                .collect(),
            stalls: trace
                .stall_events
                .iter()
                .map(|s| StallRecord {
                    cycle: s.cycle,
                    stage: graph.stage(s.stage).id.clone(),
                    edge: label(s.edge),
                    chunk: s.chunk,
                    cause: s.cause.as_str(),
                })
                .collect(),
            overflows: trace
                .overflow_events
                .iter()
                .map(|o| OverflowRecord {
                    cycle: o.cycle,
                    edge: label(o.edge),
                    occupancy: rational::format(&o.occupancy),
                    capacity: o.capacity,
                })
                .collect(),
            completion_cycle: trace.completion_cycle,
            chunk_completions: trace.chunk_completions.clone(),
            interval: trace.steady_interval(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }
}

//! JSON schedule documents.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::graph::PipelineGraph;

use super::{ConstraintCounts, ScheduleSolution};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BufferDoc {
    pub producer: String,
    pub consumer: String,
    pub elements: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bytes: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleDoc {
    pub start_cycles: BTreeMap<String, i64>,
    pub buffer_sizes: Vec<BufferDoc>,
    pub total_buffer: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_bytes: Option<i64>,
    pub makespan: i64,
    pub initiation_interval: i64,
    pub chunk_count: usize,
    pub bubbles: BTreeMap<String, i64>,
    pub constraint_counts: ConstraintCounts,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScheduleFileError {
    #[error("schedule is not valid JSON: {0}")]
    Syntax(String),
    #[error("schedule has no start cycle for stage `{0}`")]
    MissingStage(String),
    #[error("schedule has no buffer for edge `{0}`")]
    MissingEdge(String),
    #[error("schedule names unknown stage `{0}`")]
    UnknownStage(String),
    #[error("schedule field `{0}` is out of range")]
    OutOfRange(&'static str),
}

impl ScheduleDoc {
    pub fn from_solution(
        graph: &PipelineGraph,
        solution: &ScheduleSolution,
        element_bytes: Option<u32>,
    ) -> Self {
        let id = |i: usize| graph.stage(i).id.clone();
        let bytes = |elements: i64| element_bytes.map(|b| elements * b as i64);
        Self {
            start_cycles: (0..graph.stage_count())
                .map(|i| (id(i), solution.start_cycles[i]))
                .collect(),
            buffer_sizes: graph
                .edges()
                .iter()
                .zip(&solution.buffer_sizes)
                .map(|(e, &n)| BufferDoc {
                    producer: id(e.producer),
                    consumer: id(e.consumer),
                    elements: n,
                    bytes: bytes(n),
                })
                .collect(),
            total_buffer: solution.total_buffer,
            total_bytes: bytes(solution.total_buffer),
            makespan: solution.makespan,
            initiation_interval: solution.initiation_interval,
            chunk_count: solution.chunk_count,
            bubbles: (0..graph.stage_count())
                .map(|i| (id(i), solution.bubbles[i]))
                .collect(),
            constraint_counts: solution.constraint_counts,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("schedule serializes");
        s.push('\n');
        s
    }

    pub fn parse(text: &str) -> Result<Self, ScheduleFileError> {
        serde_json::from_str(text).map_err(|e| ScheduleFileError::Syntax(e.to_string()))
    }

    /// Maps the document back onto `graph`'s stage and edge indices.
    pub fn to_solution(
        &self,
        graph: &PipelineGraph,
    ) -> Result<ScheduleSolution, ScheduleFileError> {
        for name in self.start_cycles.keys().chain(self.bubbles.keys()) {
            if graph.index_of(name).is_none() {
                return Err(ScheduleFileError::UnknownStage(name.clone()));
            }
        }
        let mut start_cycles = Vec::with_capacity(graph.stage_count());
        let mut bubbles = Vec::with_capacity(graph.stage_count());
        for s in graph.stages() {
            let &start = self
                .start_cycles
                .get(&s.id)
                .ok_or_else(|| ScheduleFileError::MissingStage(s.id.clone()))?;
            if start < 0 {
                return Err(ScheduleFileError::OutOfRange("start_cycles"));
            }
            start_cycles.push(start);
            bubbles.push(self.bubbles.get(&s.id).copied().unwrap_or(0));
        }
        let mut buffer_sizes = Vec::with_capacity(graph.edge_count());
        for (ei, e) in graph.edges().iter().enumerate() {
            let (p, c) = (&graph.stage(e.producer).id, &graph.stage(e.consumer).id);
            let doc = self
                .buffer_sizes
                .iter()
                .find(|b| &b.producer == p && &b.consumer == c)
                .ok_or_else(|| ScheduleFileError::MissingEdge(graph.edge_label(ei)))?;
            if doc.elements < 0 {
                return Err(ScheduleFileError::OutOfRange("buffer_sizes"));
            }
            buffer_sizes.push(doc.elements);
        }
        if self.initiation_interval < 1 {
            return Err(ScheduleFileError::OutOfRange("initiation_interval"));
        }
        if self.chunk_count < 1 {
            return Err(ScheduleFileError::OutOfRange("chunk_count"));
        }
        Ok(ScheduleSolution {
            total_buffer: buffer_sizes.iter().sum(),
            start_cycles,
            buffer_sizes,
            makespan: self.makespan,
            initiation_interval: self.initiation_interval,
            chunk_count: self.chunk_count,
            bubbles,
            constraint_counts: self.constraint_counts,
            nodes: 0,
        })
    }
}

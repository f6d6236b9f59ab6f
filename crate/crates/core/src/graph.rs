//! Dataflow description of a streaming pipeline.
//!
//! A pipeline is an ordered list of stages plus producer → consumer edges.
//! Every edge carries one line buffer. Stage parameters follow the
//! declarative interface used for stencil, reduction and global operations:
//! input/output shape, read/write frequency, reuse and pipeline depth.
//! From these the graph derives per-stage throughputs, unique input volume
//! `U`, output work `W` and active duration `D`, all in exact rationals.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::rational::{self, Overflow, Rational};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("stage `{stage}`: unknown kind `{kind}`")]
    UnknownKind { stage: String, kind: String },
    #[error("edge references undeclared stage `{0}`")]
    DanglingEdge(String),
    #[error("duplicate stage id `{0}`")]
    DuplicateStage(String),
    #[error("duplicate edge {0} -> {1}")]
    DuplicateEdge(String, String),
    #[error("edge {0} -> {0} is a self loop")]
    SelfLoop(String),
    #[error("pipeline has no stages")]
    Empty,
    #[error("pipeline contains a cycle through `{0}`")]
    Cycle(String),
    #[error("stage `{stage}`: {message}")]
    InvalidStage { stage: String, message: String },
    #[error("input_work must be positive")]
    ZeroInput,
    #[error("stage `{stage}`: derived work {work} is not a positive integer")]
    NonIntegerWork { stage: String, work: String },
    #[error("stage `{stage}`: active duration {duration} is not a whole number of cycles")]
    NonIntegerDuration { stage: String, duration: String },
    #[error(transparent)]
    Overflow(#[from] Overflow),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StageKind {
    Elementwise,
    Stencil,
    Reduction,
    Global,
}

impl StageKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "elementwise" => Some(Self::Elementwise),
            "stencil" => Some(Self::Stencil),
            "reduction" => Some(Self::Reduction),
            "global" | "global_op" => Some(Self::Global),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Elementwise => "elementwise",
            Self::Stencil => "stencil",
            Self::Reduction => "reduction",
            Self::Global => "global",
        }
    }

    pub fn dependency(self) -> Dependency {
        match self {
            Self::Global => Dependency::Global,
            _ => Dependency::Local,
        }
    }
}

impl fmt::Display for StageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Whether a consumer may start on partial data or needs its producer to finish.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dependency {
    Local,
    Global,
}

/// `[points, attributes]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Shape {
    pub rows: u32,
    pub attrs: u32,
}

impl Shape {
    pub fn new(rows: u32, attrs: u32) -> Self {
        Self { rows, attrs }
    }

    pub fn elements(&self) -> i64 {
        self.rows as i64 * self.attrs as i64
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageSpec {
    pub id: String,
    pub kind: StageKind,
    pub i_shape: Shape,
    pub i_freq: u32,
    pub o_shape: Shape,
    pub o_freq: u32,
    /// Per-dimension reuse factor.
    pub reuse: [u32; 2],
    /// Pipeline depth in cycles between first read and first write.
    pub stage_depth: u32,
}

impl StageSpec {
    /// A stage with unit frequencies and no reuse.
    pub fn new(
        id: impl Into<String>,
        kind: StageKind,
        i_shape: Shape,
        o_shape: Shape,
        stage_depth: u32,
    ) -> Self {
        Self {
            id: id.into(),
            kind,
            i_shape,
            i_freq: 1,
            o_shape,
            o_freq: 1,
            reuse: [1, 1],
            stage_depth,
        }
    }

    pub fn with_freqs(mut self, i_freq: u32, o_freq: u32) -> Self {
        self.i_freq = i_freq;
        self.o_freq = o_freq;
        self
    }

    pub fn with_reuse(mut self, reuse: [u32; 2]) -> Self {
        self.reuse = reuse;
        self
    }

    pub fn reuse_total(&self) -> i64 {
        self.reuse.iter().map(|&r| r as i64).product()
    }

    /// Unique input elements consumed and output elements produced per cycle.
    pub fn throughputs(&self) -> Throughputs {
        let beta = match self.kind {
            StageKind::Stencil => self.reuse_total(),
            _ => 1,
        };
        Throughputs {
            tau_in: Rational::new(self.i_shape.elements(), beta * self.i_freq as i64),
            tau_out: Rational::new(self.o_shape.elements(), self.o_freq as i64),
        }
    }

    fn validate(&self) -> Result<(), GraphError> {
        let bad = |message: &str| GraphError::InvalidStage {
            stage: self.id.clone(),
            message: message.to_string(),
        };
        if self.id.is_empty() {
            return Err(bad("empty id"));
        }
        if self.i_shape.rows == 0 || self.i_shape.attrs == 0 {
            return Err(bad("i_shape entries must be >= 1"));
        }
        if self.o_shape.rows == 0 || self.o_shape.attrs == 0 {
            return Err(bad("o_shape entries must be >= 1"));
        }
        if self.i_freq == 0 || self.o_freq == 0 {
            return Err(bad("frequencies must be >= 1"));
        }
        if self.reuse.contains(&0) {
            return Err(bad("reuse entries must be >= 1"));
        }
        if matches!(self.kind, StageKind::Elementwise | StageKind::Reduction)
            && self.reuse != [1, 1]
        {
            return Err(bad("elementwise and reduction stages cannot declare reuse"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Throughputs {
    pub tau_in: Rational,
    pub tau_out: Rational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub producer: usize,
    pub consumer: usize,
}

/// Quantities derived for one stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StageWork {
    pub rates: Throughputs,
    /// Unique input elements read (`U`).
    pub unique_input: i64,
    /// Output elements written (`W`).
    pub work: i64,
    /// Active cycles for reading, and for writing (`D = U/τ_in = W/τ_out`).
    pub duration: i64,
}

/// Per-edge transfer parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeFlow {
    /// Elements moved over the edge: the producer's work.
    pub volume: i64,
    /// Rate at which the consumer reads (and later frees) this edge.
    pub read_rate: Rational,
    pub dependency: Dependency,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineGraph {
    stages: Vec<StageSpec>,
    edges: Vec<Edge>,
    input_work: i64,
    work: Vec<StageWork>,
    flows: Vec<EdgeFlow>,
    topo: Vec<usize>,
}

impl PipelineGraph {
    pub fn new(
        stages: Vec<StageSpec>,
        edges: Vec<Edge>,
        input_work: i64,
    ) -> Result<Self, GraphError> {
        if stages.is_empty() {
            return Err(GraphError::Empty);
        }
        if input_work <= 0 {
            return Err(GraphError::ZeroInput);
        }
        let mut seen = HashMap::new();
        for (i, s) in stages.iter().enumerate() {
            s.validate()?;
            if seen.insert(s.id.clone(), i).is_some() {
                return Err(GraphError::DuplicateStage(s.id.clone()));
            }
        }
        for (i, e) in edges.iter().enumerate() {
            for idx in [e.producer, e.consumer] {
                if idx >= stages.len() {
                    return Err(GraphError::DanglingEdge(format!("#{idx}")));
                }
            }
            if e.producer == e.consumer {
                return Err(GraphError::SelfLoop(stages[e.producer].id.clone()));
            }
            if edges[..i].contains(e) {
                return Err(GraphError::DuplicateEdge(
                    stages[e.producer].id.clone(),
                    stages[e.consumer].id.clone(),
                ));
            }
        }
        let topo = topo_order(&stages, &edges)?;
        let work = derive_work(&stages, &edges, &topo, input_work)?;
        let flows = edges
            .iter()
            .map(|e| {
                let c = &work[e.consumer];
                let volume = work[e.producer].work;
                // Split the consumer's read rate across its producers by volume.
                let read_rate =
                    rational::mul(c.rates.tau_in, Rational::new(volume, c.unique_input))?;
                Ok(EdgeFlow {
                    volume,
                    read_rate,
                    dependency: stages[e.consumer].kind.dependency(),
                })
            })
            .collect::<Result<Vec<_>, GraphError>>()?;
        Ok(Self {
            stages,
            edges,
            input_work,
            work,
            flows,
            topo,
        })
    }

    /// Builds a graph whose edges are given by stage ids.
    pub fn from_named_edges(
        stages: Vec<StageSpec>,
        edges: &[(&str, &str)],
        input_work: i64,
    ) -> Result<Self, GraphError> {
        let index: HashMap<&str, usize> = stages
            .iter()
            .enumerate()
            .map(|(i, s)| (s.id.as_str(), i))
            .collect();
        let lookup = |id: &str| {
            index
                .get(id)
                .copied()
                .ok_or_else(|| GraphError::DanglingEdge(id.to_string()))
        };
        let edges = edges
            .iter()
            .map(|(p, c)| {
                Ok(Edge {
                    producer: lookup(p)?,
                    consumer: lookup(c)?,
                })
            })
            .collect::<Result<Vec<_>, GraphError>>()?;
        Self::new(stages, edges, input_work)
    }

    /// Straight chain `s0 -> s1 -> ...`.
    pub fn chain(stages: Vec<StageSpec>, input_work: i64) -> Result<Self, GraphError> {
        let edges = (1..stages.len())
            .map(|i| Edge {
                producer: i - 1,
                consumer: i,
            })
            .collect();
        Self::new(stages, edges, input_work)
    }

    pub fn stages(&self) -> &[StageSpec] {
        &self.stages
    }

    pub fn stage(&self, i: usize) -> &StageSpec {
        &self.stages[i]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn input_work(&self) -> i64 {
        self.input_work
    }

    pub fn stage_count(&self) -> usize {
        self.stages.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn work(&self, stage: usize) -> &StageWork {
        &self.work[stage]
    }

    pub fn flow(&self, edge: usize) -> &EdgeFlow {
        &self.flows[edge]
    }

    /// Stage indices in a producer-before-consumer order.
    pub fn topo_order(&self) -> &[usize] {
        &self.topo
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.stages.iter().position(|s| s.id == id)
    }

    pub fn producers(&self, stage: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges
            .iter()
            .enumerate()
            .filter(move |(_, e)| e.consumer == stage)
            .map(|(i, _)| i)
    }

    pub fn edge_label(&self, edge: usize) -> String {
        let e = self.edges[edge];
        format!(
            "{}->{}",
            self.stages[e.producer].id, self.stages[e.consumer].id
        )
    }

    /// Σ D_i over all stages.
    pub fn total_duration(&self) -> i64 {
        self.work.iter().map(|w| w.duration).sum()
    }

    /// W_i keyed by stage id.
    pub fn work_map(&self) -> BTreeMap<String, i64> {
        self.stages
            .iter()
            .zip(&self.work)
            .map(|(s, w)| (s.id.clone(), w.work))
            .collect()
    }

    /// Same stages and edges with a different external input volume.
    pub fn with_input_work(&self, input_work: i64) -> Result<Self, GraphError> {
        Self::new(self.stages.clone(), self.edges.clone(), input_work)
    }

    pub fn to_json(&self) -> String {
        let doc = PipelineDoc {
            input_work: self.input_work,
            stages: self.stages.iter().map(StageDoc::from).collect(),
            edges: self
                .edges
                .iter()
                .map(|e| {
                    [
                        self.stages[e.producer].id.clone(),
                        self.stages[e.consumer].id.clone(),
                    ]
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("pipeline document serializes")
    }
}

fn topo_order(stages: &[StageSpec], edges: &[Edge]) -> Result<Vec<usize>, GraphError> {
    let n = stages.len();
    let mut indeg = vec![0usize; n];
    for e in edges {
        indeg[e.consumer] += 1;
    }
    let mut order = Vec::with_capacity(n);
    let mut ready: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
    // Lowest index first keeps the order deterministic.
    ready.reverse();
    while let Some(i) = ready.pop() {
        order.push(i);
        let mut next = Vec::new();
        for e in edges.iter().filter(|e| e.producer == i) {
            indeg[e.consumer] -= 1;
            if indeg[e.consumer] == 0 {
                next.push(e.consumer);
            }
        }
        ready.extend(next);
        ready.sort_unstable_by(|a, b| b.cmp(a));
    }
    if order.len() != n {
        let stuck = (0..n).find(|&i| indeg[i] > 0).unwrap_or(0);
        return Err(GraphError::Cycle(stages[stuck].id.clone()));
    }
    Ok(order)
}

/// Propagates work through the graph: `W_i = U_i · τ_out,i / τ_in,i`, where
/// `U_i` is the graph input for sources and the sum of producer work otherwise.
pub fn derive_work(
    stages: &[StageSpec],
    edges: &[Edge],
    topo: &[usize],
    input_work: i64,
) -> Result<Vec<StageWork>, GraphError> {
    let mut out: Vec<Option<StageWork>> = vec![None; stages.len()];
    for &i in topo {
        let s = &stages[i];
        let mut unique_input = 0i64;
        let mut has_producer = false;
        for e in edges.iter().filter(|e| e.consumer == i) {
            has_producer = true;
            let w = out[e.producer].expect("topological order").work;
            unique_input = unique_input.checked_add(w).ok_or(Overflow)?;
        }
        if !has_producer {
            unique_input = input_work;
        }
        let rates = s.throughputs();
        let u = rational::int(unique_input);
        let duration = rational::div(u, rates.tau_in)?;
        let work = rational::mul(duration, rates.tau_out)?;
        if !work.is_integer() || *work.numer() <= 0 {
            return Err(GraphError::NonIntegerWork {
                stage: s.id.clone(),
                work: rational::format(&work),
            });
        }
        if !duration.is_integer() {
            return Err(GraphError::NonIntegerDuration {
                stage: s.id.clone(),
                duration: rational::format(&duration),
            });
        }
        out[i] = Some(StageWork {
            rates,
            unique_input,
            work: work.to_integer(),
            duration: duration.to_integer(),
        });
    }
    Ok(out
        .into_iter()
        .map(|w| w.expect("every stage visited"))
        .collect())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PipelineDoc {
    input_work: i64,
    stages: Vec<StageDoc>,
    #[serde(default)]
    edges: Vec<[String; 2]>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StageDoc {
    id: String,
    kind: String,
    i_shape: [u32; 2],
    o_shape: [u32; 2],
    #[serde(default)]
    i_freq: Option<u32>,
    #[serde(default)]
    o_freq: Option<u32>,
    #[serde(default)]
    reuse: Option<Vec<u32>>,
    stage: u32,
}

impl From<&StageSpec> for StageDoc {
    fn from(s: &StageSpec) -> Self {
        Self {
            id: s.id.clone(),
            kind: s.kind.as_str().to_string(),
            i_shape: [s.i_shape.rows, s.i_shape.attrs],
            o_shape: [s.o_shape.rows, s.o_shape.attrs],
            i_freq: Some(s.i_freq),
            o_freq: Some(s.o_freq),
            reuse: Some(s.reuse.to_vec()),
            stage: s.stage_depth,
        }
    }
}

/// Parses a JSON pipeline description and validates it.
pub fn parse_pipeline(document: &str) -> Result<PipelineGraph, GraphError> {
    let doc: PipelineDoc = serde_json::from_str(document).map_err(|e| GraphError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut stages = Vec::with_capacity(doc.stages.len());
    for s in doc.stages {
        let kind = StageKind::parse(&s.kind).ok_or_else(|| GraphError::UnknownKind {
            stage: s.id.clone(),
            kind: s.kind.clone(),
        })?;
        let reuse = match s.reuse {
            None => [1, 1],
            Some(v) if v.len() == 2 => [v[0], v[1]],
            Some(v) => {
                return Err(GraphError::InvalidStage {
                    stage: s.id,
                    message: format!("reuse must have 2 entries, got {}", v.len()),
                })
            }
        };
        stages.push(StageSpec {
            id: s.id,
            kind,
            i_shape: Shape::new(s.i_shape[0], s.i_shape[1]),
            i_freq: s.i_freq.unwrap_or(1),
            o_shape: Shape::new(s.o_shape[0], s.o_shape[1]),
            o_freq: s.o_freq.unwrap_or(1),
            reuse,
            stage_depth: s.stage,
        });
    }
    let edges: Vec<(&str, &str)> = doc
        .edges
        .iter()
        .map(|[p, c]| (p.as_str(), c.as_str()))
        .collect();
    PipelineGraph::from_named_edges(stages, &edges, doc.input_work)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    const KNN_STENCIL: &str = r#"{
        "input_work": 48,
        "stages": [
            {"id": "knn", "kind": "global", "i_shape": [1, 3], "o_shape": [4, 3], "o_freq": 8, "stage": 8},
            {"id": "curv", "kind": "stencil", "i_shape": [1, 3], "o_shape": [1, 1], "reuse": [2, 1], "stage": 2}
        ],
        "edges": [["knn", "curv"]]
    }"#;

    #[test]
    fn knn_then_stencil_rates() {
        let g = parse_pipeline(KNN_STENCIL).unwrap();
        assert_eq!(g.stage_count(), 2);
        let knn = g.work(0);
        assert_eq!(knn.rates.tau_in, int(3));
        assert_eq!(knn.rates.tau_out, ratio(3, 2));
        assert_eq!(knn.duration, 16);
        assert_eq!(knn.work, 24);
        let st = g.work(1);
        assert_eq!(st.rates.tau_in, ratio(3, 2));
        assert_eq!(st.rates.tau_out, int(1));
        assert_eq!(st.work, 16);
        // Defaults applied.
        assert_eq!(g.stage(1).i_freq, 1);
        assert_eq!(g.stage(1).o_freq, 1);
        assert_eq!(g.stage(0).reuse, [1, 1]);
        assert_eq!(g.flow(0).dependency, Dependency::Local);
    }

    #[test]
    fn identity_stage() {
        let s = StageSpec::new(
            "id",
            StageKind::Elementwise,
            Shape::new(1, 1),
            Shape::new(1, 1),
            0,
        );
        let g = PipelineGraph::chain(vec![s], 10).unwrap();
        assert_eq!(g.work(0).rates.tau_in, int(1));
        assert_eq!(g.work(0).rates.tau_out, int(1));
        assert_eq!(g.work(0).work, 10);
    }

    #[test]
    fn dangling_edge() {
        let doc = r#"{"input_work": 4, "stages": [
            {"id": "a", "kind": "elementwise", "i_shape": [1,1], "o_shape": [1,1], "stage": 0}],
            "edges": [["a", "ghost"]]}"#;
        assert_eq!(
            parse_pipeline(doc).unwrap_err(),
            GraphError::DanglingEdge("ghost".into())
        );
    }

    #[test]
    fn unknown_kind_and_keys() {
        let doc = r#"{"input_work": 4, "stages": [
            {"id": "a", "kind": "convolution", "i_shape": [1,1], "o_shape": [1,1], "stage": 0}]}"#;
        assert!(matches!(
            parse_pipeline(doc),
            Err(GraphError::UnknownKind { .. })
        ));
        let doc = r#"{"input_work": 4, "colour": 1, "stages": []}"#;
        assert!(matches!(
            parse_pipeline(doc),
            Err(GraphError::Syntax { .. })
        ));
    }

    #[test]
    fn syntax_error_has_position() {
        let doc = "{\n  \"input_work\": 4,\n  \"stages\": [ oops ]\n}";
        match parse_pipeline(doc) {
            Err(GraphError::Syntax { line, column, .. }) => {
                assert_eq!(line, 3);
                assert!(column > 0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn stencil_rate_model_work() {
        // 3x3 stencil over a 5-wide, 3-row image: one column of three pixels
        // per read, each pixel reused by three windows.
        let src = StageSpec::new(
            "src",
            StageKind::Elementwise,
            Shape::new(1, 1),
            Shape::new(1, 1),
            0,
        );
        let st = StageSpec::new(
            "st",
            StageKind::Stencil,
            Shape::new(1, 3),
            Shape::new(1, 1),
            2,
        )
        .with_reuse([3, 1]);
        let g = PipelineGraph::chain(vec![src, st], 15).unwrap();
        assert_eq!(g.work(1).work, 15);
    }

    #[test]
    fn reduction_work_follows_rate_identity() {
        let src = StageSpec::new(
            "src",
            StageKind::Elementwise,
            Shape::new(1, 1),
            Shape::new(1, 1),
            0,
        );
        let red = StageSpec::new(
            "max",
            StageKind::Reduction,
            Shape::new(4, 1),
            Shape::new(1, 1),
            1,
        )
        .with_freqs(1, 4);
        let g = PipelineGraph::chain(vec![src.clone(), red], 64).unwrap();
        // τ_in = 4, τ_out = 1/4: 16 cycles of reads, 4 outputs.
        assert_eq!(g.work(1).duration, 16);
        assert_eq!(g.work(1).work, 4);
        // One output per group of four inputs.
        let red1 = StageSpec::new(
            "max",
            StageKind::Reduction,
            Shape::new(4, 1),
            Shape::new(1, 1),
            1,
        );
        let g = PipelineGraph::chain(vec![src, red1], 64).unwrap();
        assert_eq!(g.work(1).work, 16);
    }

    #[test]
    fn non_integer_work_rejected() {
        let src = StageSpec::new(
            "src",
            StageKind::Elementwise,
            Shape::new(1, 1),
            Shape::new(1, 1),
            0,
        );
        let red = StageSpec::new(
            "r",
            StageKind::Reduction,
            Shape::new(3, 1),
            Shape::new(1, 1),
            0,
        );
        let err = PipelineGraph::chain(vec![src, red], 10).unwrap_err();
        assert!(matches!(
            err,
            GraphError::NonIntegerWork { .. } | GraphError::NonIntegerDuration { .. }
        ));
    }

    #[test]
    fn multi_producer_sums_volumes() {
        let a = StageSpec::new(
            "a",
            StageKind::Elementwise,
            Shape::new(1, 1),
            Shape::new(1, 1),
            0,
        );
        let b = StageSpec::new(
            "b",
            StageKind::Elementwise,
            Shape::new(1, 1),
            Shape::new(1, 1),
            1,
        );
        let c = StageSpec::new(
            "c",
            StageKind::Elementwise,
            Shape::new(2, 1),
            Shape::new(2, 1),
            0,
        );
        let g =
            PipelineGraph::from_named_edges(vec![a, b, c], &[("a", "c"), ("b", "c")], 8).unwrap();
        assert_eq!(g.work(2).unique_input, 16);
        assert_eq!(g.work(2).duration, 8);
        assert_eq!(g.flow(0).read_rate, int(1));
        assert_eq!(g.flow(1).read_rate, int(1));
    }

    #[test]
    fn cycle_and_validation() {
        let a = StageSpec::new(
            "a",
            StageKind::Elementwise,
            Shape::new(1, 1),
            Shape::new(1, 1),
            0,
        );
        let b = StageSpec::new(
            "b",
            StageKind::Elementwise,
            Shape::new(1, 1),
            Shape::new(1, 1),
            0,
        );
        let err = PipelineGraph::from_named_edges(vec![a.clone(), b], &[("a", "b"), ("b", "a")], 4)
            .unwrap_err();
        assert!(matches!(err, GraphError::Cycle(_)));
        let bad = a.clone().with_reuse([2, 1]);
        assert!(matches!(
            PipelineGraph::chain(vec![bad], 4),
            Err(GraphError::InvalidStage { .. })
        ));
        assert_eq!(
            PipelineGraph::chain(vec![a], 0).unwrap_err(),
            GraphError::ZeroInput
        );
    }

    #[test]
    fn serialize_round_trip() {
        let g = parse_pipeline(KNN_STENCIL).unwrap();
        let again = parse_pipeline(&g.to_json()).unwrap();
        assert_eq!(g, again);
    }

    #[test]
    fn duration_identity() {
        let g = parse_pipeline(KNN_STENCIL).unwrap();
        for i in 0..g.stage_count() {
            let w = g.work(i);
            let d = int(w.duration);
            assert_eq!(int(w.unique_input) / w.rates.tau_in, d);
            assert_eq!(int(w.work) / w.rates.tau_out, d);
        }
    }
}

#![allow(dead_code)]

use pointstream::graph::{Edge, PipelineGraph, Shape, StageKind, StageSpec};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const MAX_DURATION: i64 = 12;
pub const MAX_TOTAL_DURATION: i64 = 40;

fn random_stage(rng: &mut ChaCha8Rng, id: String) -> StageSpec {
    let kinds = [
        StageKind::Elementwise,
        StageKind::Stencil,
        StageKind::Reduction,
        StageKind::Global,
    ];
    let kind = *kinds.choose(rng).unwrap();
    let depth = rng.gen_range(0..=3);
    let o_freq = rng.gen_range(1..=4);
    match kind {
        StageKind::Elementwise => {
            let rows = rng.gen_range(1..=4);
            StageSpec::new(
                id,
                kind,
                Shape::new(rows, 1),
                Shape::new(rows, rng.gen_range(1..=2)),
                depth,
            )
            .with_freqs(rng.gen_range(1..=2), o_freq)
        }
        StageKind::Stencil => {
            let beta = rng.gen_range(1..=4);
            StageSpec::new(
                id,
                kind,
                Shape::new(1, rng.gen_range(1..=4)),
                Shape::new(1, 1),
                depth,
            )
            .with_reuse([beta, 1])
            .with_freqs(1, o_freq)
        }
        StageKind::Reduction => {
            let k = *[2u32, 4].choose(rng).unwrap();
            StageSpec::new(id, kind, Shape::new(k, 1), Shape::new(1, 1), depth)
                .with_freqs(1, o_freq)
        }
        StageKind::Global => StageSpec::new(
            id,
            kind,
            Shape::new(rng.gen_range(1..=4), 1),
            Shape::new(rng.gen_range(1..=4), 1),
            depth,
        )
        .with_freqs(rng.gen_range(1..=2), o_freq),
    }
}

/// Random valid pipeline with 3 to 5 stages, rate denominators up to 4 and
/// an input volume of at most 64 elements.
pub fn random_pipeline(seed: u64) -> PipelineGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 3 + (seed % 3) as usize;
    loop {
        let stages: Vec<StageSpec> = (0..n)
            .map(|i| random_stage(&mut rng, format!("s{i}")))
            .collect();
        let mut edges = Vec::new();
        for c in 1..n {
            let p = rng.gen_range(0..c);
            edges.push(Edge {
                producer: p,
                consumer: c,
            });
            if c >= 2 && rng.gen_bool(0.2) {
                let q = rng.gen_range(0..c);
                if q != p {
                    edges.push(Edge {
                        producer: q,
                        consumer: c,
                    });
                }
            }
        }
        let input_work = rng.gen_range(4..=64);
        let Ok(g) = PipelineGraph::new(stages, edges, input_work) else {
            continue;
        };
        let ok = (0..n).all(|i| g.work(i).duration <= MAX_DURATION)
            && g.total_duration() <= MAX_TOTAL_DURATION;
        if ok {
            return g;
        }
    }
}

/// Horizon large enough to hold an as-soon-as-possible schedule.
pub fn suite_horizon(g: &PipelineGraph) -> i64 {
    pointstream::optimizer::oracle::oracle_horizon(g)
}

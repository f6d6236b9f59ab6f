mod common;

use pointstream::optimizer::{
    analytic_occupancy, earliest_starts, optimize, schedule_chunks, Options,
};
use pointstream::rational;
use pointstream::simulator::{
    peak_occupancy, simulate, simulate_banked, simulate_starts, BankModel, BankPolicy,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn occupancy_matches_closed_form(seed in 0u64..100_000, delays in prop::collection::vec(0i64..8, 5)) {
        let g = common::random_pipeline(seed);
        let mut starts = earliest_starts(&g);
        for (i, s) in starts.iter_mut().enumerate() {
            *s += delays[..=i].iter().sum::<i64>();
        }
        let caps = vec![i64::MAX; g.edge_count()];
        let trace = simulate_starts(&g, &starts, &caps, 1, 1);
        for e in 0..g.edge_count() {
            for t in trace.first_cycle..trace.first_cycle + trace.cycles() as i64 {
                prop_assert_eq!(trace.occupancy_at(e, t), analytic_occupancy(&g, &starts, e, t), "edge {} cycle {}", e, t);
            }
        }
    }

    #[test]
    fn every_token_written_is_freed(seed in 0u64..100_000, chunks in 1usize..=6) {
        let g = common::random_pipeline(seed);
        let sol = schedule_chunks(&optimize(&g, Options::default()).unwrap(), &g, chunks);
        let trace = simulate(&g, &sol, chunks);
        for e in 0..g.edge_count() {
            let total = rational::int(g.flow(e).volume * chunks as i64);
            prop_assert_eq!(trace.written[e], total);
            prop_assert_eq!(trace.freed[e], total);
        }
    }

    #[test]
    fn elision_never_takes_longer(
        streams in prop::collection::vec(prop::collection::vec(0usize..32, 1..40), 1..6),
        banks in 1usize..8,
    ) {
        let model = BankModel::new(banks);
        let stall = simulate_banked(&streams, &model, BankPolicy::Stall);
        let elide = simulate_banked(&streams, &model, BankPolicy::Elide);
        prop_assert_eq!(stall.granted(), streams.iter().map(Vec::len).sum::<usize>());
        prop_assert!(elide.cycle_count() <= stall.cycle_count());
    }
}

#[test]
fn chunk_trains_never_overflow() {
    for seed in 0..20 {
        let g = common::random_pipeline(seed);
        let single = optimize(&g, Options::default()).unwrap();
        for chunks in 1..=16 {
            let trace = simulate(&g, &schedule_chunks(&single, &g, chunks), chunks);
            assert!(trace.is_clean(), "seed {seed} chunks {chunks}");
            assert_eq!(
                peak_occupancy(&trace),
                single.buffer_sizes,
                "seed {seed} chunks {chunks}"
            );
        }
    }
}

#[test]
fn early_global_consumer_stalls() {
    for seed in 0..40 {
        let g = common::random_pipeline(seed);
        let sol = optimize(&g, Options::default()).unwrap();
        for e in 0..g.edge_count() {
            if g.flow(e).dependency != pointstream::graph::Dependency::Global {
                continue;
            }
            let edge = g.edges()[e];
            let mut starts = sol.start_cycles.clone();
            let p = edge.producer;
            starts[edge.consumer] =
                starts[p] + g.stage(p).stage_depth as i64 + g.work(p).duration - 1;
            let caps = vec![i64::MAX; g.edge_count()];
            let trace = simulate_starts(&g, &starts, &caps, sol.initiation_interval, 1);
            assert!(
                trace.stall_events.iter().any(|s| s.edge == e),
                "seed {seed} edge {e}"
            );
        }
    }
}

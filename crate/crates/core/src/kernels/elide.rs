//! Lock-step kNN over a banked node memory where conflicting queries skip
//! the contested subtree instead of waiting.

use crate::simulator::{arbitrate, Access, BankModel};

use super::cloud::Point;
use super::kdtree::{KdTree, SearchResult, Traversal};

#[derive(Debug, Clone, PartialEq)]
pub struct ElideReport {
    pub results: Vec<SearchResult>,
    /// Lock-step cycles until every query finished.
    pub cycles: usize,
    /// Subtrees dropped because of a bank conflict.
    pub elided: usize,
}

/// Node `i` of the tree lives at element `i` of `banks`. Each cycle every
/// unfinished query requests its next node; the granted ones visit it and
/// the denied ones drop it, both at the cost of one step.
pub fn knn_search_elide(
    tree: &KdTree,
    queries: &[Point],
    banks: &BankModel,
    k: usize,
    deadline: Option<usize>,
) -> ElideReport {
    assert!(deadline != Some(0), "deadline must be >= 1");
    let mut walks: Vec<Traversal> = queries
        .iter()
        .map(|&q| Traversal::nearest(tree, q, k))
        .collect();
    let mut truncated = vec![false; queries.len()];
    let mut cycles = 0;
    let mut elided = 0;
    loop {
        let requests: Vec<Option<usize>> = walks
            .iter_mut()
            .zip(truncated.iter_mut())
            .map(|(w, cut)| {
                let next = w.peek()?;
                if deadline.is_some_and(|d| w.steps() >= d) {
                    *cut = true;
                    return None;
                }
                Some(next)
            })
            .collect();
        if requests.iter().all(Option::is_none) {
            break;
        }
        cycles += 1;
        for (w, grant) in walks.iter_mut().zip(arbitrate(banks, &requests)) {
            match grant {
                Access::Granted(_) => w.visit(|_| {}),
                Access::Denied(_) => {
                    w.skip();
                    elided += 1;
                }
                Access::Idle => {}
            }
        }
    }
    let results = walks
        .into_iter()
        .zip(truncated)
        .map(|(w, cut)| w.finish(cut))
        .collect();
    ElideReport {
        results,
        cycles,
        elided,
    }
}

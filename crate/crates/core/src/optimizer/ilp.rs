//! Depth-first branch and bound over the exact LP relaxation.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::lp::{self, LpOutcome, Row};

#[derive(Debug, Clone)]
pub struct IntegerProgram {
    /// Minimized. Coefficients must be zero on continuous variables so that
    /// integral solutions have integral objective values.
    pub objective: Vec<BigInt>,
    pub rows: Vec<Row>,
    /// Rows that are only added to the LP once violated.
    pub lazy: Vec<bool>,
    pub lower: Vec<BigInt>,
    pub upper: Vec<BigInt>,
    pub integer: Vec<bool>,
    /// Order in which fractional variables are chosen for branching.
    pub branch_order: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum IlpOutcome {
    Optimal {
        x: Vec<BigInt>,
        value: BigInt,
        nodes: usize,
    },
    Infeasible {
        nodes: usize,
    },
}

impl IntegerProgram {
    /// Rows and bounds with every variable integer, branched in index order.
    pub fn new(
        objective: Vec<BigInt>,
        rows: Vec<Row>,
        lower: Vec<BigInt>,
        upper: Vec<BigInt>,
    ) -> Self {
        let n = objective.len();
        Self {
            lazy: vec![false; rows.len()],
            objective,
            rows,
            lower,
            upper,
            integer: vec![true; n],
            branch_order: (0..n).collect(),
        }
    }

    pub fn solve(&self) -> IlpOutcome {
        let mut active: Vec<usize> = (0..self.rows.len()).filter(|&r| !self.lazy[r]).collect();
        let mut stack = vec![(self.lower.clone(), self.upper.clone())];
        let mut best: Option<(Vec<BigInt>, BigInt)> = None;
        let mut nodes = 0usize;

        while let Some((lower, upper)) = stack.pop() {
            nodes += 1;
            let Some((x, value)) = self.relax(&mut active, &lower, &upper) else {
                continue;
            };
            let bound = ceil(&value);
            if let Some((_, incumbent)) = &best {
                if bound >= *incumbent {
                    continue;
                }
            }
            match self
                .branch_order
                .iter()
                .copied()
                .find(|&j| self.integer[j] && !x[j].is_integer())
            {
                None => {
                    let xi: Vec<BigInt> = x.iter().map(|v| v.to_integer()).collect();
                    best = Some((xi, value.to_integer()));
                }
                Some(j) => {
                    let floor = x[j].floor().to_integer();
                    let mut up_lower = lower.clone();
                    up_lower[j] = &floor + 1;
                    let mut down_upper = upper.clone();
                    down_upper[j] = floor;
                    // Down branch is explored first.
                    stack.push((up_lower, upper));
                    stack.push((lower, down_upper));
                }
            }
        }
        match best {
            Some((x, value)) => IlpOutcome::Optimal { x, value, nodes },
            None => IlpOutcome::Infeasible { nodes },
        }
    }

    /// Solves the relaxation, activating lazy rows until none is violated.
    fn relax(
        &self,
        active: &mut Vec<usize>,
        lower: &[BigInt],
        upper: &[BigInt],
    ) -> Option<(Vec<BigRational>, BigRational)> {
        loop {
            match lp::minimize(&self.objective, &self.rows, active, lower, upper) {
                LpOutcome::Infeasible => return None,
                LpOutcome::Optimal { x, value } => {
                    let mut added = false;
                    for r in 0..self.rows.len() {
                        if self.lazy[r]
                            && !active.contains(&r)
                            && !self.rows[r].violation(&x).is_zero()
                        {
                            active.push(r);
                            added = true;
                        }
                    }
                    if !added {
                        return Some((x, value));
                    }
                    active.sort_unstable();
                }
            }
        }
    }
}

fn ceil(v: &BigRational) -> BigInt {
    v.ceil().to_integer()
}

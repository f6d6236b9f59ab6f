//! Exact two-phase simplex over rational numbers.
//!
//! Every variable carries finite bounds; rows have integer coefficients.
//! Bland's rule guarantees termination.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

/// `Σ coeff·x  sense  rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub coeffs: Vec<(usize, BigInt)>,
    pub sense: Sense,
    pub rhs: BigInt,
}

impl Row {
    pub fn lhs_at(&self, x: &[BigRational]) -> BigRational {
        self.coeffs.iter().fold(BigRational::zero(), |acc, (j, a)| {
            acc + &x[*j] * BigRational::from_integer(a.clone())
        })
    }

    /// Amount by which `x` violates the row (zero when satisfied).
    pub fn violation(&self, x: &[BigRational]) -> BigRational {
        let lhs = self.lhs_at(x);
        let rhs = BigRational::from_integer(self.rhs.clone());
        let v = match self.sense {
            Sense::Le => lhs - rhs,
            Sense::Ge => rhs - lhs,
            Sense::Eq => (lhs - rhs).abs(),
        };
        if v.is_positive() {
            v
        } else {
            BigRational::zero()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal {
        x: Vec<BigRational>,
        value: BigRational,
    },
    Infeasible,
}

/// Minimizes `objective · x` over the rows listed in `active`, with
/// `lower[j] <= x[j] <= upper[j]`.
pub fn minimize(
    objective: &[BigInt],
    rows: &[Row],
    active: &[usize],
    lower: &[BigInt],
    upper: &[BigInt],
) -> LpOutcome {
    let n = objective.len();
    debug_assert_eq!(lower.len(), n);
    debug_assert_eq!(upper.len(), n);
    if lower.iter().zip(upper).any(|(l, u)| l > u) {
        return LpOutcome::Infeasible;
    }

    // Shift x = lower + x', x' >= 0, and add x' <= upper - lower rows.
    let mut std_rows: Vec<(Vec<BigRational>, Sense, BigRational)> = Vec::new();
    for &r in active {
        let row = &rows[r];
        let mut a = vec![BigRational::zero(); n];
        let mut rhs = BigRational::from_integer(row.rhs.clone());
        for (j, c) in &row.coeffs {
            let c = BigRational::from_integer(c.clone());
            rhs -= &c * BigRational::from_integer(lower[*j].clone());
            a[*j] += c;
        }
        std_rows.push((a, row.sense, rhs));
    }
    for j in 0..n {
        let mut a = vec![BigRational::zero(); n];
        a[j] = BigRational::one();
        std_rows.push((
            a,
            Sense::Le,
            BigRational::from_integer(&upper[j] - &lower[j]),
        ));
    }
    for (a, sense, rhs) in std_rows.iter_mut() {
        if rhs.is_negative() {
            for v in a.iter_mut() {
                *v = -v.clone();
            }
            *rhs = -rhs.clone();
            *sense = match *sense {
                Sense::Le => Sense::Ge,
                Sense::Ge => Sense::Le,
                Sense::Eq => Sense::Eq,
            };
        }
    }

    let m = std_rows.len();
    let n_slack = std_rows.iter().filter(|(_, s, _)| *s != Sense::Eq).count();
    let n_art = std_rows.iter().filter(|(_, s, _)| *s != Sense::Le).count();
    let width = n + n_slack + n_art;
    let art_start = n + n_slack;

    let mut t = Tableau {
        rows: Vec::with_capacity(m),
        rhs: Vec::with_capacity(m),
        basis: Vec::with_capacity(m),
        width,
    };
    let mut slack = n;
    let mut art = art_start;
    for (a, sense, rhs) in std_rows {
        let mut row = a;
        row.resize(width, BigRational::zero());
        match sense {
            Sense::Le => {
                row[slack] = BigRational::one();
                t.basis.push(slack);
                slack += 1;
            }
            Sense::Ge => {
                row[slack] = -BigRational::one();
                slack += 1;
                row[art] = BigRational::one();
                t.basis.push(art);
                art += 1;
            }
            Sense::Eq => {
                row[art] = BigRational::one();
                t.basis.push(art);
                art += 1;
            }
        }
        t.rows.push(row);
        t.rhs.push(rhs);
    }

    if n_art > 0 {
        let mut phase1 = vec![BigRational::zero(); width];
        for c in phase1.iter_mut().skip(art_start) {
            *c = BigRational::one();
        }
        let value = t.optimize(&phase1, width);
        if value.is_positive() {
            return LpOutcome::Infeasible;
        }
        t.drive_out_artificials(art_start);
    }

    let mut cost = vec![BigRational::zero(); width];
    for (j, c) in objective.iter().enumerate() {
        cost[j] = BigRational::from_integer(c.clone());
    }
    t.optimize(&cost, art_start);

    let mut x: Vec<BigRational> = lower
        .iter()
        .map(|l| BigRational::from_integer(l.clone()))
        .collect();
    for (i, &b) in t.basis.iter().enumerate() {
        if b < n {
            x[b] += &t.rhs[i];
        }
    }
    let value = objective
        .iter()
        .zip(&x)
        .fold(BigRational::zero(), |acc, (c, v)| {
            acc + BigRational::from_integer(c.clone()) * v
        });
    LpOutcome::Optimal { x, value }
}

struct Tableau {
    rows: Vec<Vec<BigRational>>,
    rhs: Vec<BigRational>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    /// Minimizes `cost` using only columns below `limit` as entering candidates.
    fn optimize(&mut self, cost: &[BigRational], limit: usize) -> BigRational {
        loop {
            let reduced = self.reduced_costs(cost);
            // Bland: lowest-index improving column.
            let Some(enter) =
                (0..limit).find(|&j| !self.basis.contains(&j) && reduced[j].is_negative())
            else {
                break;
            };
            let mut leave: Option<(usize, BigRational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = &row[enter];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / a;
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => {
                        ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let (r, _) = leave.expect("bounded variables keep the LP bounded");
            self.pivot(r, enter);
        }
        self.basis
            .iter()
            .zip(&self.rhs)
            .fold(BigRational::zero(), |acc, (&b, v)| acc + &cost[b] * v)
    }

    fn reduced_costs(&self, cost: &[BigRational]) -> Vec<BigRational> {
        let mut reduced = cost.to_vec();
        for (i, row) in self.rows.iter().enumerate() {
            let cb = &cost[self.basis[i]];
            if cb.is_zero() {
                continue;
            }
            for (j, a) in row.iter().enumerate() {
                if !a.is_zero() {
                    reduced[j] -= cb * a;
                }
            }
        }
        reduced
    }

    fn pivot(&mut self, r: usize, k: usize) {
        let p = self.rows[r][k].clone();
        if !p.is_one() {
            for v in self.rows[r].iter_mut() {
                if !v.is_zero() {
                    *v /= &p;
                }
            }
            self.rhs[r] /= &p;
        }
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r].clone();
        let nz: Vec<usize> = (0..self.width)
            .filter(|&j| !pivot_row[j].is_zero())
            .collect();
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let f = self.rows[i][k].clone();
            if f.is_zero() {
                continue;
            }
            for &j in &nz {
                let d = &f * &pivot_row[j];
                self.rows[i][j] -= d;
            }
            self.rhs[i] -= &f * &pivot_rhs;
        }
        self.basis[r] = k;
    }

    /// Removes zero-level artificials from the basis after phase one.
    fn drive_out_artificials(&mut self, art_start: usize) {
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] >= art_start {
                if let Some(k) = (0..art_start).find(|&j| !self.rows[i][j].is_zero()) {
                    self.pivot(i, k);
                } else {
                    // Redundant row.
                    self.rows.remove(i);
                    self.rhs.remove(i);
                    self.basis.remove(i);
                    continue;
                }
            }
            i += 1;
        }
        for row in self.rows.iter_mut() {
            for v in row.iter_mut().skip(art_start) {
                *v = BigRational::zero();
            }
        }
    }
}

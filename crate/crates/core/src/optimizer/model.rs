//! Line-buffer constraint system.
//!
//! Time is discrete. A stage started at `s` reads during `[s, s + D)` and
//! writes during `[s + Δ, s + Δ + D)`. Writes of a cycle are visible to reads
//! in the same cycle; freed slots become reusable one cycle later. For an edge
//! `p -> c` the occupancy during cycle `t` is
//!
//! ```text
//! occ(t) = clamp((t + 1 - t_w)·τ_out, 0, W) - clamp((t - t_o)·τ_e, 0, W)
//! ```
//!
//! where `t_w = s_p + Δ_p`, `τ_e` is the consumer's read rate on the edge and
//! `t_o` is the overwrite start: `s_c` for local consumers and the
//! consumer's end `s_c + Δ_c + D_c` for global ones.
//!
//! The occupancy peaks either at `t_o` or at the producer's last write, unless
//! the consumer starts after the producer has finished, in which case the
//! whole volume `W` sits in the buffer. One binary per local edge selects
//! between those two regimes.

use num_bigint::BigInt;

use crate::graph::{Dependency, PipelineGraph};
use crate::rational::{self, Overflow, Rational};

use super::ilp::IntegerProgram;
use super::lp::{Row, Sense};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Start(usize),
    /// `t_o` of a global edge.
    Overwrite(usize),
    /// `t_o - t_w` of a local edge.
    Lag(usize),
    Buffer(usize),
    Saturated(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub kind: VarKind,
    pub lower: i64,
    pub upper: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    /// Consumer's first read is covered by producer writes.
    DependencyStart,
    /// Consumer's last read is covered by producer writes.
    DependencyEnd,
    /// Per-timestamp availability row.
    DependencySample,
    /// Consumer starts after the producer's last write.
    GlobalDependency,
    OverwriteStart,
    /// Unsaturated regime requires `t_o` before the producer's last write.
    SaturationSwitch,
    BufferAtOverwrite,
    BufferAtLastWrite,
    /// Per-timestamp buffer row.
    BufferSample,
    BufferSaturated,
    /// Lower convex envelope of the exact peak; redundant for integer
    /// points, tightens the relaxation.
    BufferEnvelope,
}

impl Role {
    fn is_sample(self) -> bool {
        matches!(self, Role::DependencySample | Role::BufferSample)
    }
}

/// One scaled, pure-integer row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub terms: Vec<(usize, i64)>,
    pub sense: Sense,
    pub rhs: i64,
    pub role: Role,
    pub edge: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct ConstraintSystem {
    pub graph: PipelineGraph,
    pub pruned: bool,
    pub horizon: i64,
    pub vars: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    pub start_vars: Vec<usize>,
    pub edge_vars: Vec<EdgeVars>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeVars {
    /// [`VarKind::Overwrite`] on global edges, [`VarKind::Lag`] on local ones.
    pub overwrite: usize,
    pub buffer: usize,
    pub saturated: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BuildError {
    #[error("stage `{stage}` cannot start before cycle {earliest}, beyond horizon {horizon}")]
    HorizonExhausted {
        stage: String,
        earliest: i64,
        horizon: i64,
    },
    #[error(transparent)]
    Overflow(#[from] Overflow),
}

/// Default horizon: four times the summed active durations.
pub fn default_horizon(graph: &PipelineGraph) -> i64 {
    4 * graph.total_duration()
}

/// Smallest start-cycle lag of the consumer relative to the producer's
/// first write that satisfies every availability rule of the edge.
pub fn min_lag(graph: &PipelineGraph, edge: usize) -> i64 {
    let e = graph.edges()[edge];
    let p = graph.work(e.producer);
    let c = graph.work(e.consumer);
    let flow = graph.flow(edge);
    match flow.dependency {
        Dependency::Global => p.duration,
        Dependency::Local => {
            let first = rational::ceil(flow.read_rate / p.rates.tau_out) - 1;
            first.max(p.duration - c.duration).max(0)
        }
    }
}

/// Earliest start of every stage with all sources at cycle 0.
pub fn earliest_starts(graph: &PipelineGraph) -> Vec<i64> {
    let mut start = vec![0i64; graph.stage_count()];
    for &i in graph.topo_order() {
        for e in graph.producers(i) {
            let p = graph.edges()[e].producer;
            let bound = start[p] + graph.stage(p).stage_depth as i64 + min_lag(graph, e);
            start[i] = start[i].max(bound);
        }
    }
    start
}

/// Overwrite start for `edge` under the given stage starts.
pub fn overwrite_start(graph: &PipelineGraph, starts: &[i64], edge: usize) -> i64 {
    let c = graph.edges()[edge].consumer;
    match graph.flow(edge).dependency {
        Dependency::Local => starts[c],
        Dependency::Global => {
            starts[c] + graph.stage(c).stage_depth as i64 + graph.work(c).duration
        }
    }
}

/// Closed-form occupancy of `edge` during cycle `t` for one chunk.
pub fn analytic_occupancy(graph: &PipelineGraph, starts: &[i64], edge: usize, t: i64) -> Rational {
    let e = graph.edges()[edge];
    let flow = graph.flow(edge);
    let w = rational::int(flow.volume);
    let t_w = starts[e.producer] + graph.stage(e.producer).stage_depth as i64;
    let t_o = overwrite_start(graph, starts, edge);
    let clamp = |v: Rational| v.max(rational::int(0)).min(w);
    let written = clamp(rational::int(t + 1 - t_w) * graph.work(e.producer).rates.tau_out);
    let freed = clamp(rational::int(t - t_o) * flow.read_rate);
    written - freed
}

/// Exact peak occupancy of one chunk on `edge`.
pub fn analytic_peak(graph: &PipelineGraph, starts: &[i64], edge: usize) -> Rational {
    let e = graph.edges()[edge];
    let t_w = starts[e.producer] + graph.stage(e.producer).stage_depth as i64;
    let last = t_w + graph.work(e.producer).duration - 1;
    let t_o = overwrite_start(graph, starts, edge);
    // Piecewise linear with integer breakpoints; the max sits on one of them.
    [t_w, last, t_o, t_o.min(last)]
        .into_iter()
        .filter(|&t| t >= t_w)
        .map(|t| analytic_occupancy(graph, starts, edge, t))
        .max()
        .unwrap_or_else(|| rational::int(0))
}

/// Peak occupancy of a local edge whose overwrite starts `u` cycles after
/// the producer's first write.
pub fn peak_at_offset(graph: &PipelineGraph, edge: usize, u: i64) -> Rational {
    let e = graph.edges()[edge];
    let p = graph.work(e.producer);
    let flow = graph.flow(edge);
    let w = rational::int(flow.volume);
    if u >= p.duration - 1 {
        return w;
    }
    let at_overwrite = rational::int(u + 1) * p.rates.tau_out;
    let at_last_write = w - rational::int(p.duration - 1 - u) * flow.read_rate;
    at_overwrite.max(at_last_write).min(w)
}

/// Lower convex hull of `peak_at_offset` over integer `u` in `[lo, hi]`, as
/// `(slope, intercept)` pairs.
fn peak_envelope(
    graph: &PipelineGraph,
    edge: usize,
    lo: i64,
    hi: i64,
) -> Vec<(Rational, Rational)> {
    let e = graph.edges()[edge];
    let p = graph.work(e.producer);
    let tau_out = p.rates.tau_out;
    let tau_e = graph.flow(edge).read_rate;
    // The two linear branches cross where (u+1)τ_out = W - (D-1-u)τ_e.
    let w = rational::int(graph.flow(edge).volume);
    let mut us = vec![lo, hi, p.duration - 1];
    if tau_out != tau_e {
        let cross = (w - rational::int(p.duration - 1) * tau_e - tau_out) / (tau_out - tau_e);
        us.extend([cross.floor().to_integer(), cross.ceil().to_integer()]);
    }
    us.retain(|&u| lo <= u && u <= hi);
    us.sort_unstable();
    us.dedup();
    let pts: Vec<(Rational, Rational)> = us
        .into_iter()
        .map(|u| (rational::int(u), peak_at_offset(graph, edge, u)))
        .collect();
    let mut hull: Vec<(Rational, Rational)> = Vec::new();
    for pt in pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // Drop b when it lies on or above the segment a -> pt.
            if (b.1 - a.1) * (pt.0 - a.0) >= (pt.1 - a.1) * (b.0 - a.0) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    hull.windows(2)
        .map(|s| {
            let slope = (s[1].1 - s[0].1) / (s[1].0 - s[0].0);
            (slope, s[0].1 - slope * s[0].0)
        })
        .collect()
}

/// Linear expression over system variables.
#[derive(Debug, Clone, Default)]
struct Lin {
    terms: Vec<(usize, Rational)>,
    constant: Rational,
}

impl Lin {
    fn constant(c: Rational) -> Self {
        Self {
            terms: Vec::new(),
            constant: c,
        }
    }

    fn var(v: usize) -> Self {
        Self {
            terms: vec![(v, rational::int(1))],
            constant: rational::int(0),
        }
    }

    fn plus(mut self, other: Lin) -> Result<Self, Overflow> {
        for (v, c) in other.terms {
            match self.terms.iter_mut().find(|(u, _)| *u == v) {
                Some((_, acc)) => *acc = rational::add(*acc, c)?,
                None => self.terms.push((v, c)),
            }
        }
        self.constant = rational::add(self.constant, other.constant)?;
        Ok(self)
    }

    fn minus(self, other: Lin) -> Result<Self, Overflow> {
        self.plus(other.scale(rational::int(-1))?)
    }

    fn add_const(mut self, c: Rational) -> Result<Self, Overflow> {
        self.constant = rational::add(self.constant, c)?;
        Ok(self)
    }

    fn scale(mut self, k: Rational) -> Result<Self, Overflow> {
        for (_, c) in self.terms.iter_mut() {
            *c = rational::mul(*c, k)?;
        }
        self.constant = rational::mul(self.constant, k)?;
        Ok(self)
    }

    fn max_over(&self, vars: &[Variable]) -> Result<Rational, Overflow> {
        let mut acc = self.constant;
        for (v, c) in &self.terms {
            let bound = if *c > rational::int(0) {
                vars[*v].upper
            } else {
                vars[*v].lower
            };
            acc = rational::add(acc, rational::mul(*c, rational::int(bound))?)?;
        }
        Ok(acc)
    }
}

struct Builder<'g> {
    graph: &'g PipelineGraph,
    vars: Vec<Variable>,
    constraints: Vec<Constraint>,
}

impl Builder<'_> {
    fn var(&mut self, kind: VarKind, lower: i64, upper: i64) -> usize {
        self.vars.push(Variable { kind, lower, upper });
        self.vars.len() - 1
    }

    /// Emits `lhs sense rhs`, scaled to integers.
    fn emit(
        &mut self,
        lhs: Lin,
        sense: Sense,
        rhs: Lin,
        role: Role,
        edge: Option<usize>,
    ) -> Result<(), Overflow> {
        let diff = lhs.minus(rhs)?;
        let scale =
            rational::lcm_denominators(diff.terms.iter().map(|(_, c)| c).chain([&diff.constant]))?;
        let k = rational::int(scale);
        let mut terms = Vec::with_capacity(diff.terms.len());
        for (v, c) in diff.terms {
            let c = rational::mul(c, k)?;
            if *c.numer() != 0 {
                terms.push((v, c.to_integer()));
            }
        }
        terms.sort_unstable();
        let rhs = -rational::mul(diff.constant, k)?.to_integer();
        self.constraints.push(Constraint {
            terms,
            sense,
            rhs,
            role,
            edge,
        });
        Ok(())
    }

    /// `target >= expr - M·switch` with the smallest valid `M`.
    fn emit_switched(
        &mut self,
        target: Lin,
        expr: Lin,
        switch: usize,
        role: Role,
        edge: usize,
    ) -> Result<(), Overflow> {
        let gap = expr.clone().minus(target.clone())?.max_over(&self.vars)?;
        let big_m = gap.max(rational::int(0));
        let rhs = expr.minus(Lin::var(switch).scale(big_m)?)?;
        self.emit(target, Sense::Ge, rhs, role, Some(edge))
    }
}

/// Builds the line-buffer minimization system for `graph`.
///
/// With `pruned`, only endpoint rows are emitted. Otherwise one row per
/// cycle of the scheduling horizon is emitted for buffer occupancy and for
/// data availability on every edge.
pub fn build_constraints(
    graph: &PipelineGraph,
    pruned: bool,
    horizon: Option<i64>,
) -> Result<ConstraintSystem, BuildError> {
    let horizon = horizon.unwrap_or_else(|| default_horizon(graph));
    let earliest = earliest_starts(graph);
    if let Some((i, &t)) = earliest.iter().enumerate().find(|(_, &t)| t > horizon) {
        return Err(BuildError::HorizonExhausted {
            stage: graph.stage(i).id.clone(),
            earliest: t,
            horizon,
        });
    }

    let mut b = Builder {
        graph,
        vars: Vec::new(),
        constraints: Vec::new(),
    };
    // Lower bounds from the dependency lags tighten big-M terms. Shifting
    // every start by the same amount changes nothing and no consumer starts
    // before its producer, so a lone source is pinned to cycle 0.
    let mut sources = (0..graph.stage_count()).filter(|&i| graph.producers(i).next().is_none());
    let pinned = match (sources.next(), sources.next()) {
        (Some(src), None) => Some(src),
        _ => None,
    };
    let start_vars: Vec<usize> = (0..graph.stage_count())
        .map(|i| {
            let upper = if Some(i) == pinned {
                earliest[i]
            } else {
                horizon
            };
            b.var(VarKind::Start(i), earliest[i], upper)
        })
        .collect();

    let mut edge_vars = Vec::with_capacity(graph.edge_count());
    for (ei, e) in graph.edges().iter().enumerate() {
        let c = e.consumer;
        let span = graph.stage(c).stage_depth as i64 + graph.work(c).duration;
        let overwrite = match graph.flow(ei).dependency {
            Dependency::Global => b.var(VarKind::Overwrite(ei), 0, horizon + span),
            Dependency::Local => {
                let t_w_min = earliest[e.producer] + graph.stage(e.producer).stage_depth as i64;
                b.var(
                    VarKind::Lag(ei),
                    min_lag(graph, ei),
                    horizon + span - t_w_min,
                )
            }
        };
        let buffer = b.var(VarKind::Buffer(ei), 0, graph.flow(ei).volume);
        let saturated = match graph.flow(ei).dependency {
            Dependency::Local => Some(b.var(VarKind::Saturated(ei), 0, 1)),
            Dependency::Global => None,
        };
        edge_vars.push(EdgeVars {
            overwrite,
            buffer,
            saturated,
        });
    }

    for ei in 0..graph.edge_count() {
        emit_edge(&mut b, &start_vars, edge_vars[ei], ei, pruned, horizon)?;
    }

    Ok(ConstraintSystem {
        graph: graph.clone(),
        pruned,
        horizon,
        vars: b.vars,
        constraints: b.constraints,
        start_vars,
        edge_vars,
    })
}

fn emit_edge(
    b: &mut Builder<'_>,
    start_vars: &[usize],
    ev: EdgeVars,
    ei: usize,
    pruned: bool,
    horizon: i64,
) -> Result<(), Overflow> {
    let g = b.graph;
    let e = g.edges()[ei];
    let (p, c) = (e.producer, e.consumer);
    let pw = *g.work(p);
    let cw = *g.work(c);
    let flow = *g.flow(ei);
    let tau_out = pw.rates.tau_out;
    let tau_e = flow.read_rate;
    let w = rational::int(flow.volume);
    let delta_p = rational::int(g.stage(p).stage_depth as i64);
    let delta_c = rational::int(g.stage(c).stage_depth as i64);
    let d_p = rational::int(pw.duration);
    let d_c = rational::int(cw.duration);
    let one = rational::int(1);

    let s_p = Lin::var(start_vars[p]);
    let s_c = Lin::var(start_vars[c]);
    let lb = Lin::var(ev.buffer);
    // t_w = s_p + Δ_p
    let t_w = s_p.add_const(delta_p)?;
    let t_o = match flow.dependency {
        Dependency::Global => Lin::var(ev.overwrite),
        Dependency::Local => t_w.clone().plus(Lin::var(ev.overwrite))?,
    };
    // Every timestamp a window on this edge can cover within the horizon.
    let samples = horizon
        + g.stage(p).stage_depth as i64
        + pw.duration
        + g.stage(c).stage_depth as i64
        + cw.duration
        + 1;

    match flow.dependency {
        Dependency::Global => {
            // s_c >= t_w + D_p
            b.emit(
                s_c.clone(),
                Sense::Ge,
                t_w.clone().add_const(d_p)?,
                Role::GlobalDependency,
                Some(ei),
            )?;
            // t_o >= s_c + Δ_c + D_c
            let end_c = s_c.add_const(rational::add(delta_c, d_c)?)?;
            b.emit(t_o, Sense::Ge, end_c, Role::OverwriteStart, Some(ei))?;
            if pruned {
                b.emit(
                    lb,
                    Sense::Ge,
                    Lin::constant(w),
                    Role::BufferSaturated,
                    Some(ei),
                )?;
            } else {
                // Nothing is freed while the producer writes: occ = (k+1)·τ_out.
                for j in 0..samples {
                    let occ = rational::mul(rational::int(pw.duration - j), tau_out)?;
                    b.emit(
                        lb.clone(),
                        Sense::Ge,
                        Lin::constant(occ),
                        Role::BufferSample,
                        Some(ei),
                    )?;
                }
            }
        }
        Dependency::Local => {
            let y = ev.saturated.expect("local edges carry a regime switch");
            // Availability: written(t) >= read(t) for t = s_c + k, k in [0, D_c).
            let written_minus_read = |k: i64| -> Result<Lin, Overflow> {
                let written = s_c
                    .clone()
                    .minus(t_w.clone())?
                    .add_const(rational::int(k + 1))?
                    .scale(tau_out)?;
                written.add_const(-rational::mul(rational::int(k + 1), tau_e)?)
            };
            if pruned {
                b.emit(
                    written_minus_read(0)?,
                    Sense::Ge,
                    Lin::default(),
                    Role::DependencyStart,
                    Some(ei),
                )?;
                b.emit(
                    written_minus_read(cw.duration - 1)?,
                    Sense::Ge,
                    Lin::default(),
                    Role::DependencyEnd,
                    Some(ei),
                )?;
            } else {
                // Rows outside [0, D_c) are implied by the nearer endpoint when
                // extended in the direction where the gap grows.
                let ks: Vec<i64> = if tau_out >= tau_e {
                    (0..samples).collect()
                } else {
                    (0..samples).map(|j| cw.duration - 1 - j).collect()
                };
                for k in ks {
                    b.emit(
                        written_minus_read(k)?,
                        Sense::Ge,
                        Lin::default(),
                        Role::DependencySample,
                        Some(ei),
                    )?;
                }
            }

            // t_o >= s_c
            b.emit(t_o.clone(), Sense::Ge, s_c, Role::OverwriteStart, Some(ei))?;
            // t_o <= t_w + D_p - 1 unless saturated.
            let last_write = t_w.clone().add_const(rational::sub(d_p, one)?)?;
            let gap = t_o
                .clone()
                .minus(last_write.clone())?
                .max_over(&b.vars)?
                .max(rational::int(0));
            b.emit(
                t_o.clone(),
                Sense::Le,
                last_write.clone().plus(Lin::var(y).scale(gap)?)?,
                Role::SaturationSwitch,
                Some(ei),
            )?;

            // Occupancy along the line through (t_o, b1) and (last write, b2).
            let occ_at = |t: Lin| -> Result<Lin, Overflow> {
                let written = t
                    .clone()
                    .minus(t_w.clone())?
                    .add_const(one)?
                    .scale(tau_out)?;
                let freed = t.minus(t_o.clone())?.scale(tau_e)?;
                written.minus(freed)
            };
            if pruned {
                b.emit_switched(
                    lb.clone(),
                    occ_at(t_o.clone())?,
                    y,
                    Role::BufferAtOverwrite,
                    ei,
                )?;
                b.emit_switched(
                    lb.clone(),
                    occ_at(last_write.clone())?,
                    y,
                    Role::BufferAtLastWrite,
                    ei,
                )?;
            } else {
                for j in 0..samples {
                    // Anchor at the endpoint the line is highest towards.
                    let t = if tau_out >= tau_e {
                        last_write.clone().add_const(rational::int(-j))?
                    } else {
                        t_o.clone().add_const(rational::int(j))?
                    };
                    b.emit_switched(lb.clone(), occ_at(t)?, y, Role::BufferSample, ei)?;
                }
            }
            // Saturated: the whole volume is resident at the last write.
            b.emit(
                lb.clone(),
                Sense::Ge,
                Lin::var(y).scale(w)?,
                Role::BufferSaturated,
                Some(ei),
            )?;

            // u = t_o - t_w over its reachable range.
            let lo = b.vars[start_vars[c]].lower
                - b.vars[start_vars[p]].upper
                - g.stage(p).stage_depth as i64;
            let lo = lo.max(b.vars[ev.overwrite].lower);
            let hi = b.vars[ev.overwrite].upper;
            let u = Lin::var(ev.overwrite);
            for (slope, intercept) in peak_envelope(g, ei, lo, hi) {
                let line = u.clone().scale(slope)?.add_const(intercept)?;
                b.emit(lb.clone(), Sense::Ge, line, Role::BufferEnvelope, Some(ei))?;
            }
        }
    }
    Ok(())
}

impl ConstraintSystem {
    pub fn constraint_count(&self) -> usize {
        self.constraints.len()
    }

    /// Integer program minimizing `objective`; per-timestamp rows are lazy.
    pub fn integer_program(&self, objective: &[i64]) -> IntegerProgram {
        IntegerProgram {
            objective: objective.iter().map(|&c| BigInt::from(c)).collect(),
            rows: self
                .constraints
                .iter()
                .map(|c| Row {
                    coeffs: c.terms.iter().map(|&(v, k)| (v, BigInt::from(k))).collect(),
                    sense: c.sense,
                    rhs: BigInt::from(c.rhs),
                })
                .collect(),
            lazy: self
                .constraints
                .iter()
                .map(|c| c.role.is_sample())
                .collect(),
            lower: self.vars.iter().map(|v| BigInt::from(v.lower)).collect(),
            upper: self.vars.iter().map(|v| BigInt::from(v.upper)).collect(),
            integer: vec![true; self.vars.len()],
            branch_order: self.branch_order(),
        }
    }

    /// Regime switches first, then lags, then start cycles, then the rest.
    fn branch_order(&self) -> Vec<usize> {
        let rank = |k: VarKind| match k {
            VarKind::Saturated(_) => 0,
            VarKind::Lag(_) => 1,
            VarKind::Start(_) => 2,
            VarKind::Overwrite(_) => 3,
            VarKind::Buffer(_) => 4,
        };
        let mut order: Vec<usize> = (0..self.vars.len()).collect();
        order.sort_by_key(|&v| rank(self.vars[v].kind));
        order
    }

    /// Σ LB_i objective.
    pub fn buffer_objective(&self) -> Vec<i64> {
        let mut obj = vec![0; self.vars.len()];
        for ev in &self.edge_vars {
            obj[ev.buffer] = 1;
        }
        obj
    }

    /// Whether an integer assignment satisfies every row and bound.
    pub fn is_satisfied(&self, x: &[i64]) -> bool {
        self.vars
            .iter()
            .zip(x)
            .all(|(v, &xv)| v.lower <= xv && xv <= v.upper)
            && self.constraints.iter().all(|c| {
                let lhs: i128 = c.terms.iter().map(|&(v, k)| k as i128 * x[v] as i128).sum();
                let rhs = c.rhs as i128;
                match c.sense {
                    Sense::Le => lhs <= rhs,
                    Sense::Ge => lhs >= rhs,
                    Sense::Eq => lhs == rhs,
                }
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{parse_pipeline, Shape, StageKind, StageSpec};

    fn knn_stencil() -> PipelineGraph {
        parse_pipeline(
            r#"{"input_work": 48, "stages": [
                {"id": "knn", "kind": "global", "i_shape": [1, 3], "o_shape": [4, 3], "o_freq": 8, "stage": 8},
                {"id": "curv", "kind": "stencil", "i_shape": [1, 3], "o_shape": [1, 1], "reuse": [2, 1], "stage": 2}],
                "edges": [["knn", "curv"]]}"#,
        )
        .unwrap()
    }

    #[test]
    fn pruned_count_is_small() {
        let sys = build_constraints(&knn_stencil(), true, None).unwrap();
        assert!(sys.constraint_count() <= 8, "{}", sys.constraint_count());
    }

    #[test]
    fn unpruned_count_covers_windows() {
        let g = knn_stencil();
        let sys = build_constraints(&g, false, Some(200)).unwrap();
        for i in 0..g.stage_count() {
            assert!(sys.constraint_count() as i64 >= g.work(i).duration);
        }
        assert!(sys.constraint_count() > 400);
    }

    #[test]
    fn single_stage_has_no_rows() {
        let s = StageSpec::new(
            "a",
            StageKind::Elementwise,
            Shape::new(1, 1),
            Shape::new(1, 1),
            0,
        );
        let g = PipelineGraph::chain(vec![s], 8).unwrap();
        let sys = build_constraints(&g, true, None).unwrap();
        assert_eq!(sys.constraint_count(), 0);
        assert!(sys.buffer_objective().iter().all(|&c| c == 0));
    }

    #[test]
    fn horizon_too_small() {
        let g = knn_stencil();
        // The stencil needs the kNN stage's first write at cycle 8.
        assert!(matches!(
            build_constraints(&g, true, Some(3)),
            Err(BuildError::HorizonExhausted { .. })
        ));
    }

    #[test]
    fn earliest_starts_respect_lags() {
        let g = knn_stencil();
        assert_eq!(earliest_starts(&g), vec![0, 8]);
    }

    #[test]
    fn analytic_peak_matches_scan() {
        let g = knn_stencil();
        for lag in 0..30 {
            let starts = [0, 8 + lag];
            let scan = (-5..120)
                .map(|t| analytic_occupancy(&g, &starts, 0, t))
                .max()
                .unwrap();
            assert_eq!(analytic_peak(&g, &starts, 0), scan, "lag {lag}");
        }
    }
}

//! LP-based branch-and-bound for binary MILP.
//!
//! Internally everything is a minimization; reports are converted back to
//! the instance's sense. Nodes store a fixing per binary, the LP at each node
//! is solved from scratch with the simplex backend, and every node runs a
//! rounding heuristic so incumbents show up early.

mod oracle;

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use thiserror::Error;

use crate::clock::Clock;
use crate::lp::{self, LpError, LpProblem, LpStatus, SimplexOptions};
use crate::math;
use crate::model::{LinearCut, MipInstance, ModelError, Solution, SolutionStatus, FEASIBILITY_TOL, INTEGRALITY_TOL};

pub use oracle::{brute_force, dp_knapsack, DpKnapsack, BRUTE_FORCE_MAX_BINARIES, DP_TABLE_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeOrder {
    BestBound,
    DepthFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchRule {
    /// Binary closest to 1/2, lowest index on ties.
    MostFractional,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    /// Seconds.
    pub time_limit: f64,
    pub node_limit: usize,
    pub rel_gap: f64,
    pub abs_gap: f64,
    /// Nodes whose bound is not better than this value are pruned. Always in
    /// the minimization sense: for a maximization instance pass `-value`.
    pub cutoff: Option<f64>,
    pub node_order: NodeOrder,
    pub branch_rule: BranchRule,
    pub seed: u64,
    pub simplex: SimplexOptions,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            time_limit: 10.0,
            node_limit: 1_000_000,
            rel_gap: 1e-6,
            abs_gap: 1e-9,
            cutoff: None,
            node_order: NodeOrder::BestBound,
            branch_rule: BranchRule::MostFractional,
            seed: 0,
            simplex: SimplexOptions::default(),
        }
    }
}

impl SolveOptions {
    /// Options that close the tree down to `abs_gap` only.
    pub fn exact() -> Self {
        Self { rel_gap: 0.0, ..Self::default() }
    }

    /// Sets the cutoff from an objective value in the instance's own sense.
    pub fn with_objective_cutoff(mut self, instance: &MipInstance, value: f64) -> Self {
        self.cutoff = Some(instance.sense.to_min_factor() * value);
        self
    }

    pub fn validate(&self) -> Result<(), SolveError> {
        if !(self.time_limit > 0.0) || self.node_limit == 0 {
            return Err(SolveError::BadOptions("limits must be positive"));
        }
        if !(self.rel_gap >= 0.0) || !(self.abs_gap >= 0.0) {
            return Err(SolveError::BadOptions("gaps must be non-negative"));
        }
        if self.cutoff.is_some_and(f64::is_nan) {
            return Err(SolveError::BadOptions("cutoff is NaN"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("the LP relaxation is unbounded")]
    UnboundedRelaxation,
    #[error("invalid options: {0}")]
    BadOptions(&'static str),
    #[error("{found} binaries exceed the enumeration cap of {cap}")]
    TooManyBinaries { found: usize, cap: usize },
    #[error("knapsack table of {cells} cells exceeds the cap of {cap}")]
    CapacityOverflow { cells: u128, cap: usize },
    #[error("weights and values differ in length")]
    LengthMismatch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub best_solution: Option<Solution>,
    /// Bound on the optimum in the instance's sense.
    pub best_bound: f64,
    pub status: SolutionStatus,
    pub nodes: usize,
    pub wall_time: f64,
    /// `(seconds since start, objective)` for every incumbent improvement.
    pub incumbent_log: Vec<(f64, f64)>,
    pub lp_iterations: usize,
}

impl SolveReport {
    pub fn objective(&self) -> Option<f64> {
        self.best_solution.as_ref().map(|s| s.objective)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeAction {
    PrunedBound,
    PrunedCutoff,
    Infeasible,
    Integral,
    Branched { variable: usize },
}

/// Emitted once per processed node when tracing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeEvent {
    pub node: usize,
    pub depth: usize,
    /// LP bound of the node (minimization sense), or the parent bound when
    /// the node was pruned before solving.
    pub bound: f64,
    pub action: NodeAction,
    /// Global lower bound after processing (minimization sense).
    pub global_bound: f64,
    /// Incumbent objective (minimization sense), `INFINITY` when none.
    pub incumbent: f64,
}

#[derive(Debug, Clone)]
struct Node {
    id: usize,
    depth: usize,
    bound: f64,
    fixing: Vec<i8>,
}

struct HeapNode(Node);

impl PartialEq for HeapNode {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for HeapNode {}

impl PartialOrd for HeapNode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapNode {
    // max-heap: smaller bound first, then older node
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.bound.total_cmp(&self.0.bound).then_with(|| other.0.id.cmp(&self.0.id))
    }
}

enum Frontier {
    BestBound(BinaryHeap<HeapNode>),
    DepthFirst(Vec<Node>),
}

impl Frontier {
    fn push(&mut self, node: Node) {
        match self {
            Frontier::BestBound(h) => h.push(HeapNode(node)),
            Frontier::DepthFirst(s) => s.push(node),
        }
    }

    fn pop(&mut self) -> Option<Node> {
        match self {
            Frontier::BestBound(h) => h.pop().map(|n| n.0),
            Frontier::DepthFirst(s) => s.pop(),
        }
    }

    fn min_bound(&self) -> f64 {
        match self {
            Frontier::BestBound(h) => h.peek().map_or(f64::INFINITY, |n| n.0.bound),
            Frontier::DepthFirst(s) => s.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min),
        }
    }
}

struct Search<'a> {
    instance: &'a MipInstance,
    cuts: &'a [LinearCut],
    options: &'a SolveOptions,
    clock: &'a dyn Clock,
    start: f64,
    incumbent: Option<(f64, Vec<f64>)>,
    log: Vec<(f64, f64)>,
    factor: f64,
}

impl Search<'_> {
    fn incumbent_value(&self) -> f64 {
        self.incumbent.as_ref().map_or(f64::INFINITY, |(v, _)| *v)
    }

    /// Bound at or above which a node is pruned, and whether that level is
    /// set by the cutoff rather than the incumbent.
    fn prune_level(&self) -> (f64, bool) {
        let inc = self.incumbent_value();
        let by_incumbent = if inc.is_finite() { inc - self.options.abs_gap.max(self.options.rel_gap * math::abs(inc)) } else { inc };
        match self.options.cutoff {
            Some(c) if c - self.options.abs_gap < by_incumbent => (c - self.options.abs_gap, true),
            _ => (by_incumbent, false),
        }
    }

    /// Offers a point; returns `true` when it became the incumbent.
    fn offer(&mut self, values: &[f64]) -> bool {
        let sol = Solution::from_point(self.instance, values.to_vec(), SolutionStatus::Feasible);
        let Ok(report) = self.instance.check_feasible_with_cuts(&sol.values, self.cuts, FEASIBILITY_TOL) else {
            return false;
        };
        if !report.is_feasible() {
            return false;
        }
        let nb = self.instance.num_binary;
        if sol.values[nb..].iter().enumerate().any(|(k, &v)| {
            let (lo, hi) = self.instance.continuous_bounds[k];
            v < lo - FEASIBILITY_TOL || v > hi + FEASIBILITY_TOL
        }) {
            return false;
        }
        let value = self.factor * sol.objective;
        if value >= self.incumbent_value() {
            return false;
        }
        if let Some(c) = self.options.cutoff {
            if value >= c - self.options.abs_gap {
                return false;
            }
        }
        self.log.push((self.clock.now() - self.start, sol.objective));
        self.incumbent = Some((value, sol.values));
        true
    }
}

/// Branch-and-bound with an injected clock.
pub fn solve_mip_with_clock(instance: &MipInstance, cuts: &[LinearCut], options: &SolveOptions, clock: &dyn Clock) -> Result<SolveReport, SolveError> {
    solve_mip_traced(instance, cuts, options, clock, None)
}

/// Branch-and-bound using the wall clock.
#[cfg(feature = "std")]
pub fn solve_mip(instance: &MipInstance, cuts: &[LinearCut], options: &SolveOptions) -> Result<SolveReport, SolveError> {
    solve_mip_with_clock(instance, cuts, options, &crate::clock::StdClock::new())
}

/// Branch-and-bound that reports every processed node to `on_node`.
pub fn solve_mip_traced(
    instance: &MipInstance,
    cuts: &[LinearCut],
    options: &SolveOptions,
    clock: &dyn Clock,
    mut on_node: Option<&mut dyn FnMut(&NodeEvent)>,
) -> Result<SolveReport, SolveError> {
    options.validate()?;
    let mut lp = LpProblem::relaxation(instance, cuts)?;
    let nb = instance.num_binary;
    let mut search = Search {
        instance,
        cuts,
        options,
        clock,
        start: clock.now(),
        incumbent: None,
        log: Vec::new(),
        factor: instance.sense.to_min_factor(),
    };
    let mut frontier = match options.node_order {
        NodeOrder::BestBound => Frontier::BestBound(BinaryHeap::new()),
        NodeOrder::DepthFirst => Frontier::DepthFirst(Vec::new()),
    };
    frontier.push(Node { id: 0, depth: 0, bound: f64::NEG_INFINITY, fixing: vec![-1; nb] });
    let mut next_id = 1usize;
    let mut nodes = 0usize;
    let mut lp_iterations = 0usize;
    let mut cut_off_any = false;
    let mut limited = false;
    let mut pending: Option<Node> = None;

    while let Some(node) = pending.take().or_else(|| frontier.pop()) {
        if nodes >= options.node_limit || clock.now() - search.start >= options.time_limit {
            frontier.push(node);
            limited = true;
            break;
        }
        nodes += 1;
        let mut emit = |search: &Search<'_>, frontier: &Frontier, bound: f64, action: NodeAction| {
            if let Some(cb) = on_node.as_mut() {
                let inc = search.incumbent_value();
                let global = frontier.min_bound().min(inc).min(if matches!(action, NodeAction::Branched { .. }) { bound } else { f64::INFINITY });
                cb(&NodeEvent { node: node.id, depth: node.depth, bound, action, global_bound: global, incumbent: inc });
            }
        };

        let (level, is_cutoff) = search.prune_level();
        if node.bound >= level {
            cut_off_any |= is_cutoff;
            emit(&search, &frontier, node.bound, if is_cutoff { NodeAction::PrunedCutoff } else { NodeAction::PrunedBound });
            continue;
        }
        for (j, &fix) in node.fixing.iter().enumerate() {
            lp.lower[j] = if fix == 1 { 1.0 } else { 0.0 };
            lp.upper[j] = if fix == 0 { 0.0 } else { 1.0 };
        }
        let sol = lp::simplex_problem(&lp, &options.simplex)?;
        lp_iterations += sol.iterations;
        match sol.status {
            LpStatus::Infeasible => {
                emit(&search, &frontier, node.bound, NodeAction::Infeasible);
                continue;
            }
            LpStatus::Unbounded => return Err(SolveError::UnboundedRelaxation),
            LpStatus::IterationLimit => {
                frontier.push(node);
                limited = true;
                break;
            }
            LpStatus::Optimal => {}
        }
        let bound = search.factor * sol.objective;
        let (level, is_cutoff) = search.prune_level();
        if bound >= level {
            cut_off_any |= is_cutoff;
            emit(&search, &frontier, bound, if is_cutoff { NodeAction::PrunedCutoff } else { NodeAction::PrunedBound });
            continue;
        }
        let x = sol.primal;
        if instance.is_binary_integral(&x, INTEGRALITY_TOL) {
            search.offer(&x);
            emit(&search, &frontier, bound, NodeAction::Integral);
            continue;
        }
        let mut rounded = x.clone();
        for v in &mut rounded[..nb] {
            *v = math::round(*v);
        }
        search.offer(&rounded);

        let BranchRule::MostFractional = options.branch_rule;
        let mut branch = 0usize;
        let mut best = -1.0;
        for (j, &v) in x[..nb].iter().enumerate() {
            let frac = (v - math::floor(v)).min(math::ceil(v) - v);
            if frac > INTEGRALITY_TOL && frac > best {
                best = frac;
                branch = j;
            }
        }
        emit(&search, &frontier, bound, NodeAction::Branched { variable: branch });
        let prefer_up = x[branch] >= 0.5;
        let mut children = [0i8, 1i8].map(|v| {
            let mut fixing = node.fixing.clone();
            fixing[branch] = v;
            fixing
        });
        if prefer_up {
            children.swap(0, 1);
        }
        // children[0] is explored first in depth-first order
        let [first, second] = children;
        let first = Node { id: next_id, depth: node.depth + 1, bound, fixing: first };
        let second = Node { id: next_id + 1, depth: node.depth + 1, bound, fixing: second };
        next_id += 2;
        match options.node_order {
            NodeOrder::DepthFirst => {
                frontier.push(second);
                pending = Some(first);
            }
            NodeOrder::BestBound => {
                frontier.push(first);
                frontier.push(second);
            }
        }
    }
    if let Some(node) = pending {
        frontier.push(node);
    }

    let wall_time = clock.now() - search.start;
    let factor = search.factor;
    let open_bound = frontier.min_bound();
    let (status, best_bound) = match (&search.incumbent, limited) {
        (Some((v, _)), false) => (SolutionStatus::Optimal, *v),
        (Some((v, _)), true) => (SolutionStatus::Feasible, open_bound.min(*v)),
        (None, true) => (SolutionStatus::Limit, open_bound),
        (None, false) if cut_off_any => (SolutionStatus::Cutoff, options.cutoff.unwrap_or(f64::INFINITY)),
        (None, false) => (SolutionStatus::Infeasible, f64::INFINITY),
    };
    let best_solution = search.incumbent.take().map(|(_, values)| Solution::from_point(instance, values, status));
    Ok(SolveReport {
        best_solution,
        best_bound: factor * best_bound,
        status,
        nodes,
        wall_time,
        incumbent_log: search.log,
        lp_iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::FrozenClock;
    use crate::model::{ObjectiveSense, Row, RowSense};

    fn knapsack(weights: &[f64], values: &[f64], cap: f64) -> MipInstance {
        let n = weights.len();
        MipInstance::binary(
            "knap",
            ObjectiveSense::Maximize,
            n,
            values.iter().copied().enumerate().collect(),
            vec![Row::new(weights.iter().copied().enumerate().collect(), RowSense::Le, cap)],
        )
    }

    #[test]
    fn zero_cut_closes_at_root() {
        let inst = knapsack(&[2.0, 3.0, 4.0], &[3.0, 4.0, 5.0], 5.0);
        let cut = LinearCut::new(vec![(0, 1.0), (1, 1.0), (2, 1.0)], RowSense::Le, 0.0, "none");
        let rep = solve_mip_with_clock(&inst, &[cut], &SolveOptions::default(), &FrozenClock).unwrap();
        assert_eq!(rep.status, SolutionStatus::Optimal);
        assert_eq!(rep.nodes, 1);
        assert_eq!(rep.best_solution.unwrap().values, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn cutoff_below_optimum_reports_cutoff() {
        let inst = knapsack(&[2.0, 3.0, 4.0], &[3.0, 4.0, 5.0], 5.0);
        // optimum is 7; asking for strictly better than 7 (min sense: < -7)
        let opts = SolveOptions::default().with_objective_cutoff(&inst, 7.0);
        let rep = solve_mip_with_clock(&inst, &[], &opts, &FrozenClock).unwrap();
        assert_eq!(rep.status, SolutionStatus::Cutoff);
        assert!(rep.best_solution.is_none());
    }

    #[test]
    fn node_limit_is_a_status() {
        let w: Vec<f64> = (0..12).map(|i| 3.0 + (i * 7 % 11) as f64).collect();
        let v: Vec<f64> = (0..12).map(|i| 5.0 + (i * 5 % 13) as f64).collect();
        let inst = knapsack(&w, &v, 30.5);
        let opts = SolveOptions { node_limit: 1, ..SolveOptions::exact() };
        let rep = solve_mip_with_clock(&inst, &[], &opts, &FrozenClock).unwrap();
        assert!(matches!(rep.status, SolutionStatus::Feasible | SolutionStatus::Limit | SolutionStatus::Optimal));
        assert_eq!(rep.nodes, 1);
    }

    #[test]
    fn infeasible_instance() {
        let inst = MipInstance::binary(
            "inf",
            ObjectiveSense::Minimize,
            2,
            vec![(0, 1.0)],
            vec![Row::new(vec![(0, 1.0), (1, 1.0)], RowSense::Ge, 3.0)],
        );
        let rep = solve_mip_with_clock(&inst, &[], &SolveOptions::default(), &FrozenClock).unwrap();
        assert_eq!(rep.status, SolutionStatus::Infeasible);
    }

    #[test]
    fn bad_options_are_rejected() {
        let inst = knapsack(&[1.0], &[1.0], 1.0);
        let opts = SolveOptions { rel_gap: -1.0, ..SolveOptions::default() };
        assert!(matches!(solve_mip_with_clock(&inst, &[], &opts, &FrozenClock), Err(SolveError::BadOptions(_))));
    }
}

//! Exact oracles used to check the solver: full enumeration and a 0/1
//! knapsack dynamic program.

use alloc::vec;
use alloc::vec::Vec;

use super::SolveError;
use crate::math;
use crate::lp::{self, LpProblem, LpStatus, SimplexOptions};
use crate::model::{LinearCut, MipInstance, Row, RowSense, Solution, SolutionStatus, FEASIBILITY_TOL};

pub const BRUTE_FORCE_MAX_BINARIES: usize = 24;
/// Maximum number of cells in the `items × (capacity + 1)` DP table.
pub const DP_TABLE_CAP: usize = 1 << 26;

fn row_ok(row: &Row, activity: f64) -> bool {
    match row.sense {
        RowSense::Le => activity - row.rhs <= FEASIBILITY_TOL,
        RowSense::Ge => row.rhs - activity <= FEASIBILITY_TOL,
        RowSense::Eq => math::abs(activity - row.rhs) <= FEASIBILITY_TOL,
    }
}

/// Exact optimum by enumerating every binary assignment.
///
/// Pure-binary instances walk the assignments in Gray-code order with
/// incremental row activities; every candidate is re-verified from scratch
/// before it is kept. Mixed instances solve the continuous LP for each
/// assignment.
pub fn brute_force(instance: &MipInstance, cuts: &[LinearCut]) -> Result<Solution, SolveError> {
    instance.validate()?;
    for cut in cuts {
        cut.validate(instance.num_vars())?;
    }
    let nb = instance.num_binary;
    if nb > BRUTE_FORCE_MAX_BINARIES {
        return Err(SolveError::TooManyBinaries { found: nb, cap: BRUTE_FORCE_MAX_BINARIES });
    }
    if instance.num_continuous > 0 {
        return brute_force_mixed(instance, cuts);
    }
    let rows = instance.rows_with_cuts(cuts);
    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nb];
    for (i, row) in rows.iter().enumerate() {
        for &(j, a) in &row.coefficients {
            columns[j].push((i, a));
        }
    }
    let obj = instance.objective_dense();
    let factor = instance.sense.to_min_factor();

    let mut values = vec![0.0; nb];
    let mut activity = vec![0.0; rows.len()];
    let mut ok: Vec<bool> = rows.iter().map(|r| row_ok(r, 0.0)).collect();
    let mut violated = ok.iter().filter(|&&b| !b).count();
    let mut objective = 0.0;
    let mut best: Option<(f64, Vec<f64>)> = None;

    let consider = |values: &[f64], objective: f64, best: &mut Option<(f64, Vec<f64>)>| {
        let incumbent = best.as_ref().map_or(f64::INFINITY, |(b, _)| *b);
        if factor * objective > incumbent + 1e-7 {
            return;
        }
        let exact = factor * instance.objective_value(values);
        if exact >= incumbent {
            return;
        }
        let report = instance.check_feasible_with_cuts(values, cuts, FEASIBILITY_TOL).expect("length checked");
        if report.is_feasible() {
            *best = Some((exact, values.to_vec()));
        }
    };
    if violated == 0 {
        consider(&values, objective, &mut best);
    }
    for k in 1u64..(1u64 << nb) {
        let j = k.trailing_zeros() as usize;
        let delta = if values[j] == 0.0 { 1.0 } else { -1.0 };
        values[j] += delta;
        objective += delta * obj[j];
        for &(i, a) in &columns[j] {
            activity[i] += delta * a;
            let now = row_ok(&rows[i], activity[i]);
            if now != ok[i] {
                if now {
                    violated -= 1;
                } else {
                    violated += 1;
                }
                ok[i] = now;
            }
        }
        if violated == 0 {
            consider(&values, objective, &mut best);
        }
    }
    Ok(match best {
        Some((_, values)) => Solution::from_point(instance, values, SolutionStatus::Optimal),
        None => Solution::without_point(SolutionStatus::Infeasible),
    })
}

fn brute_force_mixed(instance: &MipInstance, cuts: &[LinearCut]) -> Result<Solution, SolveError> {
    let nb = instance.num_binary;
    let mut lp = LpProblem::relaxation(instance, cuts)?;
    let opts = SimplexOptions::default();
    let factor = instance.sense.to_min_factor();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 0u64..(1u64 << nb) {
        for j in 0..nb {
            let v = (mask >> j & 1) as f64;
            lp.lower[j] = v;
            lp.upper[j] = v;
        }
        let sol = lp::simplex_problem(&lp, &opts)?;
        match sol.status {
            LpStatus::Optimal => {
                let value = factor * sol.objective;
                if best.as_ref().is_none_or(|(b, _)| value < *b) {
                    best = Some((value, sol.primal));
                }
            }
            LpStatus::Infeasible => {}
            LpStatus::Unbounded => return Err(SolveError::UnboundedRelaxation),
            LpStatus::IterationLimit => return Err(SolveError::Lp(lp::LpError::Numerical("iteration limit in oracle"))),
        }
    }
    Ok(match best {
        Some((_, values)) => Solution::from_point(instance, values, SolutionStatus::Optimal),
        None => Solution::without_point(SolutionStatus::Infeasible),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DpKnapsack {
    pub value: u64,
    /// Selected item indices, ascending.
    pub items: Vec<usize>,
}

/// Exact 0/1 knapsack over integer data.
pub fn dp_knapsack(weights: &[u64], values: &[u64], capacity: u64) -> Result<DpKnapsack, SolveError> {
    if weights.len() != values.len() {
        return Err(SolveError::LengthMismatch);
    }
    let n = weights.len();
    let cells = (n as u128) * (capacity as u128 + 1);
    if cells > DP_TABLE_CAP as u128 {
        return Err(SolveError::CapacityOverflow { cells, cap: DP_TABLE_CAP });
    }
    let cap = capacity as usize;
    let mut best = vec![0u64; cap + 1];
    let mut take = vec![false; n * (cap + 1)];
    for i in 0..n {
        let w = weights[i];
        if w > capacity {
            continue;
        }
        let w = w as usize;
        for c in (w..=cap).rev() {
            let cand = best[c - w] + values[i];
            if cand > best[c] {
                best[c] = cand;
                take[i * (cap + 1) + c] = true;
            }
        }
    }
    let mut items = Vec::new();
    let mut c = cap;
    for i in (0..n).rev() {
        if take[i * (cap + 1) + c] {
            items.push(i);
            c -= weights[i] as usize;
        }
    }
    items.reverse();
    Ok(DpKnapsack { value: best[cap], items })
}

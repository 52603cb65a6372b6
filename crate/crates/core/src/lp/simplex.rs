//! Bounded-variable revised simplex.
//!
//! Every row `a·x (sense) b` gets a slack `s` with `a·x + s = b`; the sense is
//! encoded in the slack bounds (`≤`: `[0, ∞)`, `≥`: `(-∞, 0]`, `=`: `[0, 0]`).
//! Rows whose slack cannot absorb the initial residual receive an artificial
//! column and phase 1 minimizes the sum of artificials. The basis inverse is a
//! dense LU plus a product-form eta file, refactorized every
//! `refactor_interval` pivots. Pricing is Dantzig; after
//! `bland_after_degenerate` degenerate pivots Bland's rule takes over.

use alloc::vec;
use alloc::vec::Vec;

use super::{LpBackend, LpError, LpProblem, LpSolution, LpStatus};
use crate::linalg::{Dense, Lu};
use crate::math;
use crate::model::RowSense;

const PIVOT_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-9;
const PRIMAL_TOL: f64 = 1e-9;
const DEGENERATE_STEP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexOptions {
    pub max_iterations: usize,
    pub refactor_interval: usize,
    pub bland_after_degenerate: usize,
    /// Record every iterate in [`LpSolution::trace`].
    pub trace: bool,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self { max_iterations: 50_000, refactor_interval: 50, bland_after_degenerate: 1000, trace: false }
    }
}

/// One simplex iterate, as exposed by tracing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexIterate {
    pub iteration: usize,
    pub phase: u8,
    /// Minimization objective of the original costs at this iterate.
    pub objective: f64,
    /// Sum of artificial values (zero throughout phase 2).
    pub infeasibility: f64,
    pub entering: usize,
    pub leaving: Option<usize>,
    pub step: f64,
    pub bland: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Basic,
    AtLower,
    AtUpper,
    /// Free nonbasic column resting at zero.
    Free,
}

struct Eta {
    row: usize,
    column: Vec<f64>,
}

struct Simplex<'a> {
    lp: &'a LpProblem,
    opts: &'a SimplexOptions,
    m: usize,
    n: usize,
    /// Column-major `m × total` matrix.
    cols: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    x: Vec<f64>,
    state: Vec<State>,
    basis: Vec<usize>,
    rhs: Vec<f64>,
    lu: Lu,
    etas: Vec<Eta>,
    iterations: usize,
    degenerate: usize,
    bland: bool,
    trace: Vec<SimplexIterate>,
}

enum PhaseEnd {
    Optimal,
    Unbounded,
    IterationLimit,
}

impl<'a> Simplex<'a> {
    fn new(lp: &'a LpProblem, opts: &'a SimplexOptions) -> Result<Self, LpError> {
        let m = lp.rows.len();
        let n = lp.num_cols();
        let mut cols = vec![0.0; m * (n + m)];
        for (i, row) in lp.rows.iter().enumerate() {
            for &(j, a) in &row.coefficients {
                cols[j * m + i] += a;
            }
            cols[(n + i) * m + i] = 1.0;
        }
        let mut lower = lp.lower.clone();
        let mut upper = lp.upper.clone();
        let mut x = Vec::with_capacity(n + m);
        let mut state = Vec::with_capacity(n + m);
        for j in 0..n {
            let (lo, hi) = (lower[j], upper[j]);
            if lo.is_finite() {
                x.push(lo);
                state.push(State::AtLower);
            } else if hi.is_finite() {
                x.push(hi);
                state.push(State::AtUpper);
            } else {
                x.push(0.0);
                state.push(State::Free);
            }
        }
        let rhs: Vec<f64> = lp.rows.iter().map(|r| r.rhs).collect();
        let mut residual = rhs.clone();
        for j in 0..n {
            if x[j] != 0.0 {
                for i in 0..m {
                    residual[i] -= cols[j * m + i] * x[j];
                }
            }
        }
        let mut basis = Vec::with_capacity(m);
        let mut artificials = Vec::new();
        for (i, row) in lp.rows.iter().enumerate() {
            let (lo, hi) = match row.sense {
                RowSense::Le => (0.0, f64::INFINITY),
                RowSense::Ge => (f64::NEG_INFINITY, 0.0),
                RowSense::Eq => (0.0, 0.0),
            };
            lower.push(lo);
            upper.push(hi);
            let r = residual[i];
            if r >= lo && r <= hi {
                x.push(r);
                state.push(State::Basic);
                basis.push(n + i);
            } else {
                let s = r.clamp(lo, hi);
                x.push(s);
                state.push(if s == lo { State::AtLower } else { State::AtUpper });
                artificials.push((i, r - s));
                basis.push(usize::MAX);
            }
        }
        for &(i, gap) in &artificials {
            let j = x.len();
            let mut col = vec![0.0; m];
            col[i] = if gap > 0.0 { 1.0 } else { -1.0 };
            cols.extend_from_slice(&col);
            lower.push(0.0);
            upper.push(f64::INFINITY);
            x.push(math::abs(gap));
            state.push(State::Basic);
            basis[i] = j;
        }
        let lu = Self::factor_basis(&cols, m, &basis).ok_or(LpError::Numerical("singular initial basis"))?;
        Ok(Self {
            lp,
            opts,
            m,
            n,
            cols,
            lower,
            upper,
            x,
            state,
            basis,
            rhs,
            lu,
            etas: Vec::new(),
            iterations: 0,
            degenerate: 0,
            bland: false,
            trace: Vec::new(),
        })
    }

    fn total(&self) -> usize {
        self.x.len()
    }

    fn col(&self, j: usize) -> &[f64] {
        &self.cols[j * self.m..(j + 1) * self.m]
    }

    fn factor_basis(cols: &[f64], m: usize, basis: &[usize]) -> Option<Lu> {
        let mut b = Dense::zeros(m);
        for (k, &j) in basis.iter().enumerate() {
            for i in 0..m {
                *b.at_mut(i, k) = cols[j * m + i];
            }
        }
        Lu::factor(b, 1e-13)
    }

    fn refactor(&mut self) -> Result<(), LpError> {
        self.lu = Self::factor_basis(&self.cols, self.m, &self.basis).ok_or(LpError::Numerical("singular basis"))?;
        self.etas.clear();
        // x_B = B⁻¹ (b − N x_N)
        let mut r = self.rhs.clone();
        for j in 0..self.total() {
            if self.state[j] != State::Basic && self.x[j] != 0.0 {
                let xj = self.x[j];
                for (ri, a) in r.iter_mut().zip(self.col(j)) {
                    *ri -= a * xj;
                }
            }
        }
        self.ftran(&mut r);
        for (k, &j) in self.basis.iter().enumerate() {
            self.x[j] = r[k];
        }
        Ok(())
    }

    fn ftran(&self, v: &mut [f64]) {
        self.lu.solve(v);
        for eta in &self.etas {
            let vr = v[eta.row] / eta.column[eta.row];
            if vr != 0.0 {
                for (i, w) in eta.column.iter().enumerate() {
                    if i != eta.row {
                        v[i] -= w * vr;
                    }
                }
            }
            v[eta.row] = vr;
        }
    }

    fn btran(&self, u: &mut [f64]) {
        for eta in self.etas.iter().rev() {
            let mut s = u[eta.row];
            for (i, w) in eta.column.iter().enumerate() {
                if i != eta.row {
                    s -= u[i] * w;
                }
            }
            u[eta.row] = s / eta.column[eta.row];
        }
        self.lu.solve_transpose(u);
    }

    fn duals(&self, cost: &[f64]) -> Vec<f64> {
        let mut y: Vec<f64> = self.basis.iter().map(|&j| cost[j]).collect();
        self.btran(&mut y);
        y
    }

    fn reduced_cost(&self, cost: &[f64], y: &[f64], j: usize) -> f64 {
        cost[j] - self.col(j).iter().zip(y).map(|(a, yi)| a * yi).sum::<f64>()
    }

    /// Entering column and its direction (+1 increase, -1 decrease).
    fn price(&self, cost: &[f64], y: &[f64]) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.total() {
            let st = self.state[j];
            if st == State::Basic || self.lower[j] == self.upper[j] {
                continue;
            }
            let d = self.reduced_cost(cost, y, j);
            let dir = match st {
                State::AtLower if d < -DUAL_TOL => 1.0,
                State::AtUpper if d > DUAL_TOL => -1.0,
                State::Free if math::abs(d) > DUAL_TOL => {
                    if d < 0.0 {
                        1.0
                    } else {
                        -1.0
                    }
                }
                _ => continue,
            };
            if self.bland {
                return Some((j, dir));
            }
            let score = math::abs(d);
            if best.is_none_or(|(_, _, s)| score > s) {
                best = Some((j, dir, score));
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    fn objective_of(&self, cost: &[f64]) -> f64 {
        cost.iter().zip(&self.x).map(|(c, v)| c * v).sum()
    }

    fn run_phase(&mut self, cost: &[f64], phase: u8, original_cost: &[f64]) -> Result<PhaseEnd, LpError> {
        let mut since_refactor = 0usize;
        loop {
            if self.iterations >= self.opts.max_iterations {
                return Ok(PhaseEnd::IterationLimit);
            }
            if since_refactor >= self.opts.refactor_interval {
                self.refactor()?;
                since_refactor = 0;
            }
            let y = self.duals(cost);
            let Some((q, dir)) = self.price(cost, &y) else {
                return Ok(PhaseEnd::Optimal);
            };
            let mut w = self.col(q).to_vec();
            self.ftran(&mut w);

            // Harris two-pass ratio test.
            let mut bound_theta = f64::INFINITY;
            for (k, &j) in self.basis.iter().enumerate() {
                let delta = -dir * w[k];
                if delta < -PIVOT_TOL && self.lower[j].is_finite() {
                    let dist = (self.x[j] - self.lower[j]).max(0.0);
                    bound_theta = bound_theta.min((dist + PRIMAL_TOL) / -delta);
                } else if delta > PIVOT_TOL && self.upper[j].is_finite() {
                    let dist = (self.upper[j] - self.x[j]).max(0.0);
                    bound_theta = bound_theta.min((dist + PRIMAL_TOL) / delta);
                }
            }
            let mut leave: Option<(usize, f64, bool)> = None;
            if bound_theta.is_finite() {
                let mut best_mag = 0.0;
                for (k, &j) in self.basis.iter().enumerate() {
                    let delta = -dir * w[k];
                    let (dist, to_lower) = if delta < -PIVOT_TOL && self.lower[j].is_finite() {
                        ((self.x[j] - self.lower[j]).max(0.0), true)
                    } else if delta > PIVOT_TOL && self.upper[j].is_finite() {
                        ((self.upper[j] - self.x[j]).max(0.0), false)
                    } else {
                        continue;
                    };
                    let ratio = dist / math::abs(delta);
                    if ratio > bound_theta {
                        continue;
                    }
                    let take = match leave {
                        None => true,
                        Some((kk, r, _)) => {
                            if self.bland {
                                ratio < r - DEGENERATE_STEP || (ratio <= r + DEGENERATE_STEP && j < self.basis[kk])
                            } else {
                                math::abs(delta) > best_mag
                            }
                        }
                    };
                    if take {
                        best_mag = math::abs(delta);
                        leave = Some((k, ratio, to_lower));
                    }
                }
            }
            let flip = self.upper[q] - self.lower[q];
            let theta_leave = leave.map_or(f64::INFINITY, |(_, r, _)| r);
            if !flip.is_finite() && !theta_leave.is_finite() {
                return Ok(PhaseEnd::Unbounded);
            }
            self.iterations += 1;
            let (theta, leaving) = if flip <= theta_leave { (flip, None) } else { (theta_leave, leave) };

            self.x[q] += dir * theta;
            for (k, &j) in self.basis.iter().enumerate() {
                self.x[j] -= dir * theta * w[k];
            }
            if theta <= DEGENERATE_STEP {
                self.degenerate += 1;
                if self.degenerate >= self.opts.bland_after_degenerate {
                    self.bland = true;
                }
            }
            let leaving_var = match leaving {
                None => {
                    self.state[q] = if dir > 0.0 { State::AtUpper } else { State::AtLower };
                    self.x[q] = if dir > 0.0 { self.upper[q] } else { self.lower[q] };
                    None
                }
                Some((k, _, to_lower)) => {
                    let out = self.basis[k];
                    self.x[out] = if to_lower { self.lower[out] } else { self.upper[out] };
                    self.state[out] = if to_lower { State::AtLower } else { State::AtUpper };
                    self.state[q] = State::Basic;
                    self.basis[k] = q;
                    self.etas.push(Eta { row: k, column: w });
                    since_refactor += 1;
                    Some(out)
                }
            };
            if self.opts.trace {
                let infeasibility = (self.n + self.m..self.total()).map(|j| self.x[j]).sum();
                self.trace.push(SimplexIterate {
                    iteration: self.iterations,
                    phase,
                    objective: self.objective_of(original_cost),
                    infeasibility,
                    entering: q,
                    leaving: leaving_var,
                    step: theta,
                    bland: self.bland,
                });
            }
        }
    }
}

pub(super) fn solve(lp: &LpProblem, opts: &SimplexOptions) -> Result<LpSolution, LpError> {
    let mut sx = Simplex::new(lp, opts)?;
    let total = sx.total();
    let first_art = sx.n + sx.m;
    let mut phase2_cost = lp.cost.clone();
    phase2_cost.resize(total, 0.0);

    if total > first_art {
        let mut phase1_cost = vec![0.0; total];
        for c in &mut phase1_cost[first_art..] {
            *c = 1.0;
        }
        match sx.run_phase(&phase1_cost, 1, &phase2_cost)? {
            PhaseEnd::IterationLimit => {
                return Ok(finish(sx, LpStatus::IterationLimit, &phase2_cost));
            }
            PhaseEnd::Unbounded => return Err(LpError::Numerical("phase 1 unbounded")),
            PhaseEnd::Optimal => {}
        }
        sx.refactor()?;
        let scale = 1.0 + sx.rhs.iter().fold(0.0f64, |a, &b| a.max(math::abs(b)));
        let infeasibility: f64 = sx.x[first_art..].iter().sum();
        if infeasibility > 1e-8 * scale {
            return Ok(finish(sx, LpStatus::Infeasible, &phase2_cost));
        }
        for j in first_art..total {
            sx.upper[j] = 0.0;
            if sx.state[j] != State::Basic {
                sx.x[j] = 0.0;
                sx.state[j] = State::AtLower;
            }
        }
    }
    let status = match sx.run_phase(&phase2_cost, 2, &phase2_cost)? {
        PhaseEnd::Optimal => LpStatus::Optimal,
        PhaseEnd::Unbounded => LpStatus::Unbounded,
        PhaseEnd::IterationLimit => LpStatus::IterationLimit,
    };
    if status == LpStatus::Optimal {
        sx.refactor()?;
    }
    Ok(finish(sx, status, &phase2_cost))
}

fn finish(sx: Simplex<'_>, status: LpStatus, cost: &[f64]) -> LpSolution {
    let mut sol = LpSolution::empty(status, LpBackend::Simplex, sx.iterations);
    if status == LpStatus::Optimal {
        let dual = sx.duals(cost);
        let mut primal = sx.x[..sx.n].to_vec();
        for (v, (&lo, &hi)) in primal.iter_mut().zip(sx.lp.lower.iter().zip(&sx.lp.upper)) {
            *v = v.clamp(lo, hi);
        }
        sol.objective = sx.lp.sense_factor * sx.lp.min_objective(&primal);
        sol.dual = dual.into_iter().map(|y| sx.lp.sense_factor * y).collect();
        sol.primal = primal;
    }
    sol.trace = sx.trace;
    sol
}

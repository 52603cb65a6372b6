//! Dense LP engines for relaxation bounds and fractional root solutions.
//!
//! Both backends consume an [`LpProblem`], a minimization over bounded
//! columns with sparse rows. [`solve_simplex`] and [`solve_ipm`] build one
//! from a [`MipInstance`] with binaries relaxed to `[0, 1]` and report the
//! objective in the instance's own sense.

mod ipm;
mod knapsack;
mod simplex;

use alloc::vec::Vec;

use thiserror::Error;

use crate::model::{LinearCut, MipInstance, ModelError, Row};

pub use ipm::IpmOptions;
pub use knapsack::{fractional_knapsack, FractionalKnapsack, KnapsackError};
pub use simplex::{SimplexIterate, SimplexOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpBackend {
    Simplex,
    Ipm,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("numerical failure: {0}")]
    Numerical(&'static str),
}

/// `min cost·x` subject to `rows` and `lower ≤ x ≤ upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub cost: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<Row>,
    /// Multiplies the minimization objective back into the user's sense.
    pub sense_factor: f64,
}

impl LpProblem {
    /// Relaxation of `instance` plus `cuts`; binaries get `[0, 1]`.
    pub fn relaxation(instance: &MipInstance, cuts: &[LinearCut]) -> Result<Self, ModelError> {
        instance.validate()?;
        for cut in cuts {
            cut.validate(instance.num_vars())?;
        }
        let f = instance.sense.to_min_factor();
        let cost = instance.objective_dense().into_iter().map(|c| f * c).collect();
        let (lower, upper) = (0..instance.num_vars()).map(|j| instance.bounds(j)).unzip();
        Ok(Self { cost, lower, upper, rows: instance.rows_with_cuts(cuts), sense_factor: f })
    }

    pub fn num_cols(&self) -> usize {
        self.cost.len()
    }

    pub fn min_objective(&self, x: &[f64]) -> f64 {
        self.cost.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest bound or row violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let bound = x
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&v, (&lo, &hi))| (lo - v).max(v - hi).max(0.0))
            .fold(0.0, f64::max);
        self.rows.iter().map(|r| r.violation(x)).fold(bound, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    /// Column values; empty unless `status` is `Optimal`.
    pub primal: Vec<f64>,
    /// Row multipliers of the minimization form, one per row (cuts last).
    pub dual: Vec<f64>,
    /// Objective in the user's sense.
    pub objective: f64,
    pub status: LpStatus,
    pub backend: LpBackend,
    pub iterations: usize,
    /// Per-iteration records, filled only when tracing is enabled.
    pub trace: Vec<SimplexIterate>,
}

impl LpSolution {
    pub(crate) fn empty(status: LpStatus, backend: LpBackend, iterations: usize) -> Self {
        Self {
            primal: Vec::new(),
            dual: Vec::new(),
            objective: f64::NAN,
            status,
            backend,
            iterations,
            trace: Vec::new(),
        }
    }
}

/// Bounded-variable revised simplex on the relaxation of `instance + cuts`.
pub fn solve_simplex(instance: &MipInstance, cuts: &[LinearCut]) -> Result<LpSolution, LpError> {
    solve_simplex_with(instance, cuts, &SimplexOptions::default())
}

pub fn solve_simplex_with(instance: &MipInstance, cuts: &[LinearCut], options: &SimplexOptions) -> Result<LpSolution, LpError> {
    let lp = LpProblem::relaxation(instance, cuts)?;
    simplex::solve(&lp, options)
}

/// Mehrotra predictor-corrector on the relaxation of `instance + cuts`.
pub fn solve_ipm(instance: &MipInstance, cuts: &[LinearCut]) -> Result<LpSolution, LpError> {
    solve_ipm_with(instance, cuts, &IpmOptions::default())
}

pub fn solve_ipm_with(instance: &MipInstance, cuts: &[LinearCut], options: &IpmOptions) -> Result<LpSolution, LpError> {
    let lp = LpProblem::relaxation(instance, cuts)?;
    ipm::solve(&lp, options)
}

/// Solves an already-built problem with the simplex backend.
pub fn simplex_problem(lp: &LpProblem, options: &SimplexOptions) -> Result<LpSolution, LpError> {
    simplex::solve(lp, options)
}

/// Solves an already-built problem with the interior-point backend.
pub fn ipm_problem(lp: &LpProblem, options: &IpmOptions) -> Result<LpSolution, LpError> {
    ipm::solve(lp, options)
}

//! Problem and solution data model.
//!
//! Variables are laid out with the `num_binary` binaries first, followed by
//! `num_continuous` continuous variables. Binaries are implicitly bounded in
//! `[0, 1]`; continuous variables carry explicit (possibly infinite) bounds.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::math;

/// Default absolute tolerance on row residuals.
pub const FEASIBILITY_TOL: f64 = 1e-6;
/// Default distance to `{0, 1}` accepted as integral.
pub const INTEGRALITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ObjectiveSense {
    Minimize,
    Maximize,
}

impl ObjectiveSense {
    /// Factor that turns the user objective into a minimization objective.
    pub fn to_min_factor(self) -> f64 {
        match self {
            ObjectiveSense::Minimize => 1.0,
            ObjectiveSense::Maximize => -1.0,
        }
    }

    /// `true` when `a` is strictly better than `b` in this sense.
    pub fn better(self, a: f64, b: f64) -> bool {
        match self {
            ObjectiveSense::Minimize => a < b,
            ObjectiveSense::Maximize => a > b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RowSense {
    Le,
    Eq,
    Ge,
}

impl RowSense {
    pub fn symbol(self) -> &'static str {
        match self {
            RowSense::Le => "<=",
            RowSense::Eq => "=",
            RowSense::Ge => ">=",
        }
    }
}

/// A sparse linear constraint `coefficients · x (sense) rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coefficients: Vec<(usize, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
}

impl Row {
    pub fn new(coefficients: Vec<(usize, f64)>, sense: RowSense, rhs: f64) -> Self {
        Self { coefficients, sense, rhs }
    }

    pub fn activity(&self, values: &[f64]) -> f64 {
        self.coefficients.iter().map(|&(j, a)| a * values[j]).sum()
    }

    /// Amount by which `values` violates the row (0 when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.activity(values);
        match self.sense {
            RowSense::Le => (lhs - self.rhs).max(0.0),
            RowSense::Ge => (self.rhs - lhs).max(0.0),
            RowSense::Eq => math::abs(lhs - self.rhs),
        }
    }
}

/// A cut injected on top of an instance: branching hyperplanes, objective
/// cuts and so on.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearCut {
    pub coefficients: Vec<(usize, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
    pub label: String,
}

impl LinearCut {
    pub fn new(coefficients: Vec<(usize, f64)>, sense: RowSense, rhs: f64, label: impl Into<String>) -> Self {
        Self { coefficients, sense, rhs, label: label.into() }
    }

    pub fn as_row(&self) -> Row {
        Row::new(self.coefficients.clone(), self.sense, self.rhs)
    }

    pub fn validate(&self, num_vars: usize) -> Result<(), ModelError> {
        if self.coefficients.is_empty() {
            return Err(ModelError::EmptyCut { label: self.label.clone() });
        }
        if self.sense == RowSense::Eq {
            return Err(ModelError::EqualityCut { label: self.label.clone() });
        }
        if !self.rhs.is_finite() {
            return Err(ModelError::NonFinite { what: "cut rhs" });
        }
        check_sparse(&self.coefficients, num_vars, "cut")
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{what} references variable {index} but the instance has {num_vars} variables")]
    IndexOutOfRange { what: &'static str, index: usize, num_vars: usize },
    #[error("duplicate index {index} in {what}")]
    DuplicateIndex { what: &'static str, index: usize },
    #[error("row {row} has no coefficients")]
    EmptyRow { row: usize },
    #[error("cut `{label}` has no coefficients")]
    EmptyCut { label: String },
    #[error("cut `{label}` must be an inequality")]
    EqualityCut { label: String },
    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },
    #[error("continuous variable {index} has lower bound above upper bound")]
    InvertedBounds { index: usize },
    #[error("expected {expected} continuous bounds, found {found}")]
    BoundsLength { expected: usize, found: usize },
    #[error("value vector has length {found}, expected {expected}")]
    LengthMismatch { expected: usize, found: usize },
}

fn check_sparse(coefficients: &[(usize, f64)], num_vars: usize, what: &'static str) -> Result<(), ModelError> {
    let mut seen = vec![false; num_vars];
    for &(j, a) in coefficients {
        if j >= num_vars {
            return Err(ModelError::IndexOutOfRange { what, index: j, num_vars });
        }
        if seen[j] {
            return Err(ModelError::DuplicateIndex { what, index: j });
        }
        seen[j] = true;
        if !a.is_finite() {
            return Err(ModelError::NonFinite { what });
        }
    }
    Ok(())
}

/// A mixed-binary linear program.
#[derive(Debug, Clone, PartialEq)]
pub struct MipInstance {
    pub name: String,
    pub sense: ObjectiveSense,
    pub num_binary: usize,
    pub num_continuous: usize,
    /// Sparse objective over all `num_binary + num_continuous` variables.
    pub objective: Vec<(usize, f64)>,
    pub rows: Vec<Row>,
    /// `[lower, upper]` per continuous variable, infinities allowed.
    pub continuous_bounds: Vec<(f64, f64)>,
    /// The varying data of the family this instance belongs to.
    pub param_tag: Vec<f64>,
}

impl MipInstance {
    /// Pure-binary instance with no continuous variables.
    pub fn binary(name: impl Into<String>, sense: ObjectiveSense, num_binary: usize, objective: Vec<(usize, f64)>, rows: Vec<Row>) -> Self {
        Self {
            name: name.into(),
            sense,
            num_binary,
            num_continuous: 0,
            objective,
            rows,
            continuous_bounds: Vec::new(),
            param_tag: Vec::new(),
        }
    }

    pub fn with_param_tag(mut self, tag: Vec<f64>) -> Self {
        self.param_tag = tag;
        self
    }

    pub fn num_vars(&self) -> usize {
        self.num_binary + self.num_continuous
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let nv = self.num_vars();
        check_sparse(&self.objective, nv, "objective")?;
        for (r, row) in self.rows.iter().enumerate() {
            if row.coefficients.is_empty() {
                return Err(ModelError::EmptyRow { row: r });
            }
            check_sparse(&row.coefficients, nv, "row")?;
            if !row.rhs.is_finite() {
                return Err(ModelError::NonFinite { what: "row rhs" });
            }
        }
        if self.continuous_bounds.len() != self.num_continuous {
            return Err(ModelError::BoundsLength { expected: self.num_continuous, found: self.continuous_bounds.len() });
        }
        for (k, &(lo, hi)) in self.continuous_bounds.iter().enumerate() {
            if lo.is_nan() || hi.is_nan() || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(ModelError::NonFinite { what: "continuous bounds" });
            }
            if lo > hi {
                return Err(ModelError::InvertedBounds { index: self.num_binary + k });
            }
        }
        if self.param_tag.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::NonFinite { what: "param_tag" });
        }
        Ok(())
    }

    /// Bounds of variable `j` (binaries report `[0, 1]`).
    pub fn bounds(&self, j: usize) -> (f64, f64) {
        if j < self.num_binary {
            (0.0, 1.0)
        } else {
            self.continuous_bounds[j - self.num_binary]
        }
    }

    pub fn objective_dense(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.num_vars()];
        for &(j, v) in &self.objective {
            c[j] = v;
        }
        c
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().map(|&(j, c)| c * values[j]).sum()
    }

    /// Rows of the instance followed by `cuts` as plain rows.
    pub fn rows_with_cuts(&self, cuts: &[LinearCut]) -> Vec<Row> {
        let mut rows = self.rows.clone();
        rows.extend(cuts.iter().map(LinearCut::as_row));
        rows
    }

    /// Rows violated by `values` by more than `tol`. Bounds are not checked.
    pub fn check_feasible(&self, values: &[f64], tol: f64) -> Result<FeasibilityReport, ModelError> {
        self.check_feasible_with_cuts(values, &[], tol)
    }

    /// Like [`check_feasible`](Self::check_feasible); cut rows are numbered
    /// after the instance rows.
    pub fn check_feasible_with_cuts(&self, values: &[f64], cuts: &[LinearCut], tol: f64) -> Result<FeasibilityReport, ModelError> {
        if values.len() != self.num_vars() {
            return Err(ModelError::LengthMismatch { expected: self.num_vars(), found: values.len() });
        }
        let cut_rows: Vec<Row> = cuts.iter().map(LinearCut::as_row).collect();
        let violated = self
            .rows
            .iter()
            .chain(cut_rows.iter())
            .enumerate()
            .filter(|(_, row)| row.violation(values) > tol)
            .map(|(r, _)| r)
            .collect();
        Ok(FeasibilityReport { violated })
    }

    /// Binary values snapped to exact 0/1 when within `tol` of an integer.
    pub fn is_binary_integral(&self, values: &[f64], tol: f64) -> bool {
        values[..self.num_binary].iter().all(|&v| math::abs(v - math::round(v)) <= tol)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeasibilityReport {
    pub violated: Vec<usize>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violated.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolutionStatus {
    Optimal,
    Feasible,
    Infeasible,
    Cutoff,
    Limit,
}

impl SolutionStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolutionStatus::Optimal => "optimal",
            SolutionStatus::Feasible => "feasible",
            SolutionStatus::Infeasible => "infeasible",
            SolutionStatus::Cutoff => "cutoff",
            SolutionStatus::Limit => "limit",
        }
    }

    pub fn has_solution(self) -> bool {
        matches!(self, SolutionStatus::Optimal | SolutionStatus::Feasible)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub values: Vec<f64>,
    /// Objective in the instance's own sense.
    pub objective: f64,
    pub status: SolutionStatus,
}

impl Solution {
    pub fn without_point(status: SolutionStatus) -> Self {
        Self { values: Vec::new(), objective: f64::NAN, status }
    }

    /// Builds a solution from a point: binaries are snapped to exact 0/1 and
    /// the objective is recomputed from the snapped values.
    pub fn from_point(instance: &MipInstance, mut values: Vec<f64>, status: SolutionStatus) -> Self {
        for v in &mut values[..instance.num_binary] {
            *v = if *v >= 0.5 { 1.0 } else { 0.0 };
        }
        let objective = instance.objective_value(&values);
        Self { values, objective, status }
    }

    /// Binary part as booleans.
    pub fn binary_values(&self, num_binary: usize) -> Vec<bool> {
        self.values[..num_binary].iter().map(|&v| v >= 0.5).collect()
    }
}

//! The branching driver: solve the first region, then optionally the rest.

use alloc::vec::Vec;

use super::{build_hyperplanes_with_margin, make_partition, Calibration, HyperplaneMode, HyperplanePair, Margin, PmvbError, Region, DATA_FREE_TAU};
use crate::bnb::{solve_mip_with_clock, SolveOptions, SolveReport};
use crate::clock::Clock;
use crate::model::{MipInstance, SolutionStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PmvbMode {
    /// Solve only the region where both hyperplanes hold.
    Heuristic,
    /// Solve all regions; the result is a proven optimum when every region
    /// finishes within the limits.
    Exact,
}

/// Threshold, margin and intercept style used to build the hyperplanes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PmvbConfig {
    pub tau: f64,
    pub margin: Margin,
    pub hyperplanes: HyperplaneMode,
}

impl PmvbConfig {
    pub fn from_calibration(cal: &Calibration, hyperplanes: HyperplaneMode) -> Self {
        Self { tau: cal.tau_star, margin: Margin::Chebyshev { sigma: cal.sigma, delta: cal.delta }, hyperplanes }
    }

    /// Configuration without validation data: the variance is unknown, so
    /// the margin is a fraction of each set's size and the intercepts come
    /// from the probabilities themselves.
    pub fn data_free(slack: f64) -> Self {
        Self { tau: DATA_FREE_TAU, margin: Margin::SlackFraction(slack), hyperplanes: HyperplaneMode::Tightened }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionReport {
    pub region: Region,
    /// Cutoff handed to the solver, in the instance's sense.
    pub cutoff: Option<f64>,
    /// `None` when the region was empty by construction or not attempted
    /// because the limits ran out.
    pub report: Option<SolveReport>,
    pub skipped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PmvbReport {
    pub overall: SolveReport,
    pub regions: Vec<RegionReport>,
    pub hyperplanes: HyperplanePair,
}

impl PmvbReport {
    pub fn first_region(&self) -> &RegionReport {
        &self.regions[0]
    }
}

#[cfg(feature = "std")]
pub fn pmvb_solve(instance: &MipInstance, p: &[f64], config: &PmvbConfig, options: &SolveOptions, mode: PmvbMode) -> Result<PmvbReport, PmvbError> {
    pmvb_solve_with_clock(instance, p, config, options, mode, &crate::clock::StdClock::new())
}

/// Builds the hyperplanes from `p` and solves the induced regions.
///
/// Later regions are solved with the best objective found so far as a
/// non-strict cutoff, so they only report strictly better solutions. The
/// time and node limits in `options` are shared by all regions.
///
/// Statuses: in exact mode the overall status is `Optimal` (or
/// `Infeasible`) only when every region was exhausted. In heuristic mode a
/// solution is reported as `Feasible`, and an empty first region as `Limit`
/// since nothing is proven about the rest of the space.
pub fn pmvb_solve_with_clock(
    instance: &MipInstance,
    p: &[f64],
    config: &PmvbConfig,
    options: &SolveOptions,
    mode: PmvbMode,
    clock: &dyn Clock,
) -> Result<PmvbReport, PmvbError> {
    instance.validate().map_err(crate::bnb::SolveError::from)?;
    options.validate()?;
    if p.len() != instance.num_binary {
        return Err(PmvbError::PredictionLength { expected: instance.num_binary, found: p.len() });
    }
    let pair = build_hyperplanes_with_margin(p, config.tau, config.margin, config.hyperplanes)?;
    let partition = make_partition(pair.upper.as_ref(), pair.lower.as_ref());
    let factor = instance.sense.to_min_factor();
    let start = clock.now();

    let mut regions = Vec::with_capacity(partition.regions.len());
    let mut best: Option<crate::model::Solution> = None;
    let mut log = Vec::new();
    let mut nodes = 0usize;
    let mut lp_iterations = 0usize;
    let mut all_exhausted = true;
    // minimization-sense bound over unfinished regions
    let mut open_bound = f64::INFINITY;

    let count = if mode == PmvbMode::Heuristic { 1 } else { partition.regions.len() };
    for (k, region) in partition.regions.into_iter().enumerate() {
        if k >= count {
            break;
        }
        let best_min = best.as_ref().map(|s| factor * s.objective);
        let cutoff_min = match (best_min, options.cutoff) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        let cutoff = best_min.map(|v| factor * v);
        if region.trivially_infeasible {
            regions.push(RegionReport { region, cutoff, report: None, skipped: false });
            continue;
        }
        let elapsed = clock.now() - start;
        let remaining_time = options.time_limit - elapsed;
        let remaining_nodes = options.node_limit.saturating_sub(nodes);
        if remaining_time <= 0.0 || remaining_nodes == 0 {
            all_exhausted = false;
            open_bound = f64::NEG_INFINITY;
            regions.push(RegionReport { region, cutoff, report: None, skipped: true });
            continue;
        }
        let sub = SolveOptions { time_limit: remaining_time, node_limit: remaining_nodes, cutoff: cutoff_min, ..options.clone() };
        let cuts = region.linear_cuts();
        let report = solve_mip_with_clock(instance, &cuts, &sub, clock)?;
        nodes += report.nodes;
        lp_iterations += report.lp_iterations;
        for &(t, v) in &report.incumbent_log {
            log.push((t + elapsed, v));
        }
        match report.status {
            SolutionStatus::Optimal | SolutionStatus::Infeasible | SolutionStatus::Cutoff => {}
            SolutionStatus::Feasible | SolutionStatus::Limit => {
                all_exhausted = false;
                open_bound = open_bound.min(factor * report.best_bound);
            }
        }
        if let Some(sol) = &report.best_solution {
            if best.as_ref().is_none_or(|b| factor * sol.objective < factor * b.objective) {
                best = Some(sol.clone());
            }
        }
        regions.push(RegionReport { region, cutoff, report: Some(report), skipped: false });
    }

    let status = match (mode, &best) {
        (PmvbMode::Heuristic, Some(_)) => SolutionStatus::Feasible,
        (PmvbMode::Heuristic, None) => SolutionStatus::Limit,
        (PmvbMode::Exact, Some(_)) if all_exhausted => SolutionStatus::Optimal,
        (PmvbMode::Exact, Some(_)) => SolutionStatus::Feasible,
        (PmvbMode::Exact, None) if !all_exhausted => SolutionStatus::Limit,
        (PmvbMode::Exact, None) => {
            let cut = regions.iter().any(|r| r.report.as_ref().is_some_and(|s| s.status == SolutionStatus::Cutoff));
            if cut {
                SolutionStatus::Cutoff
            } else {
                SolutionStatus::Infeasible
            }
        }
    };
    let best_min = best.as_ref().map_or(f64::INFINITY, |s| factor * s.objective);
    let bound_min = match mode {
        PmvbMode::Heuristic => f64::NEG_INFINITY,
        PmvbMode::Exact => open_bound.min(best_min),
    };
    let mut best_solution = best;
    if let Some(s) = &mut best_solution {
        s.status = status;
    }
    let overall = SolveReport {
        best_solution,
        best_bound: factor * bound_min,
        status,
        nodes,
        wall_time: clock.now() - start,
        incumbent_log: log,
        lp_iterations,
    };
    Ok(PmvbReport { overall, regions, hyperplanes: pair })
}

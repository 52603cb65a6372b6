//! Timing aggregates.

use pmvb_core::model::ObjectiveSense;
use thiserror::Error;

pub const SGM_SHIFT: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("shifted geometric mean of an empty list")]
    Empty,
    #[error("time {0} is negative or not finite")]
    BadTime(f64),
}

/// Shifted geometric mean `exp(mean ln max{1, T + shift}) − shift`.
pub fn sgm(times: &[f64], shift: f64) -> Result<f64, MetricError> {
    if times.is_empty() {
        return Err(MetricError::Empty);
    }
    if let Some(&t) = times.iter().find(|t| !(**t >= 0.0) || !t.is_finite()) {
        return Err(MetricError::BadTime(t));
    }
    let shifted = |t: f64| (t + shift).max(1.0);
    let lo = times.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = times.iter().copied().fold(0.0, f64::max);
    if lo == hi && shifted(lo) == lo + shift {
        // the mean of equal values, without a log/exp round trip
        return Ok(lo);
    }
    let mean = times.iter().map(|&t| shifted(t).ln()).sum::<f64>() / times.len() as f64;
    // rounding must not leave the range of the inputs
    Ok((mean.exp() - shift).clamp(shifted(lo) - shift, shifted(hi) - shift).max(0.0))
}

pub fn objective_tolerance(target: f64) -> f64 {
    1e-6 * (1.0 + target.abs())
}

/// First logged time whose objective is at least as good as `target`,
/// allowing `1e-6·(1 + |target|)`.
pub fn time_to_target(log: &[(f64, f64)], target: f64, sense: ObjectiveSense) -> Option<f64> {
    let tol = objective_tolerance(target);
    log.iter()
        .find(|&&(_, obj)| match sense {
            ObjectiveSense::Minimize => obj <= target + tol,
            ObjectiveSense::Maximize => obj >= target - tol,
        })
        .map(|&(t, _)| t)
}

/// `original / pmvb`, defined when both are positive and finite, or when
/// both are zero (identical timings).
pub fn speedup(sgm_original: f64, sgm_pmvb: f64) -> Option<f64> {
    if sgm_original == sgm_pmvb && sgm_original.is_finite() {
        return Some(1.0);
    }
    if sgm_pmvb > 0.0 && sgm_pmvb.is_finite() && sgm_original.is_finite() && sgm_original >= 0.0 {
        Some(sgm_original / sgm_pmvb)
    } else {
        None
    }
}

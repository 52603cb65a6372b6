//! Learning-theoretic thresholds under independent per-variable errors.

use alloc::vec::Vec;

use super::{CardinalityHyperplane, HyperplanePair, PmvbError, RoundedSets};
use crate::math;
use crate::model::RowSense;

/// `exp(−2γ²/|S|)`.
pub fn hoeffding_tail(set_size: usize, gamma: f64) -> f64 {
    debug_assert!(set_size >= 1 && gamma >= 0.0);
    math::exp(-2.0 * gamma * gamma / set_size as f64)
}

/// ERM error, VC dimension and sample count for one variable's classifier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawGeneralization {
    pub error: f64,
    pub vc: f64,
    pub samples: f64,
}

/// `1 − e − sqrt([vc(ln(2m/vc) + 1) + ln(4/δ)] / m)`.
pub fn delta_from_raw(raw: RawGeneralization, delta: f64) -> f64 {
    let RawGeneralization { error, vc, samples: m } = raw;
    let complexity = vc * (math::ln(2.0 * m / vc) + 1.0) + math::ln(4.0 / delta);
    1.0 - error - math::sqrt(complexity / m)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizationInputs {
    /// `Δ_j` per binary; `None` where unavailable.
    pub deltas: Vec<Option<f64>>,
    pub delta: f64,
    pub gamma: f64,
    pub raw: Option<Vec<Option<RawGeneralization>>>,
}

impl GeneralizationInputs {
    pub fn from_deltas(deltas: Vec<f64>, delta: f64, gamma: f64) -> Self {
        Self { deltas: deltas.into_iter().map(Some).collect(), delta, gamma, raw: None }
    }

    /// Computes every `Δ_j` from raw inputs; `δ` must lie in `(0, 1)`.
    pub fn from_raw(raw: Vec<RawGeneralization>, delta: f64, gamma: f64) -> Result<Self, PmvbError> {
        super::check_delta(delta)?;
        let deltas = raw.iter().map(|r| Some(delta_from_raw(*r, delta))).collect();
        let g = Self { deltas, delta, gamma, raw: Some(raw.into_iter().map(Some).collect()) };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), PmvbError> {
        if !(self.delta >= 0.0 && self.delta < 1.0) {
            return Err(PmvbError::DeltaOutOfRange(self.delta));
        }
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(PmvbError::BadGeneralization("gamma must be finite and non-negative"));
        }
        if self.deltas.iter().flatten().any(|&d| !(d > 0.0 && d <= 1.0)) {
            return Err(PmvbError::BadGeneralization("every generalization value must lie in (0, 1]"));
        }
        if let Some(raw) = &self.raw {
            if raw.len() != self.deltas.len() {
                return Err(PmvbError::BadGeneralization("raw inputs and values differ in length"));
            }
            for (r, d) in raw.iter().zip(&self.deltas) {
                if let (Some(r), Some(d)) = (r, d) {
                    if math::abs(delta_from_raw(*r, self.delta) - d) > 1e-12 {
                        return Err(PmvbError::BadGeneralization("stored value disagrees with its raw inputs"));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theorem1Thresholds {
    /// Lower bound on the number of ones in `U`.
    pub upper_threshold: f64,
    /// Upper bound on the number of ones in `L`.
    pub lower_threshold: f64,
    /// Probability bound that the respective statement fails; `None` for an
    /// empty set.
    pub upper_tail: Option<f64>,
    pub lower_tail: Option<f64>,
}

fn pooled(g: &GeneralizationInputs, idx: &[usize]) -> Result<f64, PmvbError> {
    let mut s = 0.0;
    for &j in idx {
        s += g.deltas.get(j).copied().flatten().ok_or(PmvbError::MissingDelta(j))?;
    }
    Ok((1.0 - g.delta) * s)
}

/// `(1−δ)Σ_U Δ_j − γ` and `|L| − (1−δ)Σ_L Δ_j + γ`, with Hoeffding tails.
pub fn theorem1_thresholds(g: &GeneralizationInputs, upper: &[usize], lower: &[usize]) -> Result<Theorem1Thresholds, PmvbError> {
    g.validate()?;
    let tail = |n: usize| (n > 0).then(|| hoeffding_tail(n, g.gamma));
    Ok(Theorem1Thresholds {
        upper_threshold: pooled(g, upper)? - g.gamma,
        lower_threshold: lower.len() as f64 - pooled(g, lower)? + g.gamma,
        upper_tail: tail(upper.len()),
        lower_tail: tail(lower.len()),
    })
}

/// Hyperplanes whose intercepts are the thresholds above, for sets given by
/// hard 0/1 predictions.
pub fn theorem1_hyperplanes(g: &GeneralizationInputs, predicted: &[bool]) -> Result<HyperplanePair, PmvbError> {
    let upper: Vec<usize> = (0..predicted.len()).filter(|&j| predicted[j]).collect();
    let lower: Vec<usize> = (0..predicted.len()).filter(|&j| !predicted[j]).collect();
    let t = theorem1_thresholds(g, &upper, &lower)?;
    Ok(HyperplanePair {
        upper: CardinalityHyperplane::new(upper.clone(), RowSense::Ge, t.upper_threshold),
        lower: CardinalityHyperplane::new(lower.clone(), RowSense::Le, t.lower_threshold),
        sets: RoundedSets { upper, lower, unrounded: Vec::new() },
    })
}

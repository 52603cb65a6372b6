//! Closed-form LP relaxation of the 0/1 knapsack with profits `c_i = f_i a_i`.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KnapsackError {
    #[error("weight {index} is not positive")]
    NonPositiveWeight { index: usize },
    #[error("weights and ratios differ in length")]
    LengthMismatch,
    #[error("capacity must be positive and finite")]
    BadCapacity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FractionalKnapsack {
    pub values: Vec<f64>,
    /// Ratio of the split item: the multiplier of the capacity row.
    pub dual: f64,
    /// Item that receives the leftover capacity; `None` when everything fits.
    pub split: Option<usize>,
    pub objective: f64,
}

/// Greedy solution of `max Σ f_i a_i y_i, Σ a_i y_i ≤ b, 0 ≤ y ≤ 1`.
///
/// Items are filled by decreasing ratio `f` (stable on index for ties) until
/// the capacity is exhausted; the item that does not fit is taken
/// fractionally, and its ratio is the optimal dual `λ*`.
pub fn fractional_knapsack(weights: &[f64], ratios: &[f64], capacity: f64) -> Result<FractionalKnapsack, KnapsackError> {
    if weights.len() != ratios.len() {
        return Err(KnapsackError::LengthMismatch);
    }
    if let Some(index) = weights.iter().position(|&a| !(a > 0.0) || !a.is_finite()) {
        return Err(KnapsackError::NonPositiveWeight { index });
    }
    if !(capacity > 0.0) || !capacity.is_finite() {
        return Err(KnapsackError::BadCapacity);
    }
    let n = weights.len();
    let total: f64 = weights.iter().sum();
    let objective_of = |y: &[f64]| y.iter().zip(weights).zip(ratios).map(|((y, a), f)| y * a * f).sum();
    if total <= capacity {
        let values = vec![1.0; n];
        let objective = objective_of(&values);
        return Ok(FractionalKnapsack { values, dual: 0.0, split: None, objective });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| ratios[j].partial_cmp(&ratios[i]).unwrap_or(core::cmp::Ordering::Equal));
    let mut values = vec![0.0; n];
    let mut used = 0.0;
    let mut split = None;
    let mut dual = 0.0;
    for &i in &order {
        if used + weights[i] <= capacity {
            values[i] = 1.0;
            used += weights[i];
        } else {
            values[i] = ((capacity - used) / weights[i]).clamp(0.0, 1.0);
            split = Some(i);
            dual = ratios[i];
            break;
        }
    }
    let objective = objective_of(&values);
    Ok(FractionalKnapsack { values, dual, split, objective })
}

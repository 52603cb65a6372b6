//! Probabilistic multi-variable cardinality branching.
//!
//! A prediction `p` splits the binaries into a confidently-one set
//! `U = {j : p_j ≥ τ}` and a confidently-zero set `L = {j : p_j ≤ 1 − τ}`.
//! Two cardinality hyperplanes over those sets, together with their integer
//! complements, partition the binary hypercube into four regions. The region
//! where both hyperplanes hold is solved first; in exact mode the other
//! three are then solved with the first region's optimum as a cutoff.

mod bounds;
mod solve;

use alloc::vec::Vec;

use thiserror::Error;

use crate::bnb::SolveError;
use crate::math;
use crate::model::{LinearCut, RowSense};

pub use bounds::{delta_from_raw, hoeffding_tail, theorem1_hyperplanes, theorem1_thresholds, GeneralizationInputs, RawGeneralization, Theorem1Thresholds};
#[cfg(feature = "std")]
pub use solve::pmvb_solve;
pub use solve::{pmvb_solve_with_clock, PmvbConfig, PmvbMode, PmvbReport, RegionReport};

/// Tolerance used when comparing probabilities against a threshold, so that
/// grid values such as `0.9` built by division compare as intended.
pub const TAU_TOL: f64 = 1e-12;

/// Data-free defaults: the smallest confidence parameter and the threshold
/// that worked best without training data.
pub const DATA_FREE_DELTA: f64 = 1e-8;
pub const DATA_FREE_TAU: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PmvbError {
    #[error("threshold {0} is outside (0.5, 1]")]
    TauOutOfRange(f64),
    #[error("confidence parameter {0} is outside (0, 1)")]
    DeltaOutOfRange(f64),
    #[error("variance bound {0} is negative or not finite")]
    BadSigma(f64),
    #[error("slack fraction {0} is outside [0, 1]")]
    BadSlack(f64),
    #[error("pair {pair} has prediction length {prediction} and label length {labels}")]
    LengthMismatch { pair: usize, prediction: usize, labels: usize },
    #[error("prediction has {found} entries, the instance has {expected} binaries")]
    PredictionLength { expected: usize, found: usize },
    #[error("at least two (prediction, optimum) pairs are required")]
    TooFewPairs,
    #[error("threshold grid must be non-empty, strictly increasing and inside (0.5, 1]")]
    BadGrid,
    #[error("no grid threshold has both mean accuracies at least as large as itself")]
    NoFeasibleThreshold,
    #[error("threshold {0} is not a valid grid point")]
    InvalidGridPoint(f64),
    #[error("missing generalization value for variable {0}")]
    MissingDelta(usize),
    #[error("generalization inputs are invalid: {0}")]
    BadGeneralization(&'static str),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

fn check_tau(tau: f64) -> Result<(), PmvbError> {
    if tau > 0.5 && tau <= 1.0 {
        Ok(())
    } else {
        Err(PmvbError::TauOutOfRange(tau))
    }
}

fn check_delta(delta: f64) -> Result<(), PmvbError> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(PmvbError::DeltaOutOfRange(delta))
    }
}

/// Thresholds `0.51, 0.52, …, 1.00`. The selection rule ranges over the open
/// interval above one half, so `0.50` itself is left out.
pub fn default_tau_grid() -> Vec<f64> {
    (51..=100).map(|i| i as f64 / 100.0).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RoundedSets {
    /// Predicted ones, ascending.
    pub upper: Vec<usize>,
    /// Predicted zeros, ascending.
    pub lower: Vec<usize>,
    pub unrounded: Vec<usize>,
}

fn rounds_up(p: f64, tau: f64) -> bool {
    p >= tau - TAU_TOL
}

fn rounds_down(p: f64, tau: f64) -> bool {
    p <= 1.0 - tau + TAU_TOL
}

/// Splits indices by the threshold; both comparisons are inclusive.
pub fn round_prediction(p: &[f64], tau: f64) -> Result<RoundedSets, PmvbError> {
    check_tau(tau)?;
    let mut sets = RoundedSets::default();
    for (j, &pj) in p.iter().enumerate() {
        if rounds_up(pj, tau) {
            sets.upper.push(j);
        } else if rounds_down(pj, tau) {
            sets.lower.push(j);
        } else {
            sets.unrounded.push(j);
        }
    }
    Ok(sets)
}

/// Statistics at one threshold. Means and variances are `None` when no
/// instance had a non-empty set on that side.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub tau: f64,
    pub mean_alpha_l: Option<f64>,
    pub var_alpha_l: Option<f64>,
    pub mean_alpha_u: Option<f64>,
    pub var_alpha_u: Option<f64>,
    pub mean_size_l: f64,
    pub mean_size_u: f64,
    pub num_valid_l: usize,
    pub num_valid_u: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyStats {
    pub points: Vec<GridPoint>,
}

impl AccuracyStats {
    pub fn tau_grid(&self) -> Vec<f64> {
        self.points.iter().map(|g| g.tau).collect()
    }

    pub fn point(&self, tau: f64) -> Option<&GridPoint> {
        self.points.iter().find(|g| math::abs(g.tau - tau) <= TAU_TOL)
    }
}

/// Mean and unbiased sample variance; a single observation has variance 0.
fn mean_var(xs: &[f64]) -> (Option<f64>, Option<f64>) {
    match xs.len() {
        0 => (None, None),
        1 => (Some(xs[0]), Some(0.0)),
        n => {
            let mean = xs.iter().sum::<f64>() / n as f64;
            let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
            (Some(mean), Some(var))
        }
    }
}

/// Per-threshold accuracy statistics over `(prediction, optimum)` pairs.
pub fn accuracy_curves(pairs: &[(Vec<f64>, Vec<bool>)], tau_grid: &[f64]) -> Result<AccuracyStats, PmvbError> {
    if pairs.len() < 2 {
        return Err(PmvbError::TooFewPairs);
    }
    if tau_grid.is_empty() || tau_grid.windows(2).any(|w| !(w[0] < w[1])) || tau_grid.iter().any(|&t| check_tau(t).is_err()) {
        return Err(PmvbError::BadGrid);
    }
    for (k, (p, y)) in pairs.iter().enumerate() {
        if p.len() != y.len() {
            return Err(PmvbError::LengthMismatch { pair: k, prediction: p.len(), labels: y.len() });
        }
    }
    let count = pairs.len() as f64;
    let mut points = Vec::with_capacity(tau_grid.len());
    for &tau in tau_grid {
        let mut alpha_l = Vec::new();
        let mut alpha_u = Vec::new();
        let mut size_l = 0usize;
        let mut size_u = 0usize;
        for (p, y) in pairs {
            let (mut nu, mut hu, mut nl, mut hl) = (0usize, 0usize, 0usize, 0usize);
            for (&pj, &yj) in p.iter().zip(y) {
                if rounds_up(pj, tau) {
                    nu += 1;
                    hu += yj as usize;
                } else if rounds_down(pj, tau) {
                    nl += 1;
                    hl += !yj as usize;
                }
            }
            size_u += nu;
            size_l += nl;
            if nu > 0 {
                alpha_u.push(hu as f64 / nu as f64);
            }
            if nl > 0 {
                alpha_l.push(hl as f64 / nl as f64);
            }
        }
        let (mean_alpha_l, var_alpha_l) = mean_var(&alpha_l);
        let (mean_alpha_u, var_alpha_u) = mean_var(&alpha_u);
        points.push(GridPoint {
            tau,
            mean_alpha_l,
            var_alpha_l,
            mean_alpha_u,
            var_alpha_u,
            mean_size_l: size_l as f64 / count,
            mean_size_u: size_u as f64 / count,
            num_valid_l: alpha_l.len(),
            num_valid_u: alpha_u.len(),
        });
    }
    Ok(AccuracyStats { points })
}

/// Largest grid threshold whose two mean accuracies are at least itself.
///
/// A side whose set was empty on every validation instance imposes no
/// condition, but at least one side must have data.
pub fn select_tau(stats: &AccuracyStats) -> Result<f64, PmvbError> {
    let ok = |m: Option<f64>, tau: f64| m.is_none_or(|m| m >= tau - TAU_TOL);
    stats
        .points
        .iter()
        .rev()
        .find(|g| (g.mean_alpha_l.is_some() || g.mean_alpha_u.is_some()) && ok(g.mean_alpha_l, g.tau) && ok(g.mean_alpha_u, g.tau))
        .map(|g| g.tau)
        .ok_or(PmvbError::NoFeasibleThreshold)
}

/// `sqrt(max(V[α_L], V[α_U]))` at a grid threshold.
pub fn sigma_from_stats(stats: &AccuracyStats, tau: f64) -> Result<f64, PmvbError> {
    let g = stats.point(tau).ok_or(PmvbError::InvalidGridPoint(tau))?;
    match (g.var_alpha_l, g.var_alpha_u) {
        (Some(l), Some(u)) => Ok(math::sqrt(l.max(u))),
        (Some(v), None) | (None, Some(v)) => Ok(math::sqrt(v)),
        (None, None) => Err(PmvbError::InvalidGridPoint(tau)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub tau_star: f64,
    pub sigma: f64,
    pub delta: f64,
    pub stats: AccuracyStats,
}

impl Calibration {
    /// Selects `τ*` and `σ` from validation pairs.
    pub fn fit(pairs: &[(Vec<f64>, Vec<bool>)], tau_grid: &[f64], delta: f64) -> Result<Self, PmvbError> {
        check_delta(delta)?;
        let stats = accuracy_curves(pairs, tau_grid)?;
        let tau_star = select_tau(&stats)?;
        let sigma = sigma_from_stats(&stats, tau_star)?;
        Ok(Self { tau_star, sigma, delta, stats })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HyperplaneMode {
    /// Intercepts from `τ|S|`.
    Plain,
    /// Intercepts from the predicted probabilities summed over the set.
    Tightened,
}

/// The term subtracted from (or added to) the expected count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Margin {
    /// `σ|S|/√δ`.
    Chebyshev { sigma: f64, delta: f64 },
    /// `s·|S|`, for use without validation data.
    SlackFraction(f64),
}

impl Margin {
    fn validate(self) -> Result<(), PmvbError> {
        match self {
            Margin::Chebyshev { sigma, delta } => {
                if !(sigma >= 0.0) || !sigma.is_finite() {
                    return Err(PmvbError::BadSigma(sigma));
                }
                check_delta(delta)
            }
            Margin::SlackFraction(s) => {
                if (0.0..=1.0).contains(&s) {
                    Ok(())
                } else {
                    Err(PmvbError::BadSlack(s))
                }
            }
        }
    }

    fn amount(self, size: usize) -> f64 {
        let size = size as f64;
        match self {
            Margin::Chebyshev { sigma, delta } => sigma * size / math::sqrt(delta),
            Margin::SlackFraction(s) => s * size,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CardinalityHyperplane {
    /// Ascending, non-empty.
    pub indices: Vec<usize>,
    /// `Ge` for the predicted-ones cut, `Le` for the predicted-zeros cut.
    pub sense: RowSense,
    pub zeta: f64,
    pub rhs_int: i64,
}

/// Snap used before floor/ceil so that `78.0000000001` and `77.9999999999`
/// both round to 78.
const INTEGER_SNAP: f64 = 1e-9;

fn conservative_rhs(zeta: f64, sense: RowSense, size: usize) -> i64 {
    let near = math::round(zeta);
    let z = if math::abs(zeta - near) <= INTEGER_SNAP { near } else { zeta };
    let r = match sense {
        RowSense::Ge => math::floor(z),
        _ => math::ceil(z),
    };
    r.clamp(0.0, size as f64) as i64
}

impl CardinalityHyperplane {
    /// Builds the cut, or `None` when `indices` is empty.
    pub fn new(indices: Vec<usize>, sense: RowSense, zeta: f64) -> Option<Self> {
        if indices.is_empty() {
            return None;
        }
        let rhs_int = conservative_rhs(zeta, sense, indices.len());
        Some(Self { indices, sense, zeta, rhs_int })
    }

    pub fn size(&self) -> usize {
        self.indices.len()
    }

    pub fn count(&self, assignment: &[bool]) -> i64 {
        self.indices.iter().filter(|&&j| assignment[j]).count() as i64
    }

    pub fn is_satisfied(&self, assignment: &[bool]) -> bool {
        let c = self.count(assignment);
        match self.sense {
            RowSense::Ge => c >= self.rhs_int,
            _ => c <= self.rhs_int,
        }
    }

    pub fn to_cut(&self, label: &str) -> LinearCut {
        LinearCut::new(self.indices.iter().map(|&j| (j, 1.0)).collect(), self.sense, self.rhs_int as f64, label)
    }

    /// Integer complement: `≥ r` becomes `≤ r − 1` and `≤ r` becomes `≥ r + 1`.
    /// Returns `None` when no 0/1 point can satisfy the complement.
    pub fn complement(&self) -> Option<Self> {
        let (sense, rhs) = match self.sense {
            RowSense::Ge => (RowSense::Le, self.rhs_int - 1),
            _ => (RowSense::Ge, self.rhs_int + 1),
        };
        if rhs < 0 || rhs > self.size() as i64 {
            return None;
        }
        Some(Self { indices: self.indices.clone(), sense, zeta: rhs as f64, rhs_int: rhs })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct HyperplanePair {
    pub upper: Option<CardinalityHyperplane>,
    pub lower: Option<CardinalityHyperplane>,
    pub sets: RoundedSets,
}

/// Cardinality hyperplanes with the Chebyshev margin `σ|S|/√δ`.
pub fn build_hyperplanes(p: &[f64], tau: f64, sigma: f64, delta: f64, mode: HyperplaneMode) -> Result<HyperplanePair, PmvbError> {
    build_hyperplanes_with_margin(p, tau, Margin::Chebyshev { sigma, delta }, mode)
}

pub fn build_hyperplanes_with_margin(p: &[f64], tau: f64, margin: Margin, mode: HyperplaneMode) -> Result<HyperplanePair, PmvbError> {
    check_tau(tau)?;
    margin.validate()?;
    let sets = round_prediction(p, tau)?;
    let expected = |idx: &[usize], plain: f64| match mode {
        HyperplaneMode::Plain => plain * idx.len() as f64,
        HyperplaneMode::Tightened => idx.iter().map(|&j| p[j]).sum(),
    };
    let zeta1 = expected(&sets.upper, tau) - margin.amount(sets.upper.len());
    let zeta2 = expected(&sets.lower, 1.0 - tau) + margin.amount(sets.lower.len());
    Ok(HyperplanePair {
        upper: CardinalityHyperplane::new(sets.upper.clone(), RowSense::Ge, zeta1),
        lower: CardinalityHyperplane::new(sets.lower.clone(), RowSense::Le, zeta2),
        sets,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Cut,
    Complement,
    /// The hyperplane does not exist (its set was empty).
    Absent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub upper: Side,
    pub lower: Side,
    pub cuts: Vec<CardinalityHyperplane>,
    /// A complement that no 0/1 point satisfies; the region is empty.
    pub trivially_infeasible: bool,
}

impl Region {
    pub fn label(&self) -> &'static str {
        match (self.upper, self.lower) {
            (Side::Cut, Side::Cut) => "U,L",
            (Side::Cut, Side::Complement) => "U,~L",
            (Side::Complement, Side::Cut) => "~U,L",
            (Side::Complement, Side::Complement) => "~U,~L",
            (Side::Cut, Side::Absent) => "U",
            (Side::Complement, Side::Absent) => "~U",
            (Side::Absent, Side::Cut) => "L",
            (Side::Absent, Side::Complement) => "~L",
            (Side::Absent, Side::Absent) => "all",
        }
    }

    pub fn linear_cuts(&self) -> Vec<LinearCut> {
        let label = self.label();
        self.cuts.iter().map(|h| h.to_cut(label)).collect()
    }

    pub fn is_satisfied(&self, assignment: &[bool]) -> bool {
        !self.trivially_infeasible && self.cuts.iter().all(|h| h.is_satisfied(assignment))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchPartition {
    /// The first region is the one where every present hyperplane holds.
    pub regions: Vec<Region>,
}

impl BranchPartition {
    /// Indices of the regions containing a 0/1 assignment of the binaries.
    pub fn satisfies(&self, assignment: &[bool]) -> Vec<usize> {
        self.regions.iter().enumerate().filter(|(_, r)| r.is_satisfied(assignment)).map(|(k, _)| k).collect()
    }
}

fn sides(h: &Option<CardinalityHyperplane>) -> Vec<(Side, Option<CardinalityHyperplane>, bool)> {
    match h {
        None => alloc::vec![(Side::Absent, None, false)],
        Some(h) => {
            let comp = h.complement();
            let empty = comp.is_none();
            alloc::vec![(Side::Cut, Some(h.clone()), false), (Side::Complement, comp, empty)]
        }
    }
}

/// Four regions from the two cuts and their complements (two when only one
/// cut exists, one when neither does).
pub fn make_partition(upper: Option<&CardinalityHyperplane>, lower: Option<&CardinalityHyperplane>) -> BranchPartition {
    let su = sides(&upper.cloned());
    let sl = sides(&lower.cloned());
    let mut regions = Vec::with_capacity(su.len() * sl.len());
    for (u_side, u_cut, u_empty) in &su {
        for (l_side, l_cut, l_empty) in &sl {
            let cuts = u_cut.iter().chain(l_cut.iter()).cloned().collect();
            regions.push(Region { upper: *u_side, lower: *l_side, cuts, trivially_infeasible: *u_empty || *l_empty });
        }
    }
    BranchPartition { regions }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn rounding_definition() {
        let s = round_prediction(&[0.95, 0.03, 0.5], 0.9).unwrap();
        assert_eq!((s.upper, s.lower, s.unrounded), (vec![0], vec![1], vec![2]));
        let s = round_prediction(&[0.999, 0.001], 1.0).unwrap();
        assert!(s.upper.is_empty() && s.lower.is_empty());
        let s = round_prediction(&[0.9, 0.1], 0.9).unwrap();
        assert_eq!((s.upper, s.lower), (vec![0], vec![1]));
        assert_eq!(round_prediction(&[0.5], 0.5), Err(PmvbError::TauOutOfRange(0.5)));
        assert!(round_prediction(&[0.5], 1.01).is_err());
    }

    #[test]
    fn grid_shape() {
        let g = default_tau_grid();
        assert_eq!(g.len(), 50);
        assert_eq!(g[0], 0.51);
        assert_eq!(*g.last().unwrap(), 1.0);
    }

    #[test]
    fn perfect_predictions() {
        let pairs = vec![(vec![1.0, 0.0, 1.0], vec![true, false, true]), (vec![0.0, 1.0, 0.0], vec![false, true, false])];
        let stats = accuracy_curves(&pairs, &default_tau_grid()).unwrap();
        for g in &stats.points {
            assert_eq!((g.mean_alpha_l, g.mean_alpha_u), (Some(1.0), Some(1.0)));
            assert_eq!((g.var_alpha_l, g.var_alpha_u), (Some(0.0), Some(0.0)));
        }
        assert_eq!(select_tau(&stats), Ok(1.0));
    }

    #[test]
    fn empty_sets_are_absent() {
        let pairs = vec![(vec![0.6, 0.4], vec![true, false]), (vec![0.7, 0.3], vec![true, true])];
        let stats = accuracy_curves(&pairs, &[0.99]).unwrap();
        let g = &stats.points[0];
        assert_eq!((g.num_valid_l, g.num_valid_u), (0, 0));
        assert_eq!(g.mean_alpha_u, None);
        assert_eq!(g.mean_size_u, 0.0);
        assert_eq!(select_tau(&stats), Err(PmvbError::NoFeasibleThreshold));
        assert!(sigma_from_stats(&stats, 0.99).is_err());
    }

    #[test]
    fn a_side_without_data_imposes_nothing() {
        // every label is zero and nothing is predicted one
        let pairs = vec![(vec![0.1, 0.0], vec![false, false]), (vec![0.2, 0.05], vec![false, true])];
        let stats = accuracy_curves(&pairs, &[0.8, 0.9]).unwrap();
        assert!(stats.points.iter().all(|g| g.mean_alpha_u.is_none()));
        // α_L is 1 and 1/2 at τ = 0.8 (mean 0.75), 1 and 0 at τ = 0.9
        assert_eq!(select_tau(&stats), Err(PmvbError::NoFeasibleThreshold));
        let pairs = vec![(vec![0.1, 0.0], vec![false, false]), (vec![0.2, 0.05], vec![false, false])];
        let stats = accuracy_curves(&pairs, &[0.8, 0.9]).unwrap();
        assert_eq!(select_tau(&stats), Ok(0.9));
        assert_eq!(sigma_from_stats(&stats, 0.9), Ok(0.0));
    }

    #[test]
    fn accuracy_input_errors() {
        assert_eq!(accuracy_curves(&[(vec![1.0], vec![true])], &[0.9]), Err(PmvbError::TooFewPairs));
        let pairs = vec![(vec![1.0], vec![true]), (vec![1.0, 0.0], vec![true])];
        assert!(matches!(accuracy_curves(&pairs, &[0.9]), Err(PmvbError::LengthMismatch { pair: 1, .. })));
        let ok = vec![(vec![1.0], vec![true]), (vec![1.0], vec![true])];
        assert_eq!(accuracy_curves(&ok, &[0.9, 0.8]), Err(PmvbError::BadGrid));
        assert_eq!(accuracy_curves(&ok, &[0.5]), Err(PmvbError::BadGrid));
    }

    #[test]
    fn sigma_takes_the_larger_variance() {
        let point = |vl, vu| GridPoint {
            tau: 0.9,
            mean_alpha_l: Some(0.95),
            var_alpha_l: Some(vl),
            mean_alpha_u: Some(0.95),
            var_alpha_u: Some(vu),
            mean_size_l: 1.0,
            mean_size_u: 1.0,
            num_valid_l: 2,
            num_valid_u: 2,
        };
        let stats = AccuracyStats { points: vec![point(0.000625, 0.0004)] };
        assert!((sigma_from_stats(&stats, 0.9).unwrap() - 0.025).abs() < 1e-15);
        let stats = AccuracyStats { points: vec![point(0.0, 0.0)] };
        assert_eq!(sigma_from_stats(&stats, 0.9), Ok(0.0));
        let stats = AccuracyStats { points: vec![point(0.04, 0.01)] };
        assert!((sigma_from_stats(&stats, 0.9).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(sigma_from_stats(&stats, 0.8), Err(PmvbError::InvalidGridPoint(0.8)));
    }

    #[test]
    fn worked_example_floors_to_78() {
        let p = vec![0.95; 100];
        let pair = build_hyperplanes(&p, 0.9, 0.025, 0.05, HyperplaneMode::Plain).unwrap();
        let u = pair.upper.unwrap();
        assert!((u.zeta - (90.0 - 2.5 / 0.05f64.sqrt())).abs() < 1e-12);
        assert!((u.zeta - 78.819).abs() < 1e-3);
        assert_eq!(u.rhs_int, 78);
        assert!(pair.lower.is_none());
    }

    #[test]
    fn zero_sigma_plain_and_tightened() {
        let p = vec![1.0, 1.0, 0.95, 0.95, 0.95, 0.95, 0.95, 0.95, 0.95, 0.95, 0.0];
        let pair = build_hyperplanes(&p, 0.9, 0.0, 0.5, HyperplaneMode::Plain).unwrap();
        assert_eq!(pair.upper.as_ref().unwrap().rhs_int, 9);
        let lower = pair.lower.unwrap();
        assert_eq!((lower.sense, lower.rhs_int), (RowSense::Le, 1));
        let ones = vec![1.0; 7];
        let pair = build_hyperplanes(&ones, 0.9, 0.0, 0.5, HyperplaneMode::Tightened).unwrap();
        assert_eq!(pair.upper.unwrap().rhs_int, 7);
    }

    #[test]
    fn hyperplane_parameter_errors() {
        assert!(matches!(build_hyperplanes(&[0.9], 0.9, -0.1, 0.5, HyperplaneMode::Plain), Err(PmvbError::BadSigma(_))));
        assert!(matches!(build_hyperplanes(&[0.9], 0.9, 0.1, 1.0, HyperplaneMode::Plain), Err(PmvbError::DeltaOutOfRange(_))));
        assert!(matches!(build_hyperplanes(&[0.9], 0.4, 0.1, 0.5, HyperplaneMode::Plain), Err(PmvbError::TauOutOfRange(_))));
    }

    #[test]
    fn integer_snap() {
        let h = CardinalityHyperplane::new(vec![0, 1, 2], RowSense::Ge, 2.0 - 1e-12).unwrap();
        assert_eq!(h.rhs_int, 2);
        let h = CardinalityHyperplane::new(vec![0, 1, 2], RowSense::Le, 1.0 + 1e-12).unwrap();
        assert_eq!(h.rhs_int, 1);
        let h = CardinalityHyperplane::new(vec![0, 1], RowSense::Ge, -5.0).unwrap();
        assert_eq!(h.rhs_int, 0);
        let h = CardinalityHyperplane::new(vec![0, 1], RowSense::Le, 7.5).unwrap();
        assert_eq!(h.rhs_int, 2);
        assert!(CardinalityHyperplane::new(vec![], RowSense::Ge, 1.0).is_none());
    }

    #[test]
    fn partition_sizes() {
        let u = CardinalityHyperplane::new(vec![0, 1], RowSense::Ge, 1.0).unwrap();
        let l = CardinalityHyperplane::new(vec![2, 3], RowSense::Le, 1.0).unwrap();
        assert_eq!(make_partition(Some(&u), Some(&l)).regions.len(), 4);
        assert_eq!(make_partition(Some(&u), None).regions.len(), 2);
        assert_eq!(make_partition(None, None).regions.len(), 1);
        let zero = CardinalityHyperplane::new(vec![0, 1], RowSense::Ge, 0.0).unwrap();
        let part = make_partition(Some(&zero), None);
        assert!(!part.regions[0].trivially_infeasible);
        assert!(part.regions[1].trivially_infeasible);
    }

    #[test]
    fn partition_coverage_exhaustive_small() {
        let u = CardinalityHyperplane::new(vec![0, 1, 2], RowSense::Ge, 2.0).unwrap();
        let l = CardinalityHyperplane::new(vec![3, 4], RowSense::Le, 0.0).unwrap();
        let part = make_partition(Some(&u), Some(&l));
        for mask in 0u32..32 {
            let a: Vec<bool> = (0..5).map(|j| mask >> j & 1 == 1).collect();
            assert_eq!(part.satisfies(&a).len(), 1, "mask {mask:05b}");
        }
    }
}

//! Monte-Carlo checks of the concentration inequalities and of the
//! data-free knapsack guarantee.

use pmvb_core::bnb::{solve_mip, SolveOptions};
use pmvb_core::instgen::{gen_knapsack_uniform, stream_rng};
use pmvb_core::lp::fractional_knapsack;
use pmvb_core::model::SolutionStatus;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MIN_TRIALS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidateError {
    #[error("need at least {MIN_TRIALS} trials, got {0}")]
    TooFewTrials(usize),
    #[error("invalid parameter: {0}")]
    BadParameter(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lemma {
    Hoeffding,
    Bernstein,
    Chebyshev,
    UniformBins,
}

impl Lemma {
    pub fn as_str(self) -> &'static str {
        match self {
            Lemma::Hoeffding => "hoeffding",
            Lemma::Bernstein => "bernstein",
            Lemma::Chebyshev => "chebyshev",
            Lemma::UniformBins => "uniform_bins",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Lemma::Hoeffding, Lemma::Bernstein, Lemma::Chebyshev, Lemma::UniformBins].into_iter().find(|l| l.as_str() == s)
    }

    pub fn default_params(self) -> LemmaParams {
        match self {
            Lemma::Hoeffding => LemmaParams { n: 100, p: 0.5, t: 10.0, delta: 0.0 },
            Lemma::Bernstein => LemmaParams { n: 100, p: 0.1, t: 10.0, delta: 0.0 },
            Lemma::Chebyshev => LemmaParams { n: 1, p: 0.0, t: 0.5, delta: 0.0 },
            Lemma::UniformBins => LemmaParams { n: 400, p: 0.0, t: 0.0, delta: 0.05 },
        }
    }
}

/// `n` draws of Bernoulli(`p`) with deviation `t` for the Bernoulli lemmas;
/// deviation `t` of one uniform(0,1) draw for Chebyshev; `n` uniforms into
/// bins of width `delta` for the bin-count lemma.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaParams {
    pub n: usize,
    pub p: f64,
    pub t: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub lemma: Lemma,
    pub params: LemmaParams,
    pub trials: usize,
    pub bound: f64,
    pub empirical: f64,
    pub stderr: f64,
    /// Probability of the event computed without sampling.
    pub exact: Option<f64>,
    /// For the bin lemma, the union of the exact per-bin tails; an upper
    /// bound on the failure probability that is tighter than `bound`.
    pub reference_upper: Option<f64>,
    /// Trials where the bin counts held but the subset-sum consequence did
    /// not.
    pub implication_violations: Option<usize>,
    pub within_bound: bool,
    pub matches_exact: Option<bool>,
    pub pass: bool,
}

/// `P{X ≥ k}` for `X ~ Binomial(n, p)`, summed in log space.
pub fn binomial_upper_tail(n: usize, p: f64, k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if k > n {
        return 0.0;
    }
    if p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    let mut ln_choose = 0.0;
    let mut tail = 0.0;
    for i in 0..=n {
        if i > 0 {
            ln_choose += ((n - i + 1) as f64).ln() - (i as f64).ln();
        }
        if i >= k {
            tail += (ln_choose + i as f64 * lp + (n - i) as f64 * lq).exp();
        }
    }
    tail.min(1.0)
}

fn stderr_of(q: f64, trials: usize) -> f64 {
    (q * (1.0 - q) / trials as f64).sqrt()
}

/// Smallest integer count `k` with `k − np ≥ t`.
fn first_count(n: usize, p: f64, t: f64) -> usize {
    let x = n as f64 * p + t;
    let k = (x - 1e-9).ceil().max(0.0);
    k as usize
}

pub fn verify_lemma(lemma: Lemma, params: LemmaParams, trials: usize, seed: u64) -> Result<LemmaReport, ValidateError> {
    if trials < MIN_TRIALS {
        return Err(ValidateError::TooFewTrials(trials));
    }
    let mut rng = stream_rng(seed, 0);
    let LemmaParams { n, p, t, delta } = params;
    let mut reference_upper = None;
    let mut implication_violations = None;
    let (bound, hits, exact) = match lemma {
        Lemma::Hoeffding | Lemma::Bernstein => {
            if n == 0 || !(0.0..=1.0).contains(&p) || !(t > 0.0) {
                return Err(ValidateError::BadParameter("need n ≥ 1, p ∈ [0,1], t > 0"));
            }
            let bound = match lemma {
                Lemma::Hoeffding => (-2.0 * t * t / n as f64).exp(),
                _ => (-t * t / (2.0 * (n as f64 * p + t / 3.0))).exp(),
            };
            let k = first_count(n, p, t);
            let hits = (0..trials).filter(|_| (0..n).filter(|_| rng.random_bool(p)).count() >= k).count();
            (bound, hits, Some(binomial_upper_tail(n, p, k)))
        }
        Lemma::Chebyshev => {
            if !(t > 0.0) {
                return Err(ValidateError::BadParameter("need t > 0"));
            }
            let bound = (1.0 / 12.0) / (t * t);
            let hits = (0..trials).filter(|_| (rng.random::<f64>() - 0.5).abs() >= t).count();
            (bound, hits, Some((1.0 - 2.0 * t).max(0.0)))
        }
        Lemma::UniformBins => {
            if n == 0 || !(delta > 0.0 && delta < 1.0) {
                return Err(ValidateError::BadParameter("need n ≥ 1 and δ ∈ (0,1)"));
            }
            let bins = (1.0 / delta - 1e-9).ceil() as usize;
            let cap = 2.0 * n as f64 * delta;
            let bound = bins as f64 * (-(n as f64) * delta / 4.0).exp();
            // exact per-bin tail; the last bin may be narrower than δ
            let over = (cap + 1e-9).floor() as usize + 1;
            let per_bin: f64 = (0..bins).map(|j| binomial_upper_tail(n, (delta.min(1.0 - j as f64 * delta)).max(0.0), over)).sum();
            reference_upper = Some(per_bin.min(1.0));
            let min_subset = (4.0 * n as f64 * delta - 1e-9).ceil() as usize;
            let mut violations = 0usize;
            let mut hits = 0usize;
            let mut lambda = vec![0.0f64; n];
            let mut counts = vec![0usize; bins];
            for _ in 0..trials {
                counts.iter_mut().for_each(|c| *c = 0);
                for l in lambda.iter_mut() {
                    *l = rng.random::<f64>();
                    counts[((*l / delta) as usize).min(bins - 1)] += 1;
                }
                if counts.iter().any(|&c| c as f64 > cap) {
                    hits += 1;
                    continue;
                }
                // the smallest sum over |S| = s is the sum of the s smallest values
                lambda.sort_by(f64::total_cmp);
                let mut prefix = 0.0;
                for (s, l) in lambda.iter().enumerate().map(|(i, l)| (i + 1, l)) {
                    prefix += l;
                    if s >= min_subset.max(1) && prefix < (s * s) as f64 / (8.0 * n as f64) {
                        violations += 1;
                        break;
                    }
                }
            }
            implication_violations = Some(violations);
            (bound.min(1.0), hits, None)
        }
    };
    let empirical = hits as f64 / trials as f64;
    let stderr = stderr_of(empirical, trials);
    let within_bound = empirical <= bound + 3.0 * stderr;
    let matches_exact = exact.map(|q| (empirical - q).abs() <= 3.0 * stderr_of(q, trials).max(stderr));
    let below_reference = reference_upper.is_none_or(|r| empirical <= r + 3.0 * stderr_of(r, trials).max(stderr));
    let pass = within_bound && matches_exact.unwrap_or(true) && below_reference && implication_violations.is_none_or(|v| v == 0);
    Ok(LemmaReport {
        lemma,
        params,
        trials,
        bound,
        empirical,
        stderr,
        exact,
        reference_upper,
        implication_violations,
        within_bound,
        matches_exact,
        pass,
    })
}

/// `4√2·n^{3/4}`.
pub fn theorem3_margin(n: usize) -> f64 {
    4.0 * std::f64::consts::SQRT_2 * (n as f64).powf(0.75)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem3Trial {
    pub seed: u64,
    pub upper_size: usize,
    pub lower_size: usize,
    /// `Σ_{j∈𝒰} y*_j`.
    pub upper_ones: usize,
    /// `Σ_{j∈ℒ} y*_j`.
    pub lower_ones: usize,
    /// `|𝒰 \ 𝒰*|` with `𝒰* = {j : y*_j = 1}`.
    pub upper_missed: usize,
    pub solved: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem3Row {
    pub n: usize,
    pub margin: f64,
    /// The inequalities hold trivially when the margin reaches `n`.
    pub vacuous: bool,
    pub upper_violations: usize,
    pub lower_violations: usize,
    /// Trials whose `|𝒰 \ 𝒰*|` exceeded the margin.
    pub missed_over_margin: usize,
    pub unsolved: usize,
    pub median_upper_missed: f64,
    pub max_upper_missed: usize,
    pub trials: Vec<Theorem3Trial>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem3Report {
    pub gamma: f64,
    pub rows: Vec<Theorem3Row>,
    pub pass: bool,
}

fn median(xs: &mut [usize]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.sort_unstable();
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m] as f64
    } else {
        (xs[m - 1] + xs[m]) as f64 / 2.0
    }
}

/// Integrality cutoff used to read `𝒰` and `ℒ` off the LP solution.
const LP_INTEGRAL_TOL: f64 = 1e-9;

/// For each `n` and trial, rounds the fractional knapsack solution into
/// `𝒰 = {y_LP = 1}` and `ℒ = {y_LP = 0}`, solves the knapsack exactly, and
/// checks `Σ_𝒰 y* ≥ |𝒰| − M` and `Σ_ℒ y* ≤ M` with `M = 4√2·n^{3/4}`.
///
/// Trials whose exact solve does not prove optimality within
/// `options` count as unsolved and fail the report.
pub fn verify_theorem3(ns: &[usize], gamma: f64, trials: usize, seed: u64, options: &SolveOptions) -> Result<Theorem3Report, ValidateError> {
    if !(gamma > 0.0 && gamma < 0.5) {
        return Err(ValidateError::BadParameter("γ must lie in (0, 1/2)"));
    }
    if ns.contains(&0) {
        return Err(ValidateError::BadParameter("n must be at least 1"));
    }
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let margin = theorem3_margin(n);
        let mut out = Vec::with_capacity(trials);
        for k in 0..trials {
            let trial_seed = seed ^ ((n as u64) << 32) ^ k as u64;
            let knap = gen_knapsack_uniform(n, gamma, trial_seed).map_err(|_| ValidateError::BadParameter("knapsack generation failed"))?;
            let frac = fractional_knapsack(&knap.weights, &knap.ratios, knap.capacity).map_err(|_| ValidateError::BadParameter("fractional knapsack failed"))?;
            let upper: Vec<usize> = (0..n).filter(|&j| frac.values[j] >= 1.0 - LP_INTEGRAL_TOL).collect();
            let lower: Vec<usize> = (0..n).filter(|&j| frac.values[j] <= LP_INTEGRAL_TOL).collect();
            let report = solve_mip(&knap.instance, &[], options).map_err(|_| ValidateError::BadParameter("exact solve failed"))?;
            let solved = report.status == SolutionStatus::Optimal;
            let y = report.best_solution.map(|s| s.binary_values(n)).unwrap_or_else(|| vec![false; n]);
            let upper_ones = upper.iter().filter(|&&j| y[j]).count();
            let lower_ones = lower.iter().filter(|&&j| y[j]).count();
            out.push(Theorem3Trial {
                seed: trial_seed,
                upper_size: upper.len(),
                lower_size: lower.len(),
                upper_ones,
                lower_ones,
                upper_missed: upper.len() - upper_ones,
                solved,
            });
        }
        let solved: Vec<&Theorem3Trial> = out.iter().filter(|t| t.solved).collect();
        let mut missed: Vec<usize> = solved.iter().map(|t| t.upper_missed).collect();
        rows.push(Theorem3Row {
            n,
            margin,
            vacuous: margin >= n as f64,
            upper_violations: solved.iter().filter(|t| (t.upper_ones as f64) < t.upper_size as f64 - margin).count(),
            lower_violations: solved.iter().filter(|t| t.lower_ones as f64 > margin).count(),
            missed_over_margin: solved.iter().filter(|t| t.upper_missed as f64 > margin).count(),
            unsolved: out.len() - solved.len(),
            median_upper_missed: median(&mut missed),
            max_upper_missed: missed.iter().copied().max().unwrap_or(0),
            trials: out,
        });
    }
    let pass = rows.iter().all(|r| r.upper_violations == 0 && r.lower_violations == 0 && r.missed_over_margin == 0 && r.unsolved == 0);
    Ok(Theorem3Report { gamma, rows, pass })
}

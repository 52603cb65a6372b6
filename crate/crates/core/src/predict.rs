//! Per-variable probabilities for the binaries of an instance.
//!
//! Three sources are supported: per-variable logistic models trained on
//! solved instances of a family, the LP root relaxation (simplex or interior
//! point), and externally supplied vectors.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::lp::{self, LpBackend, LpError, LpStatus};
use crate::math;
use crate::model::MipInstance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PredictionSource {
    Logistic,
    LpRootSimplex,
    LpRootIpm,
    External,
}

impl PredictionSource {
    pub fn as_str(self) -> &'static str {
        match self {
            PredictionSource::Logistic => "logistic",
            PredictionSource::LpRootSimplex => "lp_root_simplex",
            PredictionSource::LpRootIpm => "lp_root_ipm",
            PredictionSource::External => "external",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    /// One probability in `[0, 1]` per binary variable.
    pub probabilities: Vec<f64>,
    pub source: PredictionSource,
}

impl Prediction {
    /// Clamps every entry into `[0, 1]` and returns how many were moved.
    /// NaN entries become 0.5 (no information).
    pub fn clamped(mut probabilities: Vec<f64>, source: PredictionSource) -> (Self, usize) {
        let mut moved = 0;
        for p in &mut probabilities {
            let q = if p.is_nan() { 0.5 } else { p.clamp(0.0, 1.0) };
            if q != *p {
                moved += 1;
                *p = q;
            }
        }
        (Self { probabilities, source }, moved)
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PredictError {
    #[error("dataset is empty or has fewer than two samples")]
    EmptyDataset,
    #[error("sample {sample} has {found} entries, expected {expected} ({what})")]
    DimensionMismatch { sample: usize, what: &'static str, expected: usize, found: usize },
    #[error("feature vector has {found} entries, model expects {expected}")]
    FeatureMismatch { expected: usize, found: usize },
    #[error("root relaxation is {0}")]
    Relaxation(&'static str),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// One training pair: the family's varying data and the optimal binaries.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub features: Vec<f64>,
    pub labels: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOptions {
    /// L2 weight on the non-intercept coefficients.
    pub reg: f64,
    pub max_iters: usize,
    /// Stop once the gradient's Euclidean norm falls below this.
    pub tol: f64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self { reg: 1e-4, max_iters: 500, tol: 1e-6 }
    }
}

/// Logit used for variables whose training labels never change; large
/// enough that the sigmoid rounds to exactly 0 or 1 in `f64`.
pub const SATURATED_LOGIT: f64 = 40.0;

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    /// `weights[j]` are the coefficients of variable `j` over the
    /// standardized features.
    pub weights: Vec<Vec<f64>>,
    pub intercepts: Vec<f64>,
    pub feature_mean: Vec<f64>,
    pub feature_scale: Vec<f64>,
    pub reg: f64,
    pub iterations: Vec<usize>,
    /// Full-batch loss per iteration, per variable.
    pub loss_trace: Vec<Vec<f64>>,
}

impl LogisticModel {
    pub fn num_features(&self) -> usize {
        self.feature_mean.len()
    }

    pub fn num_variables(&self) -> usize {
        self.intercepts.len()
    }

    pub fn standardize(&self, xi: &[f64]) -> Vec<f64> {
        xi.iter().zip(&self.feature_mean).zip(&self.feature_scale).map(|((x, m), s)| (x - m) / s).collect()
    }

    pub fn predict(&self, xi: &[f64]) -> Result<Prediction, PredictError> {
        if xi.len() != self.num_features() {
            return Err(PredictError::FeatureMismatch { expected: self.num_features(), found: xi.len() });
        }
        let z = self.standardize(xi);
        let probabilities = self
            .weights
            .iter()
            .zip(&self.intercepts)
            .map(|(w, b)| math::sigmoid(b + w.iter().zip(&z).map(|(a, x)| a * x).sum::<f64>()))
            .collect();
        Ok(Prediction { probabilities, source: PredictionSource::Logistic })
    }
}

/// Regularized mean logistic loss and its gradient.
///
/// `params` holds the weights followed by the intercept; `rows` are
/// standardized features; `labels` the 0/1 targets. The intercept is not
/// regularized.
pub fn logistic_loss_grad(params: &[f64], rows: &[Vec<f64>], labels: &[bool], reg: f64) -> (f64, Vec<f64>) {
    let d = params.len() - 1;
    let m = rows.len() as f64;
    let mut grad = vec![0.0; d + 1];
    let mut loss = 0.0;
    for (x, &y) in rows.iter().zip(labels) {
        let z = params[d] + params[..d].iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
        // log(1 + e^z) - y z
        loss += math::softplus(z) - if y { z } else { 0.0 };
        let r = math::sigmoid(z) - if y { 1.0 } else { 0.0 };
        for (g, v) in grad[..d].iter_mut().zip(x) {
            *g += r * v;
        }
        grad[d] += r;
    }
    loss /= m;
    for g in &mut grad {
        *g /= m;
    }
    for k in 0..d {
        loss += 0.5 * reg * params[k] * params[k];
        grad[k] += reg * params[k];
    }
    (loss, grad)
}

fn norm(v: &[f64]) -> f64 {
    math::sqrt(v.iter().map(|x| x * x).sum())
}

/// Gradient descent with Armijo backtracking from the zero vector.
fn train_variable(rows: &[Vec<f64>], labels: &[bool], opts: &TrainOptions) -> (Vec<f64>, usize, Vec<f64>) {
    let d = rows[0].len();
    let mut params = vec![0.0; d + 1];
    let (mut loss, mut grad) = logistic_loss_grad(&params, rows, labels, opts.reg);
    let mut trace = vec![loss];
    let mut step = 1.0;
    let mut iters = 0;
    while iters < opts.max_iters {
        let gnorm2: f64 = grad.iter().map(|g| g * g).sum();
        if math::sqrt(gnorm2) <= opts.tol {
            break;
        }
        iters += 1;
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<f64> = params.iter().zip(&grad).map(|(p, g)| p - step * g).collect();
            let (tl, tg) = logistic_loss_grad(&trial, rows, labels, opts.reg);
            if tl <= loss - 1e-4 * step * gnorm2 {
                params = trial;
                loss = tl;
                grad = tg;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        trace.push(loss);
        step = (step * 2.0).min(1e6);
    }
    (params, iters, trace)
}

/// Trains one logistic model per binary variable.
pub fn logistic_train(dataset: &[Sample], opts: &TrainOptions) -> Result<LogisticModel, PredictError> {
    if dataset.len() < 2 {
        return Err(PredictError::EmptyDataset);
    }
    let d = dataset[0].features.len();
    let n = dataset[0].labels.len();
    for (k, s) in dataset.iter().enumerate() {
        if s.features.len() != d {
            return Err(PredictError::DimensionMismatch { sample: k, what: "features", expected: d, found: s.features.len() });
        }
        if s.labels.len() != n {
            return Err(PredictError::DimensionMismatch { sample: k, what: "labels", expected: n, found: s.labels.len() });
        }
    }
    let m = dataset.len() as f64;
    let mut mean = vec![0.0; d];
    for s in dataset {
        for (a, x) in mean.iter_mut().zip(&s.features) {
            *a += x / m;
        }
    }
    let mut scale = vec![0.0; d];
    for s in dataset {
        for ((a, x), mu) in scale.iter_mut().zip(&s.features).zip(&mean) {
            *a += (x - mu) * (x - mu) / m;
        }
    }
    for s in &mut scale {
        *s = if *s > 0.0 { math::sqrt(*s) } else { 1.0 };
    }
    let rows: Vec<Vec<f64>> = dataset
        .iter()
        .map(|s| s.features.iter().zip(&mean).zip(&scale).map(|((x, mu), sc)| (x - mu) / sc).collect())
        .collect();

    let mut model = LogisticModel {
        weights: Vec::with_capacity(n),
        intercepts: Vec::with_capacity(n),
        feature_mean: mean,
        feature_scale: scale,
        reg: opts.reg,
        iterations: Vec::with_capacity(n),
        loss_trace: Vec::with_capacity(n),
    };
    for j in 0..n {
        let labels: Vec<bool> = dataset.iter().map(|s| s.labels[j]).collect();
        let ones = labels.iter().filter(|&&y| y).count();
        if ones == 0 || ones == labels.len() {
            model.weights.push(vec![0.0; d]);
            model.intercepts.push(if ones == 0 { -SATURATED_LOGIT } else { SATURATED_LOGIT });
            model.iterations.push(0);
            model.loss_trace.push(Vec::new());
            continue;
        }
        let (params, iters, trace) = train_variable(&rows, &labels, opts);
        model.weights.push(params[..d].to_vec());
        model.intercepts.push(params[d]);
        model.iterations.push(iters);
        model.loss_trace.push(trace);
    }
    Ok(model)
}

/// Gradient norm of the trained objective for variable `j` (diagnostics).
pub fn gradient_norm(model: &LogisticModel, dataset: &[Sample], j: usize) -> f64 {
    let rows: Vec<Vec<f64>> = dataset.iter().map(|s| model.standardize(&s.features)).collect();
    let labels: Vec<bool> = dataset.iter().map(|s| s.labels[j]).collect();
    let mut params = model.weights[j].clone();
    params.push(model.intercepts[j]);
    norm(&logistic_loss_grad(&params, &rows, &labels, model.reg).1)
}

/// LP root relaxation values of the binaries, clamped to `[0, 1]`.
pub fn lp_root_predict(instance: &MipInstance, backend: LpBackend) -> Result<Prediction, PredictError> {
    let sol = match backend {
        LpBackend::Simplex => lp::solve_simplex(instance, &[])?,
        LpBackend::Ipm => lp::solve_ipm(instance, &[])?,
    };
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(PredictError::Relaxation("infeasible")),
        LpStatus::Unbounded => return Err(PredictError::Relaxation("unbounded")),
        LpStatus::IterationLimit => return Err(PredictError::Relaxation("not solved within the iteration limit")),
    }
    let source = match backend {
        LpBackend::Simplex => PredictionSource::LpRootSimplex,
        LpBackend::Ipm => PredictionSource::LpRootIpm,
    };
    let (p, _) = Prediction::clamped(sol.primal[..instance.num_binary].to_vec(), source);
    Ok(p)
}

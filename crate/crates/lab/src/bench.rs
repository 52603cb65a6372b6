//! End-to-end benchmark: train and calibrate on one split of a family, then
//! compare the first PMVB region against the plain solver on the rest.
//!
//! For every test instance the first region is solved and its best value
//! `F` recorded together with the time `T_pmvb` at which it was first
//! matched. The plain solver then runs on the same instance and
//! `T_original` is the time it needs to match `F`. Timings are aggregated
//! with the shifted geometric mean and the speedup is their ratio.

use std::fs;
use std::path::{Path, PathBuf};

use pmvb_core::bnb::{solve_mip_with_clock, SolveOptions, SolveReport};
use pmvb_core::clock::{Clock, StdClock};
use pmvb_core::instgen::InstanceFamily;
use pmvb_core::lp::LpBackend;
use pmvb_core::model::{MipInstance, SolutionStatus};
use pmvb_core::pmvb::{default_tau_grid, pmvb_solve_with_clock, Calibration, HyperplaneMode, Margin, PmvbConfig, PmvbError, PmvbMode};
use pmvb_core::predict::{logistic_train, lp_root_predict, LogisticModel, PredictError, Prediction, Sample, TrainOptions};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::format::{self, CalibrationDoc, FormatError};
use crate::metrics::{sgm, speedup, time_to_target, SGM_SHIFT};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("the test split is empty")]
    EmptyTestSplit,
    #[error("family has {have} instances, the split needs {need}")]
    FamilyTooSmall { have: usize, need: usize },
    #[error("no training instance could be labelled")]
    NoLabels,
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Predict(#[from] PredictError),
    #[error(transparent)]
    Pmvb(#[from] PmvbError),
    #[error(transparent)]
    Solve(#[from] pmvb_core::SolveError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PredictorSpec {
    Logistic,
    LpRootSimplex,
    LpRootIpm,
    /// A prediction file, or for a family a directory holding
    /// `<instance name>.json` per instance.
    File(PathBuf),
}

impl PredictorSpec {
    pub fn parse(s: &str) -> Result<Self, BenchError> {
        match s {
            "logistic" => Ok(Self::Logistic),
            "lp-root-simplex" => Ok(Self::LpRootSimplex),
            "lp-root-ipm" => Ok(Self::LpRootIpm),
            _ => match s.strip_prefix("file:") {
                Some(p) if !p.is_empty() => Ok(Self::File(PathBuf::from(p))),
                _ => Err(BenchError::Config(format!("unknown predictor `{s}`"))),
            },
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Logistic => "logistic".into(),
            Self::LpRootSimplex => "lp-root-simplex".into(),
            Self::LpRootIpm => "lp-root-ipm".into(),
            Self::File(p) => format!("file:{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchMode {
    Heuristic,
    Exact,
    /// Compares the plain solver with itself.
    Plain,
}

impl BenchMode {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "heuristic" => Some(Self::Heuristic),
            "exact" => Some(Self::Exact),
            "plain" => Some(Self::Plain),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Heuristic => "heuristic",
            Self::Exact => "exact",
            Self::Plain => "plain",
        }
    }
}

pub const DEFAULT_BENCH_DELTA: f64 = 0.8;
pub const DEFAULT_VALIDATION_FRACTION: f64 = 0.2;

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub family: PathBuf,
    pub predictor: PredictorSpec,
    pub delta: f64,
    /// `None` selects `τ*` from validation data.
    pub tau: Option<f64>,
    /// Overrides the calibrated `σ`. With `tau` set and no `sigma`, the
    /// margin is `slack·|S|` instead.
    pub sigma: Option<f64>,
    pub slack: f64,
    pub mode: BenchMode,
    pub tightened: bool,
    /// The first `train` instances of the family train and calibrate.
    pub train: usize,
    /// The `test` instances after them are benchmarked.
    pub test: usize,
    /// Share of the training split held out for calibration when the
    /// predictor is trained.
    pub validation_fraction: f64,
    pub solve: SolveOptions,
    pub train_options: TrainOptions,
}

impl BenchConfig {
    pub fn new(family: impl Into<PathBuf>, predictor: PredictorSpec) -> Self {
        Self {
            family: family.into(),
            predictor,
            delta: DEFAULT_BENCH_DELTA,
            tau: None,
            sigma: None,
            slack: 0.0,
            mode: BenchMode::Heuristic,
            tightened: false,
            train: 0,
            test: 0,
            validation_fraction: DEFAULT_VALIDATION_FRACTION,
            solve: SolveOptions::exact(),
            train_options: TrainOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(BenchError::Config(format!("delta {} outside (0, 1)", self.delta)));
        }
        if let Some(t) = self.tau {
            if !(t > 0.5 && t <= 1.0) {
                return Err(BenchError::Config(format!("tau {t} outside (0.5, 1]")));
            }
        }
        if let Some(s) = self.sigma {
            if !(s >= 0.0) || !s.is_finite() {
                return Err(BenchError::Config(format!("sigma {s} must be finite and non-negative")));
            }
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return Err(BenchError::Config("validation fraction must lie in [0, 1)".into()));
        }
        self.solve.validate()?;
        if self.test == 0 {
            return Err(BenchError::EmptyTestSplit);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub index: usize,
    pub instance: String,
    pub upper_size: usize,
    pub lower_size: usize,
    pub status_pmvb: String,
    pub f_pmvb: Option<f64>,
    pub t_pmvb: Option<f64>,
    pub nodes_pmvb: usize,
    pub status_overall: Option<String>,
    pub objective_overall: Option<f64>,
    pub status_plain: String,
    pub objective_plain: Option<f64>,
    pub t_original_to_target: Option<f64>,
    pub nodes_plain: usize,
}

impl BenchRow {
    pub const COLUMNS: [&'static str; 14] = [
        "index",
        "instance",
        "upper_size",
        "lower_size",
        "status_pmvb",
        "f_pmvb",
        "t_pmvb",
        "nodes_pmvb",
        "status_overall",
        "objective_overall",
        "status_plain",
        "objective_plain",
        "t_original_to_target",
        "nodes_plain",
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub family: String,
    pub predictor: String,
    pub mode: BenchMode,
    pub hyperplanes: String,
    pub tau: Option<f64>,
    pub sigma: Option<f64>,
    pub slack: Option<f64>,
    pub delta: f64,
    pub train: usize,
    pub test: usize,
    pub rows: usize,
    /// Rows entering the SGM: both times defined.
    pub pairs: usize,
    /// The plain solver never matched `F` within its limits.
    pub not_reached: usize,
    /// The first region produced no solution, so there is no target.
    pub no_target: usize,
    pub unlabelled_training_instances: usize,
    pub sgm_pmvb: Option<f64>,
    pub sgm_original: Option<f64>,
    pub speedup: Option<f64>,
    pub calibration: Option<CalibrationDoc>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub summary: BenchSummary,
}

/// Optimal binaries for each instance, or `None` where optimality was not
/// proven within `options`.
pub fn solve_labels(instances: &[MipInstance], options: &SolveOptions, clock: &dyn Clock) -> Result<Vec<Option<Vec<bool>>>, BenchError> {
    instances
        .iter()
        .map(|inst| {
            let r = solve_mip_with_clock(inst, &[], options, clock)?;
            Ok(match (r.status, r.best_solution) {
                (SolutionStatus::Optimal, Some(s)) => Some(s.binary_values(inst.num_binary)),
                _ => None,
            })
        })
        .collect()
}

/// Probabilities for one instance from a source that needs no training.
pub fn untrained_prediction(spec: &PredictorSpec, instance: &MipInstance, file: Option<&Path>) -> Result<Prediction, BenchError> {
    match spec {
        PredictorSpec::LpRootSimplex => Ok(lp_root_predict(instance, LpBackend::Simplex)?),
        PredictorSpec::LpRootIpm => Ok(lp_root_predict(instance, LpBackend::Ipm)?),
        PredictorSpec::File(p) => Ok(format::load_prediction(file.unwrap_or(p), instance.num_binary)?),
        PredictorSpec::Logistic => Err(BenchError::Config("the logistic predictor needs a trained model".into())),
    }
}

struct Predictor<'a> {
    spec: &'a PredictorSpec,
    model: Option<LogisticModel>,
}

impl Predictor<'_> {
    fn predict(&self, inst: &MipInstance) -> Result<Vec<f64>, BenchError> {
        let p = match (&self.model, self.spec) {
            (Some(m), _) => m.predict(&inst.param_tag)?,
            (None, PredictorSpec::File(dir)) => untrained_prediction(self.spec, inst, Some(&dir.join(format!("{}.json", inst.name))))?,
            (None, spec) => untrained_prediction(spec, inst, None)?,
        };
        Ok(p.probabilities)
    }
}

pub fn run_benchmark(config: &BenchConfig) -> Result<BenchReport, BenchError> {
    let family = format::read_family(&config.family)?;
    run_benchmark_on(config, &family, &StdClock::new())
}

/// The benchmark on an in-memory family; `config.family` is only used as
/// a label.
pub fn run_benchmark_on(config: &BenchConfig, family: &InstanceFamily, clock: &dyn Clock) -> Result<BenchReport, BenchError> {
    config.validate()?;
    let need = config.train + config.test;
    if family.len() < need {
        return Err(BenchError::FamilyTooSmall { have: family.len(), need });
    }
    let (train, rest) = family.instances.split_at(config.train);
    let test = &rest[..config.test];

    let plain = config.mode == BenchMode::Plain;
    let needs_labels = !plain && (config.predictor == PredictorSpec::Logistic || config.tau.is_none());
    let mut unlabelled = 0;
    let labelled: Vec<(&MipInstance, Vec<bool>)> = if needs_labels {
        let labels = solve_labels(train, &config.solve, clock)?;
        unlabelled = labels.iter().filter(|l| l.is_none()).count();
        if unlabelled > 0 {
            log::warn!("{unlabelled} training instances were not solved to optimality and are skipped");
        }
        train.iter().zip(labels).filter_map(|(i, l)| l.map(|l| (i, l))).collect()
    } else {
        Vec::new()
    };
    if needs_labels && labelled.is_empty() {
        return Err(BenchError::NoLabels);
    }

    let mut predictor = Predictor { spec: &config.predictor, model: None };
    let mut validation: &[(&MipInstance, Vec<bool>)] = &labelled;
    if !plain && config.predictor == PredictorSpec::Logistic {
        let held = ((labelled.len() as f64) * config.validation_fraction).round() as usize;
        let held = held.min(labelled.len().saturating_sub(2));
        let (fit, val) = labelled.split_at(labelled.len() - held);
        let samples: Vec<Sample> = fit.iter().map(|(i, l)| Sample { features: i.param_tag.clone(), labels: l.clone() }).collect();
        predictor.model = Some(logistic_train(&samples, &config.train_options)?);
        validation = if val.is_empty() { fit } else { val };
    }

    let hyperplanes = if config.tightened { HyperplaneMode::Tightened } else { HyperplaneMode::Plain };
    let mut calibration = None;
    let pmvb_config = if plain {
        None
    } else {
        Some(match (config.tau, config.sigma) {
            (Some(tau), Some(sigma)) => PmvbConfig { tau, margin: Margin::Chebyshev { sigma, delta: config.delta }, hyperplanes },
            (Some(tau), None) => PmvbConfig { tau, margin: Margin::SlackFraction(config.slack), hyperplanes },
            (None, sigma) => {
                let pairs = validation.iter().map(|(i, l)| Ok((predictor.predict(i)?, l.clone()))).collect::<Result<Vec<_>, BenchError>>()?;
                let cal = Calibration::fit(&pairs, &default_tau_grid(), config.delta)?;
                log::info!("calibrated tau* = {}, sigma = {}", cal.tau_star, cal.sigma);
                let sigma = sigma.unwrap_or(cal.sigma);
                let c = PmvbConfig { tau: cal.tau_star, margin: Margin::Chebyshev { sigma, delta: config.delta }, hyperplanes };
                calibration = Some(cal);
                c
            }
        })
    };

    let mut rows = Vec::with_capacity(test.len());
    for (k, inst) in test.iter().enumerate() {
        rows.push(bench_instance(config.train + k, inst, &predictor, pmvb_config.as_ref(), config, clock)?);
    }

    let paired: Vec<(f64, f64)> = rows.iter().filter_map(|r| Some((r.t_pmvb?, r.t_original_to_target?))).collect();
    let no_target = rows.iter().filter(|r| r.f_pmvb.is_none()).count();
    let not_reached = rows.iter().filter(|r| r.f_pmvb.is_some() && r.t_original_to_target.is_none()).count();
    if not_reached > 0 {
        log::warn!("{not_reached} rows: the plain solver did not reach the PMVB objective and they are excluded from the SGM");
    }
    let (sgm_pmvb, sgm_original) = if paired.is_empty() {
        (None, None)
    } else {
        let a: Vec<f64> = paired.iter().map(|p| p.0).collect();
        let b: Vec<f64> = paired.iter().map(|p| p.1).collect();
        (sgm(&a, SGM_SHIFT).ok(), sgm(&b, SGM_SHIFT).ok())
    };
    let speedup = match (sgm_original, sgm_pmvb) {
        (Some(o), Some(p)) => speedup(o, p),
        _ => None,
    };
    let (tau, sigma, slack) = match &pmvb_config {
        None => (None, None, None),
        Some(c) => match c.margin {
            Margin::Chebyshev { sigma, .. } => (Some(c.tau), Some(sigma), None),
            Margin::SlackFraction(s) => (Some(c.tau), None, Some(s)),
        },
    };
    let summary = BenchSummary {
        family: family.name.clone(),
        predictor: if plain { "none".into() } else { config.predictor.label() },
        mode: config.mode,
        hyperplanes: if config.tightened { "tightened".into() } else { "plain".into() },
        tau,
        sigma,
        slack,
        delta: config.delta,
        train: config.train,
        test: config.test,
        rows: rows.len(),
        pairs: paired.len(),
        not_reached,
        no_target,
        unlabelled_training_instances: unlabelled,
        sgm_pmvb,
        sgm_original,
        speedup,
        calibration: calibration.as_ref().map(CalibrationDoc::from),
    };
    Ok(BenchReport { rows, summary })
}

fn target_time(report: &SolveReport, target: Option<f64>, inst: &MipInstance) -> Option<f64> {
    time_to_target(&report.incumbent_log, target?, inst.sense)
}

fn bench_instance(
    index: usize,
    inst: &MipInstance,
    predictor: &Predictor<'_>,
    pmvb_config: Option<&PmvbConfig>,
    config: &BenchConfig,
    clock: &dyn Clock,
) -> Result<BenchRow, BenchError> {
    let (status_pmvb, f_pmvb, t_pmvb, nodes_pmvb, upper_size, lower_size, overall) = match pmvb_config {
        None => (String::new(), None, None, 0, 0, 0, None),
        Some(cfg) => {
            let p = predictor.predict(inst)?;
            let mode = if config.mode == BenchMode::Exact { PmvbMode::Exact } else { PmvbMode::Heuristic };
            let rep = pmvb_solve_with_clock(inst, &p, cfg, &config.solve, mode, clock)?;
            let first = rep.first_region();
            let (status, f, t, nodes) = match &first.report {
                Some(r) => (r.status.as_str().to_string(), r.objective(), target_time(r, r.objective(), inst), r.nodes),
                None => ("empty".to_string(), None, None, 0),
            };
            let overall = (config.mode == BenchMode::Exact).then(|| (rep.overall.status.as_str().to_string(), rep.overall.objective()));
            (status, f, t, nodes, rep.hyperplanes.sets.upper.len(), rep.hyperplanes.sets.lower.len(), overall)
        }
    };
    let plain = solve_mip_with_clock(inst, &[], &config.solve, clock)?;
    let (status_pmvb, f_pmvb, t_pmvb, nodes_pmvb) = if pmvb_config.is_none() {
        // self-comparison: the plain run plays both roles
        let f = plain.objective();
        (plain.status.as_str().to_string(), f, target_time(&plain, f, inst), plain.nodes)
    } else {
        (status_pmvb, f_pmvb, t_pmvb, nodes_pmvb)
    };
    let (status_overall, objective_overall) = match overall {
        Some((s, o)) => (Some(s), o),
        None => (None, None),
    };
    Ok(BenchRow {
        index,
        instance: inst.name.clone(),
        upper_size,
        lower_size,
        status_pmvb,
        f_pmvb,
        t_pmvb,
        nodes_pmvb,
        status_overall,
        objective_overall,
        status_plain: plain.status.as_str().to_string(),
        objective_plain: plain.objective(),
        t_original_to_target: target_time(&plain, f_pmvb, inst),
        nodes_plain: plain.nodes,
    })
}

pub fn rows_to_csv(rows: &[BenchRow]) -> Result<Vec<u8>, BenchError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(BenchRow::COLUMNS)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| BenchError::Io { path: PathBuf::from("<csv buffer>"), source: e.into_error() })
}

pub fn summary_to_string(summary: &BenchSummary) -> String {
    let mut s = serde_json::to_string_pretty(summary).expect("summary is serializable");
    s.push('\n');
    s
}

/// Writes `<prefix>.csv` (one row per instance) and `<prefix>.json` (the
/// summary) and returns both paths.
pub fn report_emit(report: &BenchReport, prefix: &Path) -> Result<(PathBuf, PathBuf), BenchError> {
    let with_ext = |ext: &str| {
        let mut name = prefix.file_name().map(|n| n.to_os_string()).unwrap_or_default();
        name.push(ext);
        prefix.with_file_name(name)
    };
    let (csv_path, json_path) = (with_ext(".csv"), with_ext(".json"));
    if let Some(dir) = csv_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| BenchError::Io { path: dir.to_path_buf(), source })?;
    }
    fs::write(&csv_path, rows_to_csv(&report.rows)?).map_err(|source| BenchError::Io { path: csv_path.clone(), source })?;
    fs::write(&json_path, summary_to_string(&report.summary)).map_err(|source| BenchError::Io { path: json_path.clone(), source })?;
    Ok((csv_path, json_path))
}

//! JSON documents for instances, predictions, models, calibrations and
//! instance families.
//!
//! Every document carries `"format_version": 1`. Reals are written with the
//! shortest representation that parses back to the same bits, and infinite
//! bounds are written as the strings `"inf"` / `"-inf"`.

use std::fs;
use std::path::{Path, PathBuf};

use pmvb_core::instgen::{InstanceFamily, VaryingField};
use pmvb_core::model::{MipInstance, ModelError, ObjectiveSense, Row, RowSense};
use pmvb_core::pmvb::{AccuracyStats, Calibration, GridPoint};
use pmvb_core::predict::{LogisticModel, Prediction, PredictionSource};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed document at line {line}, column {column}: {message}")]
    Malformed { line: usize, column: usize, message: String },
    #[error("unsupported format_version {0}")]
    Version(u32),
    #[error("{0}")]
    Schema(String),
    #[error(transparent)]
    Invariant(#[from] ModelError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl From<serde_json::Error> for FormatError {
    fn from(e: serde_json::Error) -> Self {
        FormatError::Malformed { line: e.line(), column: e.column(), message: e.to_string() }
    }
}

fn schema(msg: impl Into<String>) -> FormatError {
    FormatError::Schema(msg.into())
}

fn check_version(v: u32) -> Result<(), FormatError> {
    if v == FORMAT_VERSION {
        Ok(())
    } else {
        Err(FormatError::Version(v))
    }
}

fn read_text(path: &Path) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(|source| FormatError::Io { path: path.to_path_buf(), source })
}

fn write_text(path: &Path, text: &str) -> Result<(), FormatError> {
    fs::write(path, text).map_err(|source| FormatError::Io { path: path.to_path_buf(), source })
}

fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents contain only serializable data");
    s.push('\n');
    s
}

/// A bound that may be infinite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum Bound {
    Finite(f64),
    Sentinel(String),
}

impl Bound {
    fn from_f64(v: f64) -> Self {
        if v == f64::INFINITY {
            Bound::Sentinel("inf".into())
        } else if v == f64::NEG_INFINITY {
            Bound::Sentinel("-inf".into())
        } else {
            Bound::Finite(v)
        }
    }

    fn to_f64(&self) -> Result<f64, FormatError> {
        match self {
            Bound::Finite(v) => Ok(*v),
            Bound::Sentinel(s) if s == "inf" => Ok(f64::INFINITY),
            Bound::Sentinel(s) if s == "-inf" => Ok(f64::NEG_INFINITY),
            Bound::Sentinel(s) => Err(schema(format!("unknown bound token `{s}`"))),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum VarKind {
    Binary,
    Continuous,
}

#[derive(Debug, Serialize, Deserialize)]
struct VariableDoc {
    kind: VarKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lower: Option<Bound>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    upper: Option<Bound>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RowDoc {
    coefficients: Vec<(usize, f64)>,
    sense: String,
    rhs: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct InstanceDoc {
    format_version: u32,
    name: String,
    sense: String,
    variables: Vec<VariableDoc>,
    objective: Vec<(usize, f64)>,
    rows: Vec<RowDoc>,
    #[serde(default)]
    param_tag: Vec<f64>,
}

fn sense_token(s: ObjectiveSense) -> &'static str {
    match s {
        ObjectiveSense::Minimize => "minimize",
        ObjectiveSense::Maximize => "maximize",
    }
}

fn parse_sense(s: &str) -> Result<ObjectiveSense, FormatError> {
    match s {
        "minimize" => Ok(ObjectiveSense::Minimize),
        "maximize" => Ok(ObjectiveSense::Maximize),
        other => Err(schema(format!("unknown objective sense `{other}`"))),
    }
}

fn parse_row_sense(s: &str) -> Result<RowSense, FormatError> {
    match s {
        "<=" => Ok(RowSense::Le),
        "=" => Ok(RowSense::Eq),
        ">=" => Ok(RowSense::Ge),
        other => Err(schema(format!("unknown row sense `{other}`"))),
    }
}

impl InstanceDoc {
    fn from_instance(inst: &MipInstance) -> Self {
        let mut variables: Vec<VariableDoc> = (0..inst.num_binary).map(|_| VariableDoc { kind: VarKind::Binary, lower: None, upper: None }).collect();
        variables.extend(inst.continuous_bounds.iter().map(|&(lo, hi)| VariableDoc {
            kind: VarKind::Continuous,
            lower: Some(Bound::from_f64(lo)),
            upper: Some(Bound::from_f64(hi)),
        }));
        Self {
            format_version: FORMAT_VERSION,
            name: inst.name.clone(),
            sense: sense_token(inst.sense).into(),
            variables,
            objective: inst.objective.clone(),
            rows: inst.rows.iter().map(|r| RowDoc { coefficients: r.coefficients.clone(), sense: r.sense.symbol().into(), rhs: r.rhs }).collect(),
            param_tag: inst.param_tag.clone(),
        }
    }

    fn into_instance(self) -> Result<MipInstance, FormatError> {
        check_version(self.format_version)?;
        let num_binary = self.variables.iter().take_while(|v| matches!(v.kind, VarKind::Binary)).count();
        let mut continuous_bounds = Vec::new();
        for (j, v) in self.variables.iter().enumerate().skip(num_binary) {
            match v.kind {
                VarKind::Binary => return Err(schema(format!("variable {j}: binaries must precede continuous variables"))),
                VarKind::Continuous => {
                    let lo = v.lower.as_ref().map_or(Ok(0.0), Bound::to_f64)?;
                    let hi = v.upper.as_ref().map_or(Ok(f64::INFINITY), Bound::to_f64)?;
                    continuous_bounds.push((lo, hi));
                }
            }
        }
        let rows = self
            .rows
            .into_iter()
            .map(|r| Ok(Row::new(r.coefficients, parse_row_sense(&r.sense)?, r.rhs)))
            .collect::<Result<Vec<_>, FormatError>>()?;
        let inst = MipInstance {
            name: self.name,
            sense: parse_sense(&self.sense)?,
            num_binary,
            num_continuous: continuous_bounds.len(),
            objective: self.objective,
            rows,
            continuous_bounds,
            param_tag: self.param_tag,
        };
        inst.validate()?;
        Ok(inst)
    }
}

pub fn instance_to_string(inst: &MipInstance) -> String {
    to_pretty(&InstanceDoc::from_instance(inst))
}

pub fn instance_from_str(text: &str) -> Result<MipInstance, FormatError> {
    serde_json::from_str::<InstanceDoc>(text)?.into_instance()
}

pub fn write_instance(path: &Path, inst: &MipInstance) -> Result<(), FormatError> {
    write_text(path, &instance_to_string(inst))
}

pub fn read_instance(path: &Path) -> Result<MipInstance, FormatError> {
    instance_from_str(&read_text(path)?)
}

#[derive(Debug, Serialize, Deserialize)]
struct PredictionEntry {
    index: usize,
    probability: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct PredictionDoc {
    format_version: u32,
    #[serde(default)]
    source: Option<String>,
    entries: Vec<PredictionEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum PredictionInput {
    Document(PredictionDoc),
    Bare(Vec<PredictionEntry>),
}

pub fn prediction_to_string(p: &Prediction) -> String {
    let doc = PredictionDoc {
        format_version: FORMAT_VERSION,
        source: Some(p.source.as_str().into()),
        entries: p.probabilities.iter().enumerate().map(|(index, &probability)| PredictionEntry { index, probability }).collect(),
    };
    to_pretty(&doc)
}

/// Parses a prediction for `n` binaries.
///
/// Each index in `0..n` must appear exactly once. Probabilities outside
/// `[0, 1]` are clamped with a warning.
pub fn prediction_from_str(text: &str, n: usize) -> Result<Prediction, FormatError> {
    let entries = match serde_json::from_str::<PredictionInput>(text) {
        Ok(PredictionInput::Document(doc)) => {
            check_version(doc.format_version)?;
            doc.entries
        }
        Ok(PredictionInput::Bare(entries)) => entries,
        Err(_) => {
            // re-parse strictly so the error carries a useful position
            let doc: PredictionDoc = serde_json::from_str(text)?;
            check_version(doc.format_version)?;
            doc.entries
        }
    };
    let mut values: Vec<Option<f64>> = vec![None; n];
    for e in entries {
        let slot = values.get_mut(e.index).ok_or_else(|| schema(format!("prediction index {} out of range for {n} binaries", e.index)))?;
        if slot.is_some() {
            return Err(schema(format!("prediction index {} appears twice", e.index)));
        }
        *slot = Some(e.probability);
    }
    let found = values.iter().filter(|v| v.is_some()).count();
    if found != n {
        let missing = values.iter().position(Option::is_none).unwrap_or(0);
        return Err(schema(format!("prediction length mismatch: {found} of {n} entries present, index {missing} missing")));
    }
    let (pred, moved) = Prediction::clamped(values.into_iter().map(|v| v.unwrap_or(0.5)).collect(), PredictionSource::External);
    if moved > 0 {
        log::warn!("clamped {moved} prediction entries into [0, 1]");
    }
    Ok(pred)
}

pub fn load_prediction(path: &Path, n: usize) -> Result<Prediction, FormatError> {
    prediction_from_str(&read_text(path)?, n)
}

pub fn write_prediction(path: &Path, p: &Prediction) -> Result<(), FormatError> {
    write_text(path, &prediction_to_string(p))
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelDoc {
    format_version: u32,
    weights: Vec<Vec<f64>>,
    intercepts: Vec<f64>,
    feature_mean: Vec<f64>,
    feature_scale: Vec<f64>,
    reg: f64,
    iterations: Vec<usize>,
    #[serde(default)]
    loss_trace: Vec<Vec<f64>>,
}

pub fn model_to_string(m: &LogisticModel) -> String {
    to_pretty(&ModelDoc {
        format_version: FORMAT_VERSION,
        weights: m.weights.clone(),
        intercepts: m.intercepts.clone(),
        feature_mean: m.feature_mean.clone(),
        feature_scale: m.feature_scale.clone(),
        reg: m.reg,
        iterations: m.iterations.clone(),
        loss_trace: m.loss_trace.clone(),
    })
}

pub fn model_from_str(text: &str) -> Result<LogisticModel, FormatError> {
    let d: ModelDoc = serde_json::from_str(text)?;
    check_version(d.format_version)?;
    let n = d.intercepts.len();
    let k = d.feature_mean.len();
    if d.weights.len() != n || d.iterations.len() != n || d.weights.iter().any(|w| w.len() != k) || d.feature_scale.len() != k {
        return Err(schema("model arrays have inconsistent shapes"));
    }
    if d.feature_scale.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
        return Err(schema("feature_scale entries must be positive and finite"));
    }
    let loss_trace = if d.loss_trace.is_empty() { vec![Vec::new(); n] } else { d.loss_trace };
    Ok(LogisticModel {
        weights: d.weights,
        intercepts: d.intercepts,
        feature_mean: d.feature_mean,
        feature_scale: d.feature_scale,
        reg: d.reg,
        iterations: d.iterations,
        loss_trace,
    })
}

pub fn read_model(path: &Path) -> Result<LogisticModel, FormatError> {
    model_from_str(&read_text(path)?)
}

pub fn write_model(path: &Path, m: &LogisticModel) -> Result<(), FormatError> {
    write_text(path, &model_to_string(m))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPointDoc {
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

impl From<&GridPoint> for GridPointDoc {
    fn from(g: &GridPoint) -> Self {
        Self {
            tau: g.tau,
            mean_alpha_l: g.mean_alpha_l,
            var_alpha_l: g.var_alpha_l,
            mean_alpha_u: g.mean_alpha_u,
            var_alpha_u: g.var_alpha_u,
            mean_size_l: g.mean_size_l,
            mean_size_u: g.mean_size_u,
            num_valid_l: g.num_valid_l,
            num_valid_u: g.num_valid_u,
        }
    }
}

impl From<GridPointDoc> for GridPoint {
    fn from(g: GridPointDoc) -> Self {
        Self {
            tau: g.tau,
            mean_alpha_l: g.mean_alpha_l,
            var_alpha_l: g.var_alpha_l,
            mean_alpha_u: g.mean_alpha_u,
            var_alpha_u: g.var_alpha_u,
            mean_size_l: g.mean_size_l,
            mean_size_u: g.mean_size_u,
            num_valid_l: g.num_valid_l,
            num_valid_u: g.num_valid_u,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationDoc {
    pub format_version: u32,
    pub tau_star: f64,
    pub sigma: f64,
    pub delta: f64,
    pub stats: Vec<GridPointDoc>,
}

impl From<&Calibration> for CalibrationDoc {
    fn from(c: &Calibration) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            tau_star: c.tau_star,
            sigma: c.sigma,
            delta: c.delta,
            stats: c.stats.points.iter().map(GridPointDoc::from).collect(),
        }
    }
}

pub fn calibration_to_string(c: &Calibration) -> String {
    to_pretty(&CalibrationDoc::from(c))
}

pub fn calibration_from_str(text: &str) -> Result<Calibration, FormatError> {
    let d: CalibrationDoc = serde_json::from_str(text)?;
    check_version(d.format_version)?;
    if !(d.tau_star > 0.5 && d.tau_star <= 1.0) {
        return Err(schema(format!("tau_star {} outside (0.5, 1]", d.tau_star)));
    }
    if !(d.delta > 0.0 && d.delta < 1.0) {
        return Err(schema(format!("delta {} outside (0, 1)", d.delta)));
    }
    if !(d.sigma >= 0.0) || !d.sigma.is_finite() {
        return Err(schema(format!("sigma {} must be finite and non-negative", d.sigma)));
    }
    Ok(Calibration {
        tau_star: d.tau_star,
        sigma: d.sigma,
        delta: d.delta,
        stats: AccuracyStats { points: d.stats.into_iter().map(GridPoint::from).collect() },
    })
}

pub fn read_calibration(path: &Path) -> Result<Calibration, FormatError> {
    calibration_from_str(&read_text(path)?)
}

pub fn write_calibration(path: &Path, c: &Calibration) -> Result<(), FormatError> {
    write_text(path, &calibration_to_string(c))
}

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Serialize, Deserialize)]
struct ManifestDoc {
    format_version: u32,
    name: String,
    varying_field: String,
    seed: u64,
    template: String,
    instances: Vec<String>,
}

fn parse_varying(s: &str) -> Result<VaryingField, FormatError> {
    [VaryingField::RhsB, VaryingField::CostC]
        .into_iter()
        .find(|v| v.as_str() == s)
        .ok_or_else(|| schema(format!("unknown varying_field `{s}`")))
}

/// Writes `manifest.json`, `template.json` and one file per instance.
pub fn write_family(dir: &Path, fam: &InstanceFamily) -> Result<(), FormatError> {
    fs::create_dir_all(dir).map_err(|source| FormatError::Io { path: dir.to_path_buf(), source })?;
    let files: Vec<String> = (0..fam.len()).map(|k| format!("instance_{k:05}.json")).collect();
    write_instance(&dir.join("template.json"), &fam.template)?;
    for (inst, file) in fam.instances.iter().zip(&files) {
        write_instance(&dir.join(file), inst)?;
    }
    let doc = ManifestDoc {
        format_version: FORMAT_VERSION,
        name: fam.name.clone(),
        varying_field: fam.varying_field.as_str().into(),
        seed: fam.seed,
        template: "template.json".into(),
        instances: files,
    };
    write_text(&dir.join(MANIFEST_FILE), &to_pretty(&doc))
}

pub fn read_family(dir: &Path) -> Result<InstanceFamily, FormatError> {
    let doc: ManifestDoc = serde_json::from_str(&read_text(&dir.join(MANIFEST_FILE))?)?;
    check_version(doc.format_version)?;
    let template = read_instance(&dir.join(&doc.template))?;
    let instances = doc.instances.iter().map(|f| read_instance(&dir.join(f))).collect::<Result<Vec<_>, _>>()?;
    Ok(InstanceFamily { name: doc.name, template, varying_field: parse_varying(&doc.varying_field)?, instances, seed: doc.seed })
}

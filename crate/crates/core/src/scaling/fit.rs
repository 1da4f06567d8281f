use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::scaling::records::ExperimentRecord;

/// Growth law fitted to `(N, value)` pairs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FitModel {
    /// `A·N^α`.
    PurePower,
    /// `A·N^α·(log N)^L`; `L` fixed when given, fitted otherwise.
    PowerLog { log_power: Option<f64> },
}

impl FitModel {
    /// `A·N^α·log N`.
    pub fn power_log() -> Self {
        FitModel::PowerLog { log_power: Some(1.0) }
    }

    pub fn kind(&self) -> FitKind {
        match self {
            FitModel::PurePower => FitKind::PurePower,
            FitModel::PowerLog { .. } => FitKind::PowerLog,
        }
    }

    fn min_points(&self) -> usize {
        match self {
            FitModel::PurePower => 3,
            FitModel::PowerLog { .. } => 4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitKind {
    PurePower,
    PowerLog,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub exponent: f64,
    pub amplitude: f64,
    pub log_power: Option<f64>,
    /// `max |fit/value − 1|` over the inputs.
    pub residual: f64,
    pub model: FitKind,
}

impl FitResult {
    pub fn predict(&self, n: f64) -> f64 {
        let log_factor = self.log_power.map_or(1.0, |l| n.ln().powf(l));
        self.amplitude * n.powf(self.exponent) * log_factor
    }
}

/// Least squares on `log value` against `log N` (and `log log N`). Points
/// are sorted first, so the result does not depend on input order.
pub fn fit_points(points: &[(u64, f64)], model: FitModel) -> Result<FitResult> {
    if points.len() < model.min_points() {
        return Err(LabError::invalid(format!(
            "{:?} fit needs at least {} points, got {}",
            model.kind(),
            model.min_points(),
            points.len()
        )));
    }
    if let Some((n, v)) = points.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
        return Err(LabError::invalid(format!("value at N = {n} must be positive, got {v}")));
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let min_n = if matches!(model, FitModel::PowerLog { .. }) { 2 } else { 1 };
    if pts.iter().any(|(n, _)| *n < min_n) {
        return Err(LabError::invalid(format!("N must be >= {min_n} for this model")));
    }
    let ln_n: Vec<f64> = pts.iter().map(|(n, _)| (*n as f64).ln()).collect();
    let ln_v: Vec<f64> = pts.iter().map(|(_, v)| v.ln()).collect();
    let ln_ln: Vec<f64> = ln_n.iter().map(|l| l.ln()).collect();

    let (free_log, fixed_log) = match model {
        FitModel::PurePower => (false, 0.0),
        FitModel::PowerLog { log_power: Some(l) } => (false, l),
        FitModel::PowerLog { log_power: None } => (true, 0.0),
    };
    let rows = pts.len();
    let cols = if free_log { 3 } else { 2 };
    let design = DMatrix::from_fn(rows, cols, |i, j| match j {
        0 => 1.0,
        1 => ln_n[i],
        _ => ln_ln[i],
    });
    let target = DVector::from_fn(rows, |i, _| ln_v[i] - fixed_log * ln_ln[i]);
    let coef = design
        .clone()
        .svd(true, true)
        .solve(&target, 1e-14)
        .map_err(|e| LabError::invalid(format!("degenerate fit: {e}")))?;
    if design.column(1).iter().all(|&v| (v - ln_n[0]).abs() < 1e-15) {
        return Err(LabError::invalid("fit needs at least two distinct N"));
    }
    let log_power = match model {
        FitModel::PurePower => None,
        FitModel::PowerLog { log_power: Some(l) } => Some(l),
        FitModel::PowerLog { log_power: None } => Some(coef[2]),
    };
    let mut fit = FitResult {
        exponent: coef[1],
        amplitude: coef[0].exp(),
        log_power,
        residual: 0.0,
        model: model.kind(),
    };
    fit.residual = pts
        .iter()
        .map(|&(n, v)| (fit.predict(n as f64) / v - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(fit)
}

/// Fits the non-error records.
pub fn fit_exponent(records: &[ExperimentRecord], model: FitModel) -> Result<FitResult> {
    let points: Vec<(u64, f64)> =
        records.iter().filter(|r| !r.is_error()).map(|r| (r.n, r.value)).collect();
    fit_points(&points, model)
}
